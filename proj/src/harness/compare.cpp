#include "crowdscale/harness/compare.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "crowdscale/circle.hpp"

namespace crowdscale::harness {

namespace {

int nearest_bin(double angle, const std::vector<double>& targets) {
  int best = -1;
  double gap = kTwoPi;
  for (int b = 0; b < static_cast<int>(targets.size()); ++b) {
    const double g = std::abs(wrap_angle(angle - targets[b]));
    if (g <= gap) {
      gap = g;
      best = b;
    }
  }
  return best;
}

// Running sums of one time stamp: walker counts and heading sums.
struct Accumulator {
  MomentField field;
  std::vector<double> counts;
  int samples = 0;
};

void finalize(Accumulator& acc) {
  MomentField& m = acc.field;
  const double per = 1.0 / (m.grid.cell_area() * std::max(acc.samples, 1));
  for (std::size_t k = 0; k < m.rho.size(); ++k) {
    if (acc.counts[k] > 0.0) {
      m.velocity[k] = m.velocity[k] / acc.counts[k];
      m.rho[k] = acc.counts[k] * per;
      m.mask[k] = 0;
    } else {
      m.velocity[k] = {};
      m.rho[k] = 0.0;
      m.mask[k] = 1;
    }
  }
}

void add_walker(Accumulator& acc, const BinningSpec& spec, Vec2 x, double theta, double a_angle) {
  const int b = nearest_bin(a_angle, spec.target_angles);
  if (b < 0) return;
  const Grid2D& g = spec.grid;
  const int i = static_cast<int>(std::floor(x.x / g.dx()));
  const int j = static_cast<int>(std::floor(x.y / g.dy()));
  const std::size_t k = acc.field.index(b, g.index(i, j));
  acc.counts[k] += 1.0;
  acc.field.velocity[k] += unit_from_angle(theta);
}

Accumulator make_acc(double t, const BinningSpec& spec) {
  Accumulator a;
  a.field = MomentField(t, spec.grid, static_cast<int>(spec.target_angles.size()));
  a.counts.assign(a.field.rho.size(), 0.0);
  return a;
}

}  // namespace

MomentField crowd_moments(const Crowd& crowd, double t, const BinningSpec& spec) {
  Accumulator acc = make_acc(t, spec);
  acc.samples = 1;
  for (const auto& p : crowd) add_walker(acc, spec, p.x, p.theta, angle_of(p.a));
  finalize(acc);
  return acc.field;
}

std::vector<MomentField> ibm_ensemble_moments(const std::vector<std::filesystem::path>& files,
                                              const BinningSpec& spec) {
  if (files.empty()) throw std::invalid_argument("ibm_ensemble_moments: need at least one trajectory file");
  std::map<double, Accumulator> by_time;
  Accumulator pooled = make_acc(spec.t_max, spec);
  for (const auto& path : files) {
    const CsvTable t = read_csv(path);
    const int ct = t.column("t"), cx = t.column("x"), cy = t.column("y");
    const int cth = t.column("theta"), ca = t.column("a_angle");
    std::map<double, bool> seen;
    for (const auto& r : t.rows) {
      const double time = std::stod(r[ct]);
      if (time < spec.t_min || time > spec.t_max) continue;
      Accumulator& acc = spec.pool ? pooled : by_time.try_emplace(time, make_acc(time, spec)).first->second;
      if (!seen[time]) {
        seen[time] = true;
        ++acc.samples;
      }
      add_walker(acc, spec, {std::stod(r[cx]), std::stod(r[cy])}, std::stod(r[cth]), std::stod(r[ca]));
    }
  }
  std::vector<MomentField> out;
  if (spec.pool) {
    finalize(pooled);
    out.push_back(std::move(pooled.field));
    return out;
  }
  for (auto& [time, acc] : by_time) {
    finalize(acc);
    out.push_back(std::move(acc.field));
  }
  return out;
}

double MassLedger::max_relative_drift() const {
  double worst = 0.0;
  for (std::size_t b = 0; b < first.size(); ++b) {
    if (first[b] != 0.0) worst = std::max(worst, std::abs(last[b] - first[b]) / std::abs(first[b]));
  }
  return worst;
}

double ComparisonReport::max_l1_rho() const {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, r.l1_rho);
  return m;
}

void ComparisonReport::write_csv(std::ostream& out) const {
  out << "t,t_other,resampled,a_bin,l1_rho,linf_rho,l1_momentum,linf_momentum\n";
  for (const auto& r : rows) {
    out << format_double(r.t) << ',' << format_double(r.t_other) << ',' << (r.resampled ? 1 : 0) << ',' << r.bin
        << ',' << format_double(r.l1_rho) << ',' << format_double(r.linf_rho) << ','
        << format_double(r.l1_momentum) << ',' << format_double(r.linf_momentum) << '\n';
  }
}

void ComparisonReport::write_summary(std::ostream& out) const {
  out << "comparison rows: " << rows.size() << "\n";
  out << "max L1(rho): " << format_double(max_l1_rho()) << "\n";
  int resampled = 0;
  for (const auto& r : rows) resampled += r.resampled ? 1 : 0;
  if (resampled > 0) out << "rows matched by nearest time: " << resampled << "\n";
  for (std::size_t i = 0; i < ledgers.size(); ++i) {
    out << "run " << i << " mass drift (max relative over bins): " << format_double(ledgers[i].max_relative_drift())
        << "\n";
    if (!order_parameters[i].empty()) {
      out << "run " << i << " final order parameter: " << format_double(order_parameters[i].back()) << "\n";
    }
  }
}

namespace {

std::vector<double> bin_masses(const MomentField& m) {
  std::vector<double> out(m.n_bins, 0.0);
  for (int b = 0; b < m.n_bins; ++b) {
    for (int c = 0; c < m.grid.cells(); ++c) out[b] += m.rho[m.index(b, c)];
    out[b] *= m.grid.cell_area();
  }
  return out;
}

double order_parameter_of(const MomentField& m) {
  Vec2 mom;
  double mass = 0.0;
  for (std::size_t k = 0; k < m.rho.size(); ++k) {
    mom += m.rho[k] * m.velocity[k];
    mass += m.rho[k];
  }
  return mass > 0.0 ? norm(mom) / mass : 0.0;
}

}  // namespace

ComparisonReport compare(const std::vector<std::vector<MomentField>>& runs) {
  if (runs.size() < 2) throw std::invalid_argument("compare: need at least two runs");
  ComparisonReport rep;
  for (const auto& run : runs) {
    MassLedger l;
    std::vector<double> ops;
    if (!run.empty()) {
      l.first = bin_masses(run.front());
      l.last = bin_masses(run.back());
    }
    for (const auto& m : run) ops.push_back(order_parameter_of(m));
    rep.ledgers.push_back(l);
    rep.order_parameters.push_back(ops);
  }
  const auto& base = runs.front();
  for (std::size_t r = 1; r < runs.size(); ++r) {
    const auto& other = runs[r];
    if (other.empty() || base.empty()) continue;
    for (const MomentField& a : base) {
      const MomentField* b = &other.front();
      for (const MomentField& cand : other) {
        if (std::abs(cand.t - a.t) < std::abs(b->t - a.t)) b = &cand;
      }
      const Grid2D& ga = a.grid;
      const Grid2D& gb = b->grid;
      if (ga.nx != gb.nx || ga.ny != gb.ny || std::abs(ga.lx - gb.lx) > 1e-9 * ga.lx ||
          std::abs(ga.ly - gb.ly) > 1e-9 * ga.ly) {
        throw std::invalid_argument("compare: runs use different grids");
      }
      if (a.n_bins != b->n_bins) throw std::invalid_argument("compare: runs use different target bins");
      for (int bin = 0; bin < a.n_bins; ++bin) {
        ComparisonRow row;
        row.t = a.t;
        row.t_other = b->t;
        row.resampled = a.t != b->t;
        row.bin = bin;
        for (int c = 0; c < ga.cells(); ++c) {
          const std::size_t k = a.index(bin, c);
          const double dr = std::abs(a.rho[k] - b->rho[k]);
          const double dm = norm(a.rho[k] * a.velocity[k] - b->rho[k] * b->velocity[k]);
          row.l1_rho += dr;
          row.l1_momentum += dm;
          row.linf_rho = std::max(row.linf_rho, dr);
          row.linf_momentum = std::max(row.linf_momentum, dm);
        }
        row.l1_rho *= ga.cell_area();
        row.l1_momentum *= ga.cell_area();
        rep.rows.push_back(row);
      }
    }
  }
  return rep;
}

}  // namespace crowdscale::harness
