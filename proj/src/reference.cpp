#include "crowdscale/reference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crowdscale::reference {

namespace {

void transport(KineticField& f, double c, double dt, bool along_x) {
  const Grid2D& g = f.grid();
  const KineticField old = f;
  const double h = along_x ? g.dx() : g.dy();
  for (int b = 0; b < f.n_bins(); ++b) {
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        const int cell = g.index(i, j);
        const int lo = along_x ? g.index(i - 1, j) : g.index(i, j - 1);
        const int hi = along_x ? g.index(i + 1, j) : g.index(i, j + 1);
        for (int k = 0; k < f.n_theta(); ++k) {
          const Vec2 e = f.angles().unit(k);
          const double nu = c * (along_x ? e.x : e.y) * dt / h;
          const double fc = old.at(b, cell, k);
          // Donor cell: the upwind neighbour feeds the face flux.
          f.at(b, cell, k) = nu >= 0.0 ? fc - nu * (fc - old.at(b, lo, k)) : fc - nu * (old.at(b, hi, k) - fc);
        }
      }
    }
  }
}

}  // namespace

void transport_x(KineticField& f, double c, double dt) { transport(f, c, dt, true); }
void transport_y(KineticField& f, double c, double dt) { transport(f, c, dt, false); }

std::vector<double> dense_solve(std::vector<double> m, std::vector<double> rhs) {
  const std::size_t n = rhs.size();
  if (m.size() != n * n) throw std::invalid_argument("dense_solve: matrix size mismatch");
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(m[r * n + col]) > std::abs(m[piv * n + col])) piv = r;
    }
    if (m[piv * n + col] == 0.0) throw std::runtime_error("dense_solve: singular matrix");
    if (piv != col) {
      for (std::size_t k = 0; k < n; ++k) std::swap(m[piv * n + k], m[col * n + k]);
      std::swap(rhs[piv], rhs[col]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double l = m[r * n + col] / m[col * n + col];
      if (l == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) m[r * n + k] -= l * m[col * n + k];
      rhs[r] -= l * rhs[col];
    }
  }
  for (std::size_t r = n; r-- > 0;) {
    double s = rhs[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= m[r * n + k] * rhs[k];
    rhs[r] = s / m[r * n + r];
  }
  return rhs;
}

void angular_step(KineticField& f, const ForceField& force, double d, double dt) {
  const int n = f.n_theta();
  const double dth = f.angles().step();
  for (int b = 0; b < f.n_bins(); ++b) {
    for (int cell = 0; cell < f.n_cells(); ++cell) {
      // Assemble I + dt/dth (flux differences) face by face.
      const auto F = force.fiber(b, cell);
      std::vector<double> m(static_cast<std::size_t>(n) * n, 0.0);
      for (int i = 0; i < n; ++i) m[static_cast<std::size_t>(i) * n + i] = 1.0;
      for (int i = 0; i < n; ++i) {
        const int ip = (i + 1) % n;
        const double drift = 0.5 * (F[i] + F[ip]);
        double out_lo, in_hi;
        if (d > 0.0) {
          const double pe = drift * dth / d;
          out_lo = d / dth * bernoulli_weight(-pe);
          in_hi = d / dth * bernoulli_weight(pe);
        } else {
          out_lo = std::max(drift, 0.0);
          in_hi = std::max(-drift, 0.0);
        }
        const double r = dt / dth;
        m[static_cast<std::size_t>(i) * n + i] += r * out_lo;
        m[static_cast<std::size_t>(i) * n + ip] -= r * in_hi;
        m[static_cast<std::size_t>(ip) * n + ip] += r * in_hi;
        m[static_cast<std::size_t>(ip) * n + i] -= r * out_lo;
      }
      auto fib = f.fiber(b, cell);
      const auto x = dense_solve(std::move(m), std::vector<double>(fib.begin(), fib.end()));
      std::copy(x.begin(), x.end(), fib.begin());
    }
  }
}

ProbeDti probe_dti(const Grid2D& grid, const AngleGrid& angles, std::span<const double> g, const KineticParams& kp) {
  if (kp.mode != InteractionMode::local && kp.mode != InteractionMode::local_iso &&
      kp.mode != InteractionMode::free) {
    throw std::invalid_argument("reference::probe_dti covers the free and local modes only");
  }
  const ModelParams& p = kp.model;
  const int nt = angles.size();
  const double L = p.cut.big_l;
  ProbeDti out;
  out.plus.assign(static_cast<std::size_t>(grid.cells()) * nt, L);
  out.minus.assign(out.plus.size(), L);
  if (kp.mode == InteractionMode::free) return out;
  for (int c = 0; c < grid.cells(); ++c) {
    const std::span<const double> gc = g.subspan(static_cast<std::size_t>(c) * nt, nt);
    double total = 0.0;
    for (double v : gc) total += v * angles.step();
    if (!(total > 0.0)) continue;
    bool hit = false;
    const double delta = interaction_radius(total, p.big_c, grid.diameter(), &hit);
    if (hit) ++out.radius_clamped;
    for (int i = 0; i < nt; ++i) {
      const double th = angles.angle(i);
      const Vec2 u = unit_from_angle(th);
      for (int side = 0; side < 2; ++side) {
        const Vec2 w = unit_from_angle(side == 0 ? th + kp.fd_step : th - kp.fd_step);
        double s = 0.0;
        for (int m = 0; m < nt; ++m) {
          const Vec2 v = angles.unit(m);
          const double k = kp.mode == InteractionMode::local ? kp.kernels.sector->eval(delta, u, v - w)
                                                             : kp.kernels.iso->eval(delta, norm(v - w));
          s += k * gc[m] * angles.step();
        }
        const double dti = 1.0 / std::max(s / total, 1.0 / L);
        (side == 0 ? out.plus : out.minus)[static_cast<std::size_t>(c) * nt + i] = dti;
      }
    }
  }
  return out;
}

ForceField force_field(const KineticField& f, const KineticParams& kp) {
  const int nt = f.n_theta();
  ForceField out;
  out.n_bins = f.n_bins();
  out.n_cells = f.n_cells();
  out.n_theta = nt;
  out.values.assign(static_cast<std::size_t>(out.n_bins) * out.n_cells * nt, 0.0);
  std::vector<double> g(static_cast<std::size_t>(f.n_cells()) * nt, 0.0);
  for (int b = 0; b < f.n_bins(); ++b) {
    for (int c = 0; c < f.n_cells(); ++c) {
      for (int i = 0; i < nt; ++i) g[static_cast<std::size_t>(c) * nt + i] += f.bins().weights[b] * f.at(b, c, i);
    }
  }
  const ProbeDti pr = reference::probe_dti(f.grid(), f.angles(), g, kp);
  out.radius_clamped = pr.radius_clamped;
  for (int b = 0; b < f.n_bins(); ++b) {
    for (int c = 0; c < f.n_cells(); ++c) {
      for (int i = 0; i < nt; ++i) {
        const std::size_t k = static_cast<std::size_t>(c) * nt + i;
        out.values[(static_cast<std::size_t>(b) * out.n_cells + c) * nt + i] =
            probe_force(pr.plus[k], pr.minus[k], f.angles().angle(i), kp.fd_step, f.bins().dir(b), kp.model);
      }
    }
  }
  return out;
}

void step_kinetic(KineticField& f, const KineticParams& p, double dt) {
  const double c = p.model.c;
  reference::transport_x(f, c, 0.5 * dt);
  reference::transport_y(f, c, 0.5 * dt);
  const ForceField force = reference::force_field(f, p);
  reference::angular_step(f, force, p.model.d, dt);
  reference::transport_y(f, c, 0.5 * dt);
  reference::transport_x(f, c, 0.5 * dt);
}

}  // namespace crowdscale::reference
