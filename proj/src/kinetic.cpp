#include "crowdscale/kinetic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "crowdscale/errors.hpp"
#include "crowdscale/geometry.hpp"

namespace crowdscale {

InteractionMode parse_interaction_mode(const std::string& name) {
  if (name == "free") return InteractionMode::free;
  if (name == "nonlocal") return InteractionMode::nonlocal;
  if (name == "local") return InteractionMode::local;
  if (name == "local_iso") return InteractionMode::local_iso;
  throw std::invalid_argument("unknown interaction mode '" + name + "'");
}

std::string to_string(InteractionMode mode) {
  switch (mode) {
    case InteractionMode::free: return "free";
    case InteractionMode::nonlocal: return "nonlocal";
    case InteractionMode::local: return "local";
    case InteractionMode::local_iso: return "local_iso";
  }
  return "free";
}

KineticField::KineticField(Grid2D grid, AngleGrid angles, TargetBins bins)
    : grid_(grid), angles_(angles), bins_(std::move(bins)) {
  if (angles_.size() < 3) throw std::invalid_argument("KineticField: need at least 3 headings");
  if (bins_.weights.size() != bins_.angles.size()) throw std::invalid_argument("KineticField: bin weights mismatch");
  data_.assign(static_cast<std::size_t>(n_bins()) * n_cells() * n_theta(), 0.0);
}

std::vector<double> KineticField::mass_per_bin() const {
  std::vector<double> out(n_bins(), 0.0);
  const double w = grid_.cell_area() * angles_.step();
  for (int b = 0; b < n_bins(); ++b) {
    double s = 0.0;
    const std::size_t lo = offset(b, 0);
    const std::size_t hi = lo + static_cast<std::size_t>(n_cells()) * n_theta();
    for (std::size_t k = lo; k < hi; ++k) s += data_[k];
    out[b] = s * w;
  }
  return out;
}

Moments moments(const KineticField& f) {
  Moments m;
  m.n_bins = f.n_bins();
  m.n_cells = f.n_cells();
  const std::size_t nbc = static_cast<std::size_t>(m.n_bins) * m.n_cells;
  m.rho.assign(nbc, 0.0);
  m.velocity.assign(nbc, Vec2{});
  m.empty.assign(nbc, 0);
  m.total.assign(m.n_cells, 0.0);
  const AngleGrid& ag = f.angles();
  std::vector<Vec2> units(ag.size());
  for (int i = 0; i < ag.size(); ++i) units[i] = ag.unit(i);
  for (int b = 0; b < m.n_bins; ++b) {
    for (int c = 0; c < m.n_cells; ++c) {
      const auto fib = f.fiber(b, c);
      double rho = 0.0;
      Vec2 mom;
      for (int i = 0; i < ag.size(); ++i) {
        rho += fib[i];
        mom += fib[i] * units[i];
      }
      rho *= ag.step();
      mom *= ag.step();
      const std::size_t k = static_cast<std::size_t>(b) * m.n_cells + c;
      m.rho[k] = rho;
      if (rho > 0.0) {
        m.velocity[k] = mom / rho;
      } else {
        m.empty[k] = 1;
      }
    }
  }
  for (int c = 0; c < m.n_cells; ++c) {
    double n = 0.0;
    for (int b = 0; b < m.n_bins; ++b) n += f.bins().weights[b] * m.rho_at(b, c);
    m.total[c] = n;
  }
  return m;
}

double interaction_radius(double total_density, double big_c, double diameter, bool* clamped) {
  double delta = total_density > 0.0 ? big_c / std::sqrt(total_density) : diameter;
  const bool hit = !(delta < diameter);
  if (hit) delta = diameter;
  if (clamped != nullptr) *clamped = hit;
  return delta;
}


std::vector<double> heading_density(const KineticField& f) {
  const int nt = f.n_theta();
  std::vector<double> g(static_cast<std::size_t>(f.n_cells()) * nt, 0.0);
  for (int b = 0; b < f.n_bins(); ++b) {
    const double w = f.bins().weights[b];
    for (int c = 0; c < f.n_cells(); ++c) {
      const auto fib = f.fiber(b, c);
      double* out = g.data() + static_cast<std::size_t>(c) * nt;
      for (int i = 0; i < nt; ++i) out[i] += w * fib[i];
    }
  }
  return g;
}

namespace {

std::vector<Vec2> unit_table(const AngleGrid& ag) {
  std::vector<Vec2> u(ag.size());
  for (int i = 0; i < ag.size(); ++i) u[i] = ag.unit(i);
  return u;
}

double cell_total(std::span<const double> g, int cell, int nt, double dtheta) {
  double s = 0.0;
  for (int v = 0; v < nt; ++v) s += g[static_cast<std::size_t>(cell) * nt + v];
  return s * dtheta;
}

std::vector<const CellOffset*> sector_members(const std::vector<CellOffset>& offsets, Vec2 u, double kappa,
                                              double delta) {
  std::vector<const CellOffset*> out;
  for (const CellOffset& o : offsets) {
    if (o.length > delta) break;
    if (offset_in_cone(o.vec, u, kappa, delta)) out.push_back(&o);
  }
  return out;
}

// Mean elementary inverse DTI over the partners in the listed cells, weighted
// by the heading density g; zero when the sector holds no mass.
double sector_inverse_dti(const Grid2D& grid, int nt, std::span<const double> g, int cell,
                          const std::vector<const CellOffset*>& members, Vec2 w, const CutoffParams& cut,
                          const std::vector<Vec2>& units) {
  const int ci = cell % grid.nx;
  const int cj = cell / grid.nx;
  double num = 0.0;
  double den = 0.0;
  for (const CellOffset* o : members) {
    const int other = grid.index(ci + o->di, cj + o->dj);
    const double* gv = g.data() + static_cast<std::size_t>(other) * nt;
    for (int v = 0; v < nt; ++v) {
      if (gv[v] == 0.0) continue;
      den += gv[v];
      num += gv[v] * elementary_dti_inverse(o->vec, units[v] - w, cut);
    }
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace

double nonlocal_dti(const KineticField& f, int cell, Vec2 u, Vec2 w, const ModelParams& p) {
  const std::vector<double> g = heading_density(f);
  const std::vector<CellOffset> offsets = periodic_offsets(f.grid());
  const double n = cell_total(g, cell, f.n_theta(), f.angles().step());
  const double delta = interaction_radius(n, p.big_c, f.grid().diameter());
  const auto members = sector_members(offsets, u, p.kappa, delta);
  const double inv = sector_inverse_dti(f.grid(), f.n_theta(), g, cell, members, w, p.cut, unit_table(f.angles()));
  return 1.0 / std::max(inv, 1.0 / p.cut.big_l);
}

std::vector<double> nonlocal_dti_field(const KineticField& f, Vec2 w, const ModelParams& p) {
  const std::vector<double> g = heading_density(f);
  const std::vector<CellOffset> offsets = periodic_offsets(f.grid());
  const std::vector<Vec2> units = unit_table(f.angles());
  const int nt = f.n_theta();
  std::vector<double> out(static_cast<std::size_t>(f.n_cells()) * nt);
#pragma omp parallel for schedule(dynamic, 1)
  for (int c = 0; c < f.n_cells(); ++c) {
    const double delta = interaction_radius(cell_total(g, c, nt, f.angles().step()), p.big_c, f.grid().diameter());
    for (int i = 0; i < nt; ++i) {
      const auto members = sector_members(offsets, units[i], p.kappa, delta);
      const double inv = sector_inverse_dti(f.grid(), nt, g, c, members, w, p.cut, units);
      out[static_cast<std::size_t>(c) * nt + i] = 1.0 / std::max(inv, 1.0 / p.cut.big_l);
    }
  }
  return out;
}

ProbeStencil make_probe_stencil(const AngleGrid& angles, double h) {
  ProbeStencil st;
  st.angles = angles;
  st.h = h;
  // Heading frame: u along +x, probes at +-h, partner heading at m dtheta.
  // The uniform grid makes the relative velocities the same for every heading.
  const Vec2 wp = unit_from_angle(h);
  const Vec2 wm = unit_from_angle(-h);
  for (int m = 0; m < angles.size(); ++m) {
    const Vec2 v = angles.unit(m);
    st.rel_plus.push_back(v - wp);
    st.rel_minus.push_back(v - wm);
    st.s_plus.push_back(norm(v - wp));
    st.s_minus.push_back(norm(v - wm));
  }
  return st;
}

void local_probe_dti(const KernelSet& kernels, InteractionMode mode, double delta, std::span<const double> g,
                     double total, const ProbeStencil& st, const ModelParams& p, std::span<double> d_plus,
                     std::span<double> d_minus) {
  const AngleGrid& angles = st.angles;
  const int nt = angles.size();
  std::fill(d_plus.begin(), d_plus.end(), p.cut.big_l);
  std::fill(d_minus.begin(), d_minus.end(), p.cut.big_l);
  if (!(total > 0.0)) return;
  const double inv_l = 1.0 / p.cut.big_l;
  std::vector<double> kp(nt), km(nt);
  const Vec2 u{1.0, 0.0};
  if (mode == InteractionMode::local) {
    const auto br = kernels.sector->bracket(delta);
    for (int m = 0; m < nt; ++m) {
      kp[m] = kernels.sector->eval(br, u, st.rel_plus[m]);
      km[m] = kernels.sector->eval(br, u, st.rel_minus[m]);
    }
  } else {
    const auto br = kernels.iso->bracket(delta);
    for (int m = 0; m < nt; ++m) {
      kp[m] = kernels.iso->eval(br, st.s_plus[m]);
      km[m] = kernels.iso->eval(br, st.s_minus[m]);
    }
  }
  const double scale = angles.step() / total;
  // Two periods of g so the circular contraction runs over contiguous
  // memory. The loop order (m outer) keeps each sum in increasing m while
  // letting the compiler vectorize over headings.
  std::vector<double> gg(2 * static_cast<std::size_t>(nt));
  std::copy(g.begin(), g.end(), gg.begin());
  std::copy(g.begin(), g.end(), gg.begin() + nt);
  std::vector<double> sp(nt, 0.0), sm(nt, 0.0);
  double* __restrict ps = sp.data();
  double* __restrict ms = sm.data();
  for (int m = 0; m < nt; ++m) {
    const double a = kp[m], b = km[m];
    const double* __restrict gm = gg.data() + m;
    for (int i = 0; i < nt; ++i) {
      ps[i] += a * gm[i];
      ms[i] += b * gm[i];
    }
  }
  for (int i = 0; i < nt; ++i) {
    d_plus[i] = 1.0 / std::max(sp[i] * scale, inv_l);
    d_minus[i] = 1.0 / std::max(sm[i] * scale, inv_l);
  }
}

ProbeDti probe_dti(const Grid2D& grid, const AngleGrid& angles, std::span<const double> g, const KineticParams& kp) {
  const ModelParams& p = kp.model;
  const int nt = angles.size();
  const int cells = grid.cells();
  if (g.size() != static_cast<std::size_t>(cells) * nt) throw std::invalid_argument("probe_dti: density size mismatch");
  ProbeDti out;
  out.plus.assign(static_cast<std::size_t>(cells) * nt, p.cut.big_l);
  out.minus.assign(out.plus.size(), p.cut.big_l);
  if (kp.mode == InteractionMode::free) return out;
  if (kp.mode == InteractionMode::local && !kp.kernels.sector) {
    throw std::invalid_argument("local interaction mode needs a sector kernel family");
  }
  if (kp.mode == InteractionMode::local_iso && !kp.kernels.iso) {
    throw std::invalid_argument("local_iso interaction mode needs an isotropic kernel family");
  }
  const double h = kp.fd_step;
  const double dth = angles.step();
  const std::vector<Vec2> units = unit_table(angles);
  const ProbeStencil stencil = make_probe_stencil(angles, h);
  const std::vector<CellOffset> offsets =
      kp.mode == InteractionMode::nonlocal ? periodic_offsets(grid) : std::vector<CellOffset>{};
  const double inv_l = 1.0 / p.cut.big_l;
  int clamped = 0;

#pragma omp parallel for schedule(dynamic, 1) reduction(+ : clamped)
  for (int c = 0; c < cells; ++c) {
    const double n = cell_total(g, c, nt, dth);
    bool hit = false;
    const double delta = interaction_radius(n, p.big_c, grid.diameter(), &hit);
    if (hit) ++clamped;
    const std::size_t base = static_cast<std::size_t>(c) * nt;
    std::span<double> dp(out.plus.data() + base, nt);
    std::span<double> dm(out.minus.data() + base, nt);
    if (kp.mode == InteractionMode::nonlocal) {
      for (int i = 0; i < nt; ++i) {
        const auto members = sector_members(offsets, units[i], p.kappa, delta);
        const double th = angles.angle(i);
        const double ip = sector_inverse_dti(grid, nt, g, c, members, unit_from_angle(th + h), p.cut, units);
        const double im = sector_inverse_dti(grid, nt, g, c, members, unit_from_angle(th - h), p.cut, units);
        dp[i] = 1.0 / std::max(ip, inv_l);
        dm[i] = 1.0 / std::max(im, inv_l);
      }
    } else {
      local_probe_dti(kp.kernels, kp.mode, delta, g.subspan(base, nt), n, stencil, p, dp, dm);
    }
  }
  out.radius_clamped = clamped;
  return out;
}

double probe_force(double d_plus, double d_minus, Vec2 w_plus, Vec2 w_minus, double h, Vec2 target,
                   const ModelParams& p) {
  const double up = 0.5 * p.k * norm2(d_plus * w_plus - p.cut.big_l * target);
  const double dn = 0.5 * p.k * norm2(d_minus * w_minus - p.cut.big_l * target);
  return -(up - dn) / (2.0 * h);
}

double probe_force(double d_plus, double d_minus, double theta, double h, Vec2 target, const ModelParams& p) {
  return probe_force(d_plus, d_minus, unit_from_angle(theta + h), unit_from_angle(theta - h), h, target, p);
}

ForceField force_field(const KineticField& f, const KineticParams& kp) {
  const ModelParams& p = kp.model;
  const int nt = f.n_theta();
  const double h = kp.fd_step;
  ForceField out;
  out.n_bins = f.n_bins();
  out.n_cells = f.n_cells();
  out.n_theta = nt;
  out.uniform = kp.mode == InteractionMode::free;
  const int stored = out.uniform ? 1 : out.n_cells;
  out.values.assign(static_cast<std::size_t>(out.n_bins) * stored * nt, 0.0);

  ProbeDti probes;
  if (out.uniform) {
    probes.plus.assign(nt, p.cut.big_l);
    probes.minus.assign(nt, p.cut.big_l);
  } else {
    probes = probe_dti(f.grid(), f.angles(), heading_density(f), kp);
  }
  out.radius_clamped = probes.radius_clamped;
  std::vector<Vec2> w_plus(nt), w_minus(nt);
  for (int i = 0; i < nt; ++i) {
    w_plus[i] = unit_from_angle(f.angles().angle(i) + h);
    w_minus[i] = unit_from_angle(f.angles().angle(i) - h);
  }
  for (int b = 0; b < out.n_bins; ++b) {
    const Vec2 a = f.bins().dir(b);
#pragma omp parallel for schedule(static)
    for (int c = 0; c < stored; ++c) {
      const std::size_t src = static_cast<std::size_t>(c) * nt;
      double* dst = out.values.data() + (static_cast<std::size_t>(b) * stored + c) * nt;
      for (int i = 0; i < nt; ++i) {
        dst[i] = probe_force(probes.plus[src + i], probes.minus[src + i], w_plus[i], w_minus[i], h, a, p);
      }
    }
  }
  return out;
}

// ------------------------------------------------------------- transport

void transport_x(KineticField& f, double c, double dt) {
  const Grid2D& g = f.grid();
  const int nt = f.n_theta();
  std::vector<double> np(nt), nm(nt);
  for (int i = 0; i < nt; ++i) {
    const double nu = c * std::cos(f.angles().angle(i)) * dt / g.dx();
    np[i] = std::max(nu, 0.0);
    nm[i] = std::min(nu, 0.0);
  }
  const int rows = f.n_bins() * g.ny;
#pragma omp parallel
  {
    std::vector<double> old(static_cast<std::size_t>(g.nx) * nt);
#pragma omp for schedule(static)
    for (int r = 0; r < rows; ++r) {
      const int b = r / g.ny;
      const int j = r % g.ny;
      double* row = f.data().data() + f.offset(b, j * g.nx);
      std::copy(row, row + old.size(), old.begin());
      for (int i = 0; i < g.nx; ++i) {
        const double* cur = old.data() + static_cast<std::size_t>(i) * nt;
        const double* left = old.data() + static_cast<std::size_t>((i + g.nx - 1) % g.nx) * nt;
        const double* right = old.data() + static_cast<std::size_t>((i + 1) % g.nx) * nt;
        double* dst = row + static_cast<std::size_t>(i) * nt;
        for (int k = 0; k < nt; ++k) {
          dst[k] = cur[k] - np[k] * (cur[k] - left[k]) - nm[k] * (right[k] - cur[k]);
        }
      }
    }
  }
}

void transport_y(KineticField& f, double c, double dt) {
  const Grid2D& g = f.grid();
  const int nt = f.n_theta();
  std::vector<double> np(nt), nm(nt);
  for (int i = 0; i < nt; ++i) {
    const double nu = c * std::sin(f.angles().angle(i)) * dt / g.dy();
    np[i] = std::max(nu, 0.0);
    nm[i] = std::min(nu, 0.0);
  }
  const int cols = f.n_bins() * g.nx;
#pragma omp parallel
  {
    std::vector<double> old(static_cast<std::size_t>(g.ny) * nt);
#pragma omp for schedule(static)
    for (int col = 0; col < cols; ++col) {
      const int b = col / g.nx;
      const int i = col % g.nx;
      for (int j = 0; j < g.ny; ++j) {
        const double* src = f.data().data() + f.offset(b, j * g.nx + i);
        std::copy(src, src + nt, old.begin() + static_cast<std::ptrdiff_t>(j) * nt);
      }
      for (int j = 0; j < g.ny; ++j) {
        const double* cur = old.data() + static_cast<std::size_t>(j) * nt;
        const double* down = old.data() + static_cast<std::size_t>((j + g.ny - 1) % g.ny) * nt;
        const double* up = old.data() + static_cast<std::size_t>((j + 1) % g.ny) * nt;
        double* dst = f.data().data() + f.offset(b, j * g.nx + i);
        for (int k = 0; k < nt; ++k) {
          dst[k] = cur[k] - np[k] * (cur[k] - down[k]) - nm[k] * (up[k] - cur[k]);
        }
      }
    }
  }
}

// ---------------------------------------------------------- angular step

double bernoulli_weight(double x) {
  if (std::abs(x) < 1e-5) return 1.0 - 0.5 * x + x * x / 12.0;
  return x / std::expm1(x);
}

void angular_coefficients(std::span<const double> force, double d, double dt, double dtheta,
                          std::vector<double>& a, std::vector<double>& b, std::vector<double>& c) {
  const int n = static_cast<int>(force.size());
  a.assign(n, 0.0);
  b.assign(n, 1.0);
  c.assign(n, 0.0);
  // Face i carries the flux between headings i and i+1.
  for (int i = 0; i < n; ++i) {
    const int ip = (i + 1) % n;
    const double drift = 0.5 * (force[i] + force[ip]);
    double out_lo, in_hi;  // flux = out_lo * f_i - in_hi * f_{i+1}
    if (d > 0.0) {
      const double peclet = drift * dtheta / d;
      out_lo = d / dtheta * bernoulli_weight(-peclet);
      in_hi = d / dtheta * bernoulli_weight(peclet);
    } else {
      out_lo = std::max(drift, 0.0);
      in_hi = -std::min(drift, 0.0);
    }
    const double r = dt / dtheta;
    b[i] += r * out_lo;
    c[i] -= r * in_hi;
    b[ip] += r * in_hi;
    a[ip] -= r * out_lo;
  }
}

CyclicTridiagonal::CyclicTridiagonal(std::vector<double> a, std::vector<double> b, std::vector<double> c)
    : n_(static_cast<int>(b.size())) {
  if (n_ < 3 || a.size() != b.size() || c.size() != b.size()) {
    throw std::invalid_argument("CyclicTridiagonal: need three equal-length diagonals, n >= 3");
  }
  // Sherman-Morrison: A = A' + u v^T with the corner entries folded into A'.
  first_coupling_ = a[0];        // row 0, column n-1
  last_coupling_ = c[n_ - 1];    // row n-1, column 0
  gamma_ = -b[0];
  std::vector<double> bb = b;
  bb[0] -= gamma_;
  bb[n_ - 1] -= last_coupling_ * first_coupling_ / gamma_;
  a_ = std::move(a);
  cp_.assign(n_, 0.0);
  inv_den_.assign(n_, 0.0);
  inv_den_[0] = 1.0 / bb[0];
  cp_[0] = c[0] * inv_den_[0];
  for (int i = 1; i < n_; ++i) {
    inv_den_[i] = 1.0 / (bb[i] - a_[i] * cp_[i - 1]);
    cp_[i] = c[i] * inv_den_[i];
  }
  z_.assign(n_, 0.0);
  z_[0] = gamma_;
  z_[n_ - 1] = last_coupling_;
  thomas(z_);
  corr_den_ = 1.0 + z_[0] + first_coupling_ * z_[n_ - 1] / gamma_;
}

void CyclicTridiagonal::thomas(std::span<double> x) const {
  x[0] *= inv_den_[0];
  for (int i = 1; i < n_; ++i) x[i] = (x[i] - a_[i] * x[i - 1]) * inv_den_[i];
  for (int i = n_ - 2; i >= 0; --i) x[i] -= cp_[i] * x[i + 1];
}

void CyclicTridiagonal::solve(std::span<double> rhs) const {
  thomas(rhs);
  const double fact = (rhs[0] + first_coupling_ * rhs[n_ - 1] / gamma_) / corr_den_;
  for (int i = 0; i < n_; ++i) rhs[i] -= fact * z_[i];
}


void angular_step(KineticField& f, const ForceField& force, double d, double dt) {
  const double dth = f.angles().step();
  if (force.uniform) {
    for (int b = 0; b < f.n_bins(); ++b) {
      std::vector<double> a, bd, c;
      angular_coefficients(force.fiber(b, 0), d, dt, dth, a, bd, c);
      const CyclicTridiagonal sys(std::move(a), std::move(bd), std::move(c));
#pragma omp parallel for schedule(static)
      for (int cell = 0; cell < f.n_cells(); ++cell) sys.solve(f.fiber(b, cell));
    }
    return;
  }
  const int work = f.n_bins() * f.n_cells();
#pragma omp parallel
  {
    std::vector<double> a, bd, c;
#pragma omp for schedule(static)
    for (int k = 0; k < work; ++k) {
      const int b = k / f.n_cells();
      const int cell = k % f.n_cells();
      angular_coefficients(force.fiber(b, cell), d, dt, dth, a, bd, c);
      const CyclicTridiagonal sys(a, bd, c);
      sys.solve(f.fiber(b, cell));
    }
  }
}

void step_kinetic(KineticField& f, const KineticParams& p, double dt, KineticDiagnostics* diag) {
  const double cfl = p.model.c * dt / std::min(f.grid().dx(), f.grid().dy());
  if (cfl > 0.9) {
    std::ostringstream msg;
    msg << "kinetic transport CFL c dt / min(dx, dy) = " << cfl << " exceeds 0.9";
    throw CflError(msg.str());
  }
  const double c = p.model.c;
  transport_x(f, c, 0.5 * dt);
  transport_y(f, c, 0.5 * dt);
  const ForceField force = force_field(f, p);
  angular_step(f, force, p.model.d, dt);
  transport_y(f, c, 0.5 * dt);
  transport_x(f, c, 0.5 * dt);
  if (diag != nullptr) diag->radius_clamped = force.radius_clamped;
}

}  // namespace crowdscale
