#include "crowdscale/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "crowdscale/errors.hpp"
#include "crowdscale/geometry.hpp"
#include "crowdscale/specialmath.hpp"

namespace crowdscale {

FluidField::FluidField(Grid2D grid, TargetBins bins) : grid_(grid), bins_(std::move(bins)) {
  if (bins_.weights.size() != bins_.angles.size()) throw std::invalid_argument("FluidField: bin weights mismatch");
  rho_.assign(static_cast<std::size_t>(n_bins()) * n_cells(), 0.0);
  vel_.assign(rho_.size(), Vec2{});
}

std::vector<double> FluidField::mass_per_bin() const {
  std::vector<double> out(n_bins(), 0.0);
  for (int b = 0; b < n_bins(); ++b) {
    double s = 0.0;
    for (double r : rho_bin(b)) s += r;
    out[b] = s * grid_.cell_area();
  }
  return out;
}

std::vector<double> FluidField::total_density() const {
  std::vector<double> n(n_cells(), 0.0);
  for (int b = 0; b < n_bins(); ++b) {
    for (int c = 0; c < n_cells(); ++c) n[c] += bins_.weights[b] * rho(b, c);
  }
  return n;
}

namespace {

void check_cfl(const Grid2D& g, double c, double dt, const char* who) {
  const double cfl = c * dt / std::min(g.dx(), g.dy());
  if (cfl > 0.9) {
    std::ostringstream msg;
    msg << who << ": transport CFL c dt / min(dx, dy) = " << cfl << " exceeds 0.9";
    throw CflError(msg.str());
  }
}

// One upwind sweep along x (axis 0) or y (axis 1) with face flux
// c (max(U_i, 0) rho_i + min(U_{i+1}, 0) rho_{i+1}).
void continuity_sweep(const Grid2D& g, std::span<double> rho, std::span<const Vec2> vel, double c, double dt,
                      int axis) {
  const std::vector<double> old(rho.begin(), rho.end());
  const double r = c * dt / (axis == 0 ? g.dx() : g.dy());
#pragma omp parallel for schedule(static)
  for (int cell = 0; cell < g.cells(); ++cell) {
    const int i = cell % g.nx;
    const int j = cell / g.nx;
    const int prev = axis == 0 ? g.index(i - 1, j) : g.index(i, j - 1);
    const int next = axis == 0 ? g.index(i + 1, j) : g.index(i, j + 1);
    auto comp = [&](int k) { return axis == 0 ? vel[k].x : vel[k].y; };
    const double right = std::max(comp(cell), 0.0) * old[cell] + std::min(comp(next), 0.0) * old[next];
    const double left = std::max(comp(prev), 0.0) * old[prev] + std::min(comp(cell), 0.0) * old[cell];
    rho[cell] = old[cell] - r * (right - left);
  }
}

}  // namespace

void upwind_continuity(const Grid2D& grid, std::span<double> rho, std::span<const Vec2> velocity, double c,
                       double dt) {
  continuity_sweep(grid, rho, velocity, c, dt, 0);
  continuity_sweep(grid, rho, velocity, c, dt, 1);
}

// ------------------------------------------------------------ monokinetic

namespace {

double mono_dti_impl(const FluidField& f, int cell, int bin, Vec2 w, const FluidParams& p,
                     const std::vector<CellOffset>& offsets, double total, double delta) {
  const ModelParams& m = p.model;
  const double inv_l = 1.0 / m.cut.big_l;
  if (p.mode == InteractionMode::free || !(total > p.vacuum)) return m.cut.big_l;
  const Vec2 ua = f.velocity(bin, cell);
  double inv = 0.0;
  if (p.mode == InteractionMode::nonlocal) {
    const Grid2D& g = f.grid();
    const int ci = cell % g.nx;
    const int cj = cell / g.nx;
    double num = 0.0, den = 0.0;
    for (const CellOffset& o : offsets) {
      if (o.length > delta) break;
      if (!offset_in_cone(o.vec, ua, m.kappa, delta)) continue;
      const int other = g.index(ci + o.di, cj + o.dj);
      for (int b = 0; b < f.n_bins(); ++b) {
        const double rho = f.bins().weights[b] * f.rho(b, other);
        if (!(rho > p.vacuum)) continue;
        den += rho;
        num += rho * elementary_dti_inverse(o.vec, f.velocity(b, other) - w, m.cut);
      }
    }
    inv = den > 0.0 ? num / den : 0.0;
  } else {
    for (int b = 0; b < f.n_bins(); ++b) {
      const double rho = f.bins().weights[b] * f.rho(b, cell);
      if (!(rho > p.vacuum)) continue;
      const Vec2 rel = f.velocity(b, cell) - w;
      const double k = p.mode == InteractionMode::local ? p.kernels.sector->eval(delta, ua, rel)
                                                        : p.kernels.iso->eval(delta, norm(rel));
      inv += rho * k;
    }
    inv /= total;
  }
  return 1.0 / std::max(inv, inv_l);
}

void check_kernels(const FluidParams& p) {
  if (p.mode == InteractionMode::local && !p.kernels.sector) {
    throw std::invalid_argument("local interaction mode needs a sector kernel family");
  }
  if (p.mode == InteractionMode::local_iso && !p.kernels.iso) {
    throw std::invalid_argument("local_iso interaction mode needs an isotropic kernel family");
  }
}

}  // namespace

double mono_dti(const FluidField& f, int cell, int bin, Vec2 w, const FluidParams& p) {
  check_kernels(p);
  const double total = f.total_density()[cell];
  const double delta = interaction_radius(total, p.model.big_c, f.grid().diameter());
  const std::vector<CellOffset> offsets =
      p.mode == InteractionMode::nonlocal ? periodic_offsets(f.grid()) : std::vector<CellOffset>{};
  return mono_dti_impl(f, cell, bin, w, p, offsets, total, delta);
}

std::vector<Vec2> mono_force(const FluidField& f, const FluidParams& p) {
  check_kernels(p);
  const std::vector<double> total = f.total_density();
  const std::vector<CellOffset> offsets =
      p.mode == InteractionMode::nonlocal ? periodic_offsets(f.grid()) : std::vector<CellOffset>{};
  const double h = p.fd_step;
  std::vector<Vec2> out(static_cast<std::size_t>(f.n_bins()) * f.n_cells());
#pragma omp parallel for schedule(dynamic, 4)
  for (int cell = 0; cell < f.n_cells(); ++cell) {
    const double delta = interaction_radius(total[cell], p.model.big_c, f.grid().diameter());
    for (int a = 0; a < f.n_bins(); ++a) {
      if (!(f.rho(a, cell) > p.vacuum)) continue;
      const Vec2 u = f.velocity(a, cell);
      const double th = angle_of(u);
      const double dp = mono_dti_impl(f, cell, a, unit_from_angle(th + h), p, offsets, total[cell], delta);
      const double dm = mono_dti_impl(f, cell, a, unit_from_angle(th - h), p, offsets, total[cell], delta);
      const double ft = probe_force(dp, dm, th, h, f.bins().dir(a), p.model);
      out[f.index(a, cell)] = ft * perp(u / norm(u));
    }
  }
  return out;
}

namespace {

// Upwind directional derivative U.grad V along one axis with frozen U.
void advect_sweep(const Grid2D& g, std::span<Vec2> vel, std::span<const double> rho, double vacuum, double c,
                  double dt, int axis) {
  const std::vector<Vec2> old(vel.begin(), vel.end());
  const double r = c * dt / (axis == 0 ? g.dx() : g.dy());
#pragma omp parallel for schedule(static)
  for (int cell = 0; cell < g.cells(); ++cell) {
    if (!(rho[cell] > vacuum)) continue;
    const int i = cell % g.nx;
    const int j = cell / g.nx;
    const int prev = axis == 0 ? g.index(i - 1, j) : g.index(i, j - 1);
    const int next = axis == 0 ? g.index(i + 1, j) : g.index(i, j + 1);
    const double s = axis == 0 ? old[cell].x : old[cell].y;
    const Vec2 diff = s >= 0.0 ? old[cell] - old[prev] : old[next] - old[cell];
    vel[cell] = old[cell] - (r * s) * diff;
  }
}

}  // namespace

void step_mono(FluidField& f, const FluidParams& p, double dt, FluidDiagnostics* diag) {
  const Grid2D& g = f.grid();
  check_cfl(g, p.model.c, dt, "step_mono");
  const std::vector<Vec2> force = mono_force(f, p);
  FluidField next = f;
  for (int b = 0; b < f.n_bins(); ++b) {
    upwind_continuity(g, next.rho_bin(b), f.velocity_bin(b), p.model.c, dt);
    std::span<Vec2> vel = next.velocity_bin(b);
    advect_sweep(g, vel, f.rho_bin(b), p.vacuum, p.model.c, dt, 0);
    advect_sweep(g, vel, f.rho_bin(b), p.vacuum, p.model.c, dt, 1);
    for (int c = 0; c < f.n_cells(); ++c) {
      if (!(f.rho(b, c) > p.vacuum)) continue;
      const Vec2 v = vel[c] + dt * force[f.index(b, c)];
      const double n = norm(v);
      // A vanishing update (head-on cancellation) keeps the previous heading.
      vel[c] = n > 1e-12 ? v / n : f.velocity(b, c);
    }
    for (int c = 0; c < f.n_cells(); ++c) {
      if (next.rho(b, c) > p.rho_max) {
        std::ostringstream msg;
        msg << "caustic formed: density " << next.rho(b, c) << " exceeds rho_max = " << p.rho_max << " at cell ("
            << c % g.nx << ", " << c / g.nx << "), bin " << b;
        throw CausticError(msg.str());
      }
    }
  }
  f = std::move(next);
  if (diag != nullptr) diag->clamp_count = 0;
}

// -------------------------------------------------------------------- VMF

SymTensor2 vmf_flux_tensor(double rho, Vec2 u) {
  const double un = norm(u);
  if (!(un > 0.0)) throw std::domain_error("vmf_flux_tensor: the limit |U| -> 0 is undefined");
  if (!(un < 1.0)) throw std::domain_error("vmf_flux_tensor: |U| must be < 1");
  const GammaCoefficients gc = gamma_coefficients(un);
  const Vec2 q = perp(u);
  return {rho * (gc.parallel * u.x * u.x + gc.perp * q.x * q.x),
          rho * (gc.parallel * u.x * u.y + gc.perp * q.x * q.y),
          rho * (gc.parallel * u.y * u.y + gc.perp * q.y * q.y)};
}

SymTensor2 vmf_flux_tensor_fast(double rho, Vec2 u) {
  const double un = std::min(norm(u), 1.0);
  const double s = HarmonicRatioTable::instance().scaled(un);
  // (rho/2) [I + s (U U - U^perp U^perp)]
  const double dxx = u.x * u.x - u.y * u.y;
  const double dxy = 2.0 * u.x * u.y;
  return {0.5 * rho * (1.0 + s * dxx), 0.5 * rho * s * dxy, 0.5 * rho * (1.0 - s * dxx)};
}

namespace {

// Derivative of the trigonometric interpolant of samples on a uniform grid;
// the Nyquist mode of an even grid is dropped.
std::vector<double> spectral_derivative(std::span<const double> v) {
  const int n = static_cast<int>(v.size());
  std::vector<double> cs(n), sn(n), out(n, 0.0);
  for (int j = 0; j < n; ++j) {
    cs[j] = std::cos(kTwoPi * j / n);
    sn[j] = std::sin(kTwoPi * j / n);
  }
  for (int k = 1; 2 * k < n; ++k) {
    double a = 0.0, b = 0.0;
    for (int j = 0; j < n; ++j) {
      const int idx = static_cast<int>((static_cast<long>(k) * j) % n);
      a += v[j] * cs[idx];
      b += v[j] * sn[idx];
    }
    a *= 2.0 / n;
    b *= 2.0 / n;
    for (int j = 0; j < n; ++j) {
      const int idx = static_cast<int>((static_cast<long>(k) * j) % n);
      out[j] += k * (b * cs[idx] - a * sn[idx]);
    }
  }
  return out;
}

}  // namespace

Vec2 vmf_average_force(std::span<const double> phi, const AngleGrid& grid, double beta, Vec2 omega,
                       bool by_parts) {
  if (static_cast<int>(phi.size()) != grid.size()) {
    throw std::invalid_argument("vmf_average_force: potential size does not match the grid");
  }
  std::vector<Vec2> units(grid.size());
  for (int j = 0; j < grid.size(); ++j) units[j] = grid.unit(j);
  return vmf_average_force(phi, grid, units, beta, omega, by_parts);
}

Vec2 vmf_average_force(std::span<const double> phi, const AngleGrid& grid, std::span<const Vec2> units, double beta,
                       Vec2 omega, bool by_parts) {
  const int n = grid.size();
  std::vector<double> m(n);
  const double scale = 1.0 / (kTwoPi * bessel_i_scaled(0, beta));
  for (int j = 0; j < n; ++j) m[j] = std::exp(beta * (dot(units[j], omega) - 1.0)) * scale;
  Vec2 acc;
  if (by_parts) {
    double mean_phi = 0.0;
    for (int j = 0; j < n; ++j) {
      const Vec2 u = units[j];
      mean_phi += phi[j] * m[j];
      acc -= (phi[j] * (1.0 + beta * dot(u, omega)) * m[j]) * u;
    }
    acc += (beta * mean_phi) * omega;
  } else {
    const std::vector<double> dphi = spectral_derivative(phi);
    for (int j = 0; j < n; ++j) acc += (-dphi[j] * m[j]) * perp(units[j]);
  }
  return grid.step() * acc;
}

namespace {

struct VmfShape {
  double beta = 0.0;
  Vec2 omega{1.0, 0.0};
};

VmfShape vmf_shape(Vec2 u) {
  const double un = norm(u);
  if (!(un > 0.0)) return {};
  return {beta_of_speed(std::min(un, 1.0 - 1e-9)), u / un};
}

// Averaged DTI on the quadrature grid for the isotropic local mode; it
// depends on the test direction only. Per bin, the radius and concentration
// interpolations are folded once into a profile over the table's psi nodes;
// the nodes lie in [0, 1/ell], so interpolating the folded profile matches
// the clamped family lookup.
std::vector<double> vmf_iso_dti(const FluidField& f, int cell, const std::vector<VmfShape>& shapes,
                                const AngleGrid& grid, const FluidParams& p, double total) {
  const ModelParams& m = p.model;
  std::vector<double> d(grid.size(), m.cut.big_l);
  if (!(total > p.vacuum)) return d;
  const VmfKernelFamily& fam = *p.kernels.vmf_iso;
  const auto br = fam.bracket(interaction_radius(total, m.big_c, f.grid().diameter()));
  const VmfKernelTable& t0 = fam.tables()[br.lo];
  const VmfKernelTable& t1 = fam.tables()[br.weight == 0.0 ? br.lo : br.lo + 1];
  const double d0 = fam.deltas()[br.lo];
  const double d1 = br.weight == 0.0 ? d0 : fam.deltas()[br.lo + 1];
  const double w0 = (1.0 - br.weight) * d0 * d0 / (br.delta * br.delta);
  const double w1 = br.weight * d1 * d1 / (br.delta * br.delta);
  const int nw = t0.n_w();
  const int nb = static_cast<int>(t0.betas().size());
  const double to_node = (nw - 1) / std::numbers::pi;

  std::vector<double> inv(grid.size(), 0.0), prof(nw);
  for (int b = 0; b < f.n_bins(); ++b) {
    const double rho = f.bins().weights[b] * f.rho(b, cell);
    if (!(rho > p.vacuum)) continue;
    const VmfShape& s = shapes[f.index(b, cell)];
    const auto bb = t0.beta_bracket(s.beta);
    const int b1 = std::min(bb.lo + 1, nb - 1);
    for (int i = 0; i < nw; ++i) {
      const double v0 = (1 - bb.t) * t0.node(i, 0, bb.lo) + bb.t * t0.node(i, 0, b1);
      const double v1 = (1 - bb.t) * t1.node(i, 0, bb.lo) + bb.t * t1.node(i, 0, b1);
      prof[i] = rho * (w0 * v0 + w1 * v1);
    }
    const double phase = angle_of(s.omega);
    for (int j = 0; j < grid.size(); ++j) {
      double psi = grid.angle(j) - phase;  // in (-pi, 3pi)
      if (psi > std::numbers::pi) psi -= kTwoPi;
      const double x = std::abs(psi) * to_node;
      const int i = std::min(static_cast<int>(x), nw - 2);
      const double tx = x - i;
      inv[j] += (1 - tx) * prof[i] + tx * prof[i + 1];
    }
  }
  for (int j = 0; j < grid.size(); ++j) d[j] = 1.0 / std::max(inv[j] / total, 1.0 / m.cut.big_l);
  return d;
}

std::vector<double> potential_samples(std::span<const double> dti, std::span<const Vec2> units, Vec2 target,
                                      const ModelParams& m) {
  std::vector<double> phi(units.size());
  for (std::size_t j = 0; j < units.size(); ++j) {
    phi[j] = 0.5 * m.k * norm2(dti[j] * units[j] - m.cut.big_l * target);
  }
  return phi;
}

std::vector<Vec2> vmf_force_potential_form(const FluidField& f, const FluidParams& p, bool by_parts) {
  const AngleGrid grid(p.n_quad);
  std::vector<Vec2> units(grid.size());
  for (int j = 0; j < grid.size(); ++j) units[j] = grid.unit(j);
  const std::vector<double> total = f.total_density();
  std::vector<VmfShape> shapes(static_cast<std::size_t>(f.n_bins()) * f.n_cells());
  for (std::size_t k = 0; k < shapes.size(); ++k) shapes[k] = vmf_shape(f.velocity_data()[k]);
  std::vector<Vec2> out(shapes.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (int cell = 0; cell < f.n_cells(); ++cell) {
    const std::vector<double> dti = p.mode == InteractionMode::local_iso
                                        ? vmf_iso_dti(f, cell, shapes, grid, p, total[cell])
                                        : std::vector<double>(grid.size(), p.model.cut.big_l);
    for (int a = 0; a < f.n_bins(); ++a) {
      if (!(f.rho(a, cell) > p.vacuum)) continue;
      const VmfShape& s = shapes[f.index(a, cell)];
      const std::vector<double> phi = potential_samples(dti, units, f.bins().dir(a), p.model);
      out[f.index(a, cell)] = vmf_average_force(phi, grid, units, s.beta, s.omega, by_parts);
    }
  }
  return out;
}

}  // namespace

std::vector<Vec2> vmf_force(const FluidField& f, const FluidParams& p, FluidDiagnostics* diag) {
  const ModelParams& m = p.model;
  std::vector<Vec2> out(static_cast<std::size_t>(f.n_bins()) * f.n_cells());
  if (p.mode == InteractionMode::free) {
    const double rate = m.k * m.cut.big_l * m.cut.big_l;
    for (int a = 0; a < f.n_bins(); ++a) {
      const Vec2 dir = f.bins().dir(a);
      for (int c = 0; c < f.n_cells(); ++c) {
        if (!(f.rho(a, c) > p.vacuum)) continue;
        // Sigma / rho applied to a, with the unit density tensor.
        const Vec2 sa = vmf_flux_tensor_fast(1.0, f.velocity(a, c)).apply(dir);
        out[f.index(a, c)] = rate * (dir - sa);
      }
    }
    return out;
  }
  if (p.mode == InteractionMode::local_iso) {
    if (!p.kernels.vmf_iso) throw std::invalid_argument("local_iso VMF force needs a VMF kernel family");
    return vmf_force_potential_form(f, p, true);
  }
  check_kernels(p);

  // Cone modes: the partner heading density is the weighted sum of the
  // sampled VMF laws, and the elementary force is averaged over headings.
  const AngleGrid grid(p.n_quad);
  const int nq = grid.size();
  std::vector<std::vector<double>> samples(static_cast<std::size_t>(f.n_bins()) * f.n_cells());
  std::vector<double> g(static_cast<std::size_t>(f.n_cells()) * nq, 0.0);
  for (int b = 0; b < f.n_bins(); ++b) {
    for (int c = 0; c < f.n_cells(); ++c) {
      const double rho = f.rho(b, c);
      if (!(rho > p.vacuum)) continue;
      const VmfShape s = vmf_shape(f.velocity(b, c));
      auto& ms = samples[f.index(b, c)];
      ms = vmf_samples(grid, {s.beta, s.omega});
      const double w = f.bins().weights[b] * rho;
      for (int j = 0; j < nq; ++j) g[static_cast<std::size_t>(c) * nq + j] += w * ms[j];
    }
  }
  const ProbeDti probes = probe_dti(f.grid(), grid, g, p.kinetic());
  if (diag != nullptr) diag->radius_clamped = probes.radius_clamped;
#pragma omp parallel for schedule(static)
  for (int c = 0; c < f.n_cells(); ++c) {
    for (int a = 0; a < f.n_bins(); ++a) {
      const auto& ms = samples[f.index(a, c)];
      if (ms.empty()) continue;
      const Vec2 dir = f.bins().dir(a);
      Vec2 acc;
      for (int j = 0; j < nq; ++j) {
        const std::size_t k = static_cast<std::size_t>(c) * nq + j;
        const double ft = probe_force(probes.plus[k], probes.minus[k], grid.angle(j), p.fd_step, dir, m);
        acc += (ft * ms[j]) * perp(grid.unit(j));
      }
      out[f.index(a, c)] = grid.step() * acc;
    }
  }
  return out;
}

std::vector<Vec2> vmf_force_direct(const FluidField& f, const FluidParams& p) {
  if (p.mode != InteractionMode::free && p.mode != InteractionMode::local_iso) {
    throw std::invalid_argument("vmf_force_direct: only the free and local_iso modes have a potential form");
  }
  if (p.mode == InteractionMode::local_iso && !p.kernels.vmf_iso) {
    throw std::invalid_argument("local_iso VMF force needs a VMF kernel family");
  }
  return vmf_force_potential_form(f, p, false);
}

namespace {

// Rusanov sweep on (rho, m) along one axis; flux (c m_k, c Sigma e_k).
void rusanov_sweep(const Grid2D& g, std::span<double> rho, std::span<Vec2> mom, double c, double dt, int axis) {
  const int n = g.cells();
  std::vector<double> fr(n);
  std::vector<Vec2> fm(n);
  const std::vector<double> r0(rho.begin(), rho.end());
  const std::vector<Vec2> m0(mom.begin(), mom.end());
  for (int k = 0; k < n; ++k) {
    const Vec2 u = r0[k] > 0.0 ? m0[k] / r0[k] : Vec2{};
    const SymTensor2 s = vmf_flux_tensor_fast(r0[k], u);
    fr[k] = c * (axis == 0 ? m0[k].x : m0[k].y);
    fm[k] = c * (axis == 0 ? Vec2{s.xx, s.xy} : Vec2{s.xy, s.yy});
  }
  const double r = dt / (axis == 0 ? g.dx() : g.dy());
#pragma omp parallel for schedule(static)
  for (int cell = 0; cell < n; ++cell) {
    const int i = cell % g.nx;
    const int j = cell / g.nx;
    const int prev = axis == 0 ? g.index(i - 1, j) : g.index(i, j - 1);
    const int next = axis == 0 ? g.index(i + 1, j) : g.index(i, j + 1);
    const double rr = 0.5 * (fr[cell] + fr[next]) - 0.5 * c * (r0[next] - r0[cell]);
    const double rl = 0.5 * (fr[prev] + fr[cell]) - 0.5 * c * (r0[cell] - r0[prev]);
    const Vec2 mr = 0.5 * (fm[cell] + fm[next]) - (0.5 * c) * (m0[next] - m0[cell]);
    const Vec2 ml = 0.5 * (fm[prev] + fm[cell]) - (0.5 * c) * (m0[cell] - m0[prev]);
    rho[cell] = r0[cell] - r * (rr - rl);
    mom[cell] = m0[cell] - r * (mr - ml);
  }
}

}  // namespace

void step_vmf(FluidField& f, const FluidParams& p, double dt, FluidDiagnostics* diag) {
  const Grid2D& g = f.grid();
  const ModelParams& m = p.model;
  check_cfl(g, m.c, dt, "step_vmf");
  FluidDiagnostics local;
  const std::vector<Vec2> force = vmf_force(f, p, &local);
  const double decay = std::exp(-m.d * dt);
  const double gain = m.d > 0.0 ? -std::expm1(-m.d * dt) / m.d : dt;
  const double cap = 1.0 - 1e-9;
  FluidField next = f;
  for (int b = 0; b < f.n_bins(); ++b) {
    std::span<double> rho = next.rho_bin(b);
    std::vector<Vec2> mom(f.n_cells());
    for (int c = 0; c < f.n_cells(); ++c) mom[c] = f.rho(b, c) * f.velocity(b, c);
    rusanov_sweep(g, rho, mom, m.c, dt, 0);
    rusanov_sweep(g, rho, mom, m.c, dt, 1);
    std::span<Vec2> vel = next.velocity_bin(b);
    for (int c = 0; c < f.n_cells(); ++c) {
      if (rho[c] < 0.0) {
        std::ostringstream msg;
        msg << "step_vmf: negative density " << rho[c] << " at cell (" << c % g.nx << ", " << c / g.nx << "), bin "
            << b;
        throw SolverError(msg.str());
      }
      // Exact solution of m' = rho F - d m over dt with F frozen.
      const Vec2 mc = decay * mom[c] + (gain * rho[c]) * force[f.index(b, c)];
      Vec2 u = rho[c] > p.vacuum ? mc / rho[c] : Vec2{};
      const double un = norm(u);
      if (un > cap) {
        u *= cap / un;
        ++local.clamp_count;
      }
      vel[c] = u;
    }
  }
  f = std::move(next);
  if (diag != nullptr) *diag = local;
}

}  // namespace crowdscale
