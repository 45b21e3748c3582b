#include "crowdscale/hydro.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <stdexcept>

#include "crowdscale/errors.hpp"
#include "crowdscale/fluid.hpp"
#include "crowdscale/specialmath.hpp"

namespace crowdscale {

namespace {

double weighted_total(std::span<const double> rho, const TargetBins& bins) {
  double n = 0.0;
  for (int b = 0; b < bins.size(); ++b) n += bins.weights[b] * rho[b];
  return n;
}

// Kernel values K_j = Delta_delta(|u_i - u_{i+j}|) = Delta_delta(2 sin(j dtheta / 2)).
std::vector<double> circulant_kernel(const AngleGrid& grid, double delta, const IsoKernelFamily& family) {
  const int n = grid.size();
  std::vector<double> k(n);
  for (int j = 0; 2 * j <= n; ++j) {
    const double s = std::min(2.0 * std::abs(std::sin(0.5 * grid.angle(j))), 2.0);
    k[j] = family.eval(delta, s);
    k[(n - j) % n] = k[j];
  }
  return k;
}

std::vector<double> apply_map(std::span<const double> dti, std::span<const double> rho, const TargetBins& bins,
                              const HydroParams& p, const AngleGrid& grid, std::span<const Vec2> units,
                              std::span<const double> kernel, double total) {
  const ModelParams& m = p.model;
  const int n = grid.size();
  // Two periods of the mixture so the circular contraction is contiguous.
  std::vector<double> g(2 * static_cast<std::size_t>(n), 0.0);
  for (int b = 0; b < bins.size(); ++b) {
    const double w = bins.weights[b] * rho[b];
    if (!(w > 0.0)) continue;
    const LteProfile lte = lte_from_dti(dti, grid, units, bins.dir(b), m.k, m.cut.big_l, m.d);
    for (int i = 0; i < n; ++i) g[i] += w * lte.values[i];
  }
  std::copy(g.begin(), g.begin() + n, g.begin() + n);
  // Summation stays in increasing j for every i; the i loop vectorizes.
  std::vector<double> s(n, 0.0);
  double* __restrict acc = s.data();
  for (int j = 0; j < n; ++j) {
    const double kj = kernel[j];
    const double* __restrict gj = g.data() + j;
    for (int i = 0; i < n; ++i) acc[i] += kj * gj[i];
  }
  const double scale = grid.step() / total;
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = 1.0 / std::max(s[i] * scale, 1.0 / m.cut.big_l);
  return out;
}

std::vector<Vec2> unit_vectors(const AngleGrid& grid) {
  std::vector<Vec2> u(grid.size());
  for (int i = 0; i < grid.size(); ++i) u[i] = grid.unit(i);
  return u;
}

Vec2 velocity_from(const DtiProfile& profile, std::span<const Vec2> units, const ModelParams& p, Vec2 a) {
  const LteProfile lte = lte_from_dti(profile.values, profile.grid, units, a, p.k, p.cut.big_l, p.d);
  Vec2 m;
  for (int i = 0; i < profile.grid.size(); ++i) m += lte.values[i] * units[i];
  return profile.grid.step() * m;
}

void check_params(const HydroParams& p) {
  if (p.model.kappa > -1.0) throw std::invalid_argument("hydro model requires kappa = -1 (full vision disk)");
  if (!p.kernel) throw std::invalid_argument("hydro model needs an isotropic kernel family");
  if (p.n_theta < 3) throw std::invalid_argument("hydro model needs at least 3 headings");
}

}  // namespace

std::vector<double> dti_map(std::span<const double> dti, std::span<const double> rho, const TargetBins& bins,
                            const HydroParams& p) {
  check_params(p);
  const AngleGrid grid(p.n_theta);
  const double total = weighted_total(rho, bins);
  if (!(total > 0.0)) return std::vector<double>(grid.size(), p.model.cut.big_l);
  const double delta = interaction_radius(total, p.model.big_c, p.diameter);
  const std::vector<double> kernel = circulant_kernel(grid, delta, *p.kernel);
  return apply_map(dti, rho, bins, p, grid, unit_vectors(grid), kernel, total);
}

DtiProfile fixed_point_dti(std::span<const double> rho, const TargetBins& bins, const HydroParams& p,
                           const DtiProfile* warm) {
  check_params(p);
  if (static_cast<int>(rho.size()) != bins.size()) throw std::invalid_argument("fixed_point_dti: one density per bin");
  const double big_l = p.model.cut.big_l;
  DtiProfile out;
  out.grid = AngleGrid(p.n_theta);
  out.values.assign(p.n_theta, big_l);
  const double total = weighted_total(rho, bins);
  if (!(total > 0.0)) {
    out.screened = true;
    return out;
  }
  const double delta = interaction_radius(total, p.model.big_c, p.diameter);
  const std::vector<double> kernel = circulant_kernel(out.grid, delta, *p.kernel);
  // The mixture is a probability density, so the average never exceeds the
  // largest kernel value: below 1/L the map is identically L.
  if (*std::max_element(kernel.begin(), kernel.end()) <= 1.0 / big_l) {
    out.screened = true;
    return out;
  }
  if (warm != nullptr && static_cast<int>(warm->values.size()) == p.n_theta) out.values = warm->values;
  const std::vector<Vec2> units = unit_vectors(out.grid);

  double omega = p.omega;
  double previous = kInf;
  for (int it = 0; it < p.max_iterations; ++it) {
    const std::vector<double> g = apply_map(out.values, rho, bins, p, out.grid, units, kernel, total);
    double r = 0.0;
    for (int i = 0; i < p.n_theta; ++i) r = std::max(r, std::abs(g[i] - out.values[i]));
    out.residual_history.push_back(r);
    out.iterations = it;
    out.residual = r;
    if (r < p.tolerance * big_l) return out;
    // Halve on growth; otherwise relax back toward the plain iteration,
    // which converges fastest when G barely depends on D.
    omega = r > previous ? std::max(0.5 * omega, 1.0 / 1024.0) : std::min(1.25 * omega, 1.0);
    previous = r;
    for (int i = 0; i < p.n_theta; ++i) out.values[i] += omega * (g[i] - out.values[i]);
  }
  std::ostringstream msg;
  msg << "fixed_point_dti: no convergence after " << p.max_iterations << " iterations, residual " << out.residual;
  throw FixedPointError(msg.str(), out.residual_history);
}

Vec2 equilibrium_velocity(const DtiProfile& profile, const ModelParams& p, Vec2 a) {
  return velocity_from(profile, unit_vectors(profile.grid), p, a);
}

HydroState::HydroState(Grid2D g, TargetBins b) : grid(g), bins(std::move(b)) {
  rho.assign(static_cast<std::size_t>(n_bins()) * n_cells(), 0.0);
  velocity.assign(rho.size(), Vec2{});
  profiles.resize(n_cells());
  solved_for.resize(n_cells());
}

std::vector<double> HydroState::mass_per_bin() const {
  std::vector<double> out(n_bins(), 0.0);
  for (int b = 0; b < n_bins(); ++b) {
    double s = 0.0;
    for (int c = 0; c < n_cells(); ++c) s += rho[index(b, c)];
    out[b] = s * grid.cell_area();
  }
  return out;
}

void update_velocities(HydroState& s, const HydroParams& p) {
  check_params(p);
  const int cells = s.n_cells();
  const AngleGrid grid(p.n_theta);
  const std::vector<Vec2> units = unit_vectors(grid);
  // Every screened cell carries the constant profile L, so its velocities
  // are the same per bin and are computed once.
  std::vector<Vec2> free_velocity(s.n_bins());
  {
    DtiProfile flat;
    flat.grid = grid;
    flat.values.assign(p.n_theta, p.model.cut.big_l);
    for (int b = 0; b < s.n_bins(); ++b) free_velocity[b] = velocity_from(flat, units, p.model, s.bins.dir(b));
  }
  std::vector<std::exception_ptr> errors(cells);
#pragma omp parallel for schedule(dynamic, 16)
  for (int c = 0; c < cells; ++c) {
    try {
      std::vector<double> rho(s.n_bins());
      for (int b = 0; b < s.n_bins(); ++b) rho[b] = s.rho[s.index(b, c)];
      if (rho == s.solved_for[c] && !s.profiles[c].values.empty()) continue;
      const DtiProfile* warm = p.warm_start && !s.profiles[c].values.empty() ? &s.profiles[c] : nullptr;
      DtiProfile prof = fixed_point_dti(rho, s.bins, p, warm);
      for (int b = 0; b < s.n_bins(); ++b) {
        s.velocity[s.index(b, c)] =
            prof.screened ? free_velocity[b] : velocity_from(prof, units, p.model, s.bins.dir(b));
      }
      s.profiles[c] = std::move(prof);
      s.solved_for[c] = std::move(rho);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  }
  for (int c = 0; c < cells; ++c) {
    if (!errors[c]) continue;
    try {
      std::rethrow_exception(errors[c]);
    } catch (const FixedPointError& e) {
      std::ostringstream msg;
      msg << "cell (" << c % s.grid.nx << ", " << c / s.grid.nx << "): " << e.what();
      throw FixedPointError(msg.str(), e.residuals());
    }
  }
}

void step_hydro(HydroState& s, const HydroParams& p, double dt) {
  const double cfl = p.model.c * dt / std::min(s.grid.dx(), s.grid.dy());
  if (cfl > 0.9) {
    std::ostringstream msg;
    msg << "step_hydro: transport CFL c dt / min(dx, dy) = " << cfl << " exceeds 0.9";
    throw CflError(msg.str());
  }
  update_velocities(s, p);
  for (int b = 0; b < s.n_bins(); ++b) {
    std::span<double> rho(s.rho.data() + s.index(b, 0), static_cast<std::size_t>(s.n_cells()));
    std::span<const Vec2> vel(s.velocity.data() + s.index(b, 0), static_cast<std::size_t>(s.n_cells()));
    upwind_continuity(s.grid, rho, vel, p.model.c, dt);
  }
}

}  // namespace crowdscale
