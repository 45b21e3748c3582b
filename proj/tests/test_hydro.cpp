#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "crowdscale/errors.hpp"
#include "crowdscale/hydro.hpp"
#include "crowdscale/specialmath.hpp"

using namespace crowdscale;

namespace {

HydroParams params(int n_theta = 128) {
  HydroParams p;
  p.n_theta = n_theta;
  static const auto fam = std::make_shared<IsoKernelFamily>(build_iso_family(p.model.cut, 0.05, 40.0, 24, 257));
  p.kernel = fam;
  return p;
}

double max_residual(const std::vector<double>& d, std::span<const double> rho, const TargetBins& bins,
                    const HydroParams& p) {
  const auto g = dti_map(d, rho, bins, p);
  double m = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) m = std::max(m, std::abs(g[i] - d[i]));
  return m;
}

}  // namespace

TEST_CASE("low density returns the free-walking profile") {
  const HydroParams p = params();
  const TargetBins bins({0.0, 2.0});
  const std::vector<double> rho{0.05, 0.02};
  const std::vector<double> flat(p.n_theta, p.model.cut.big_l);
  // The averaged inverse kernel stays below 1/L, so G(L) = L.
  const auto g = dti_map(flat, rho, bins, p);
  for (double v : g) CHECK(v == p.model.cut.big_l);
  const DtiProfile prof = fixed_point_dti(rho, bins, p);
  for (double v : prof.values) CHECK(v == p.model.cut.big_l);
  const DtiProfile empty = fixed_point_dti(std::vector<double>{0.0, 0.0}, bins, p);
  CHECK(empty.screened);
}

TEST_CASE("isotropic density gives a rotation-invariant profile") {
  const HydroParams p = params();
  std::vector<double> angles;
  // One target per heading node keeps the discrete problem exactly isotropic.
  for (int b = 0; b < p.n_theta; ++b) angles.push_back(2.0 * std::numbers::pi * b / p.n_theta);
  const TargetBins bins(angles);
  const std::vector<double> rho(p.n_theta, 32.0 / p.n_theta);
  const DtiProfile prof = fixed_point_dti(rho, bins, p);
  const auto [lo, hi] = std::minmax_element(prof.values.begin(), prof.values.end());
  CHECK(*hi - *lo < 1e-6 * p.model.cut.big_l);
  CHECK(*hi < p.model.cut.big_l);
}

TEST_CASE("converged profiles satisfy the fixed-point contract") {
  const HydroParams p = params();
  const TargetBins bins({0.0, std::numbers::pi, 1.0});
  for (double level : {2.0, 10.0, 40.0}) {
    const std::vector<double> rho{level, 0.7 * level, 0.3 * level};
    const DtiProfile prof = fixed_point_dti(rho, bins, p);
    CHECK(prof.residual < 1e-8 * p.model.cut.big_l);
    CHECK(max_residual(prof.values, rho, bins, p) == doctest::Approx(prof.residual).epsilon(1e-6).scale(1e-12));
    for (double v : prof.values) {
      CHECK(v >= p.model.cut.ell);
      CHECK(v <= p.model.cut.big_l);
    }
  }
}

TEST_CASE("oncoming stream shortens the DTI") {
  const HydroParams p = params();
  const TargetBins bins({0.0, std::numbers::pi});
  const std::vector<double> rho{20.0, 20.0};
  const DtiProfile prof = fixed_point_dti(rho, bins, p);
  CHECK(prof.values[0] < p.model.cut.big_l);
  CHECK(prof.values[p.n_theta / 2] < p.model.cut.big_l);
}

TEST_CASE("single-direction perturbations break self-consistency") {
  const HydroParams p = params(32);
  const TargetBins bins({0.0, 2.0});
  const std::vector<double> rho{15.0, 10.0};
  const DtiProfile prof = fixed_point_dti(rho, bins, p);
  const double eps = 1e-3 * p.model.cut.big_l;
  for (int i = 0; i < p.n_theta; ++i) {
    std::vector<double> d = prof.values;
    d[i] = std::min(d[i] + eps, p.model.cut.big_l + eps);
    CHECK(max_residual(d, rho, bins, p) > 10.0 * prof.residual);
  }
}

TEST_CASE("rotating the target bins rotates the profile") {
  const HydroParams p = params();
  const int shift = 8;
  const double phi = 2.0 * std::numbers::pi * shift / p.n_theta;
  const std::vector<double> rho{12.0, 6.0};
  const DtiProfile a = fixed_point_dti(rho, TargetBins({0.3, 2.0}), p);
  const DtiProfile b = fixed_point_dti(rho, TargetBins({0.3 + phi, 2.0 + phi}), p);
  for (int i = 0; i < p.n_theta; ++i) CHECK(b.values[(i + shift) % p.n_theta] == doctest::Approx(a.values[i]).epsilon(1e-7));
  const Vec2 ua = equilibrium_velocity(a, p.model, unit_from_angle(0.3));
  const Vec2 ub = equilibrium_velocity(b, p.model, unit_from_angle(0.3 + phi));
  CHECK(norm(rotate(ua, phi) - ub) < 1e-7);
}

TEST_CASE("equilibrium velocity") {
  const HydroParams p = params();
  DtiProfile flat;
  flat.grid = AngleGrid(p.n_theta);
  flat.values.assign(p.n_theta, p.model.cut.big_l);
  const Vec2 a = unit_from_angle(0.9);
  const Vec2 u = equilibrium_velocity(flat, p.model, a);
  CHECK(norm(u) == doctest::Approx(order_parameter(p.model.free_beta())).epsilon(1e-10));
  CHECK(std::abs(cross(u, a)) < 1e-12);

  ModelParams hot = p.model;
  hot.d = 1e6;
  CHECK(norm(equilibrium_velocity(flat, hot, a)) < 1e-3);

  const DtiProfile prof = fixed_point_dti(std::vector<double>{12.0, 6.0}, TargetBins({0.4, 2.0}), p);
  DtiProfile mirrored = prof;
  for (int i = 0; i < p.n_theta; ++i) mirrored.values[i] = prof.values[(p.n_theta - i) % p.n_theta];
  const Vec2 v = equilibrium_velocity(prof, p.model, unit_from_angle(0.4));
  const Vec2 w = equilibrium_velocity(mirrored, p.model, unit_from_angle(-0.4));
  CHECK(w.x == doctest::Approx(v.x).epsilon(1e-12));
  CHECK(w.y == doctest::Approx(-v.y).epsilon(1e-12));
}

TEST_CASE("velocities are a pure function of the local densities") {
  HydroParams p = params(64);
  p.warm_start = false;
  HydroState a(Grid2D(3, 3, 3.0, 3.0), TargetBins({0.0, 2.5}));
  for (int c = 0; c < 9; ++c) {
    a.rho[a.index(0, c)] = 2.0 + c;
    a.rho[a.index(1, c)] = 10.0 - c;
  }
  HydroState b = a;
  update_velocities(a, p);
  const auto first = a.velocity;
  update_velocities(a, p);
  CHECK(a.velocity == first);
  update_velocities(b, p);
  CHECK(b.velocity == first);
}

TEST_CASE("hydro step: uniform rest, bump transport and conservation") {
  HydroParams p = params(64);
  HydroState u(Grid2D(4, 4, 4.0, 4.0), TargetBins({0.0, 2.0}));
  std::fill(u.rho.begin(), u.rho.end(), 8.0);
  const auto before = u.rho;
  for (int n = 0; n < 5; ++n) step_hydro(u, p, 0.5);
  CHECK(u.rho == before);

  // Low density: D = L everywhere, so the bump moves at c |U_free|.
  HydroState s(Grid2D(240, 1, 240.0, 1.0), TargetBins({0.0}));
  for (int c = 0; c < 240; ++c) s.rho[c] = 0.001 + 0.02 * std::exp(-0.5 * std::pow((c + 0.5 - 40.0) / 4.0, 2));
  const double speed = order_parameter(p.model.free_beta());
  const double dt = 0.5;
  const int steps = static_cast<int>(std::round(100.0 / (speed * dt)));
  for (int n = 0; n < steps; ++n) step_hydro(s, p, dt);
  const int peak = static_cast<int>(std::max_element(s.rho.begin(), s.rho.end()) - s.rho.begin());
  CHECK(std::abs(peak + 0.5 - (40.0 + speed * dt * steps)) <= 1.0);

  HydroState m(Grid2D(12, 12, 12.0, 12.0), TargetBins({0.0, std::numbers::pi / 2}));
  for (int c = 0; c < m.n_cells(); ++c) {
    const Vec2 x = m.grid.center(c);
    m.rho[m.index(0, c)] = 0.01 + 6.0 * std::exp(-0.5 * (std::pow(x.x - 4.0, 2) + std::pow(x.y - 6.0, 2)) / 4.0);
    m.rho[m.index(1, c)] = 0.01 + 6.0 * std::exp(-0.5 * (std::pow(x.x - 6.0, 2) + std::pow(x.y - 4.0, 2)) / 4.0);
  }
  const auto m0 = m.mass_per_bin();
  for (int n = 0; n < 1000; ++n) step_hydro(m, p, 0.5);
  const auto m1 = m.mass_per_bin();
  for (std::size_t b = 0; b < m0.size(); ++b) CHECK(std::abs(m1[b] - m0[b]) / m0[b] < 1e-10);
}

TEST_CASE("hydro rejects a vision cone and oversized steps") {
  HydroParams p = params(32);
  p.model.kappa = 0.0;
  CHECK_THROWS_AS(fixed_point_dti(std::vector<double>{1.0}, TargetBins({0.0}), p), std::invalid_argument);
  HydroParams q = params(32);
  HydroState s(Grid2D(4, 4, 4.0, 4.0), TargetBins({0.0}));
  CHECK_THROWS_AS(step_hydro(s, q, 1.0), CflError);
}

TEST_CASE("exhausted iterations report the residual history") {
  HydroParams p = params(64);
  p.max_iterations = 2;
  try {
    fixed_point_dti(std::vector<double>{30.0, 30.0}, TargetBins({0.0, std::numbers::pi}), p);
    FAIL("expected FixedPointError");
  } catch (const FixedPointError& e) {
    CHECK(e.residuals().size() == 2);
  }
}
