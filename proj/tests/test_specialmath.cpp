#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "crowdscale/specialmath.hpp"
#include "oracles.hpp"

using namespace crowdscale;

TEST_CASE("Bessel functions at the origin and against the integral") {
  CHECK(bessel_i(0, 0.0) == 1.0);
  CHECK(bessel_i(1, 0.0) == 0.0);
  CHECK(bessel_i(2, 0.0) == 0.0);
  CHECK(bessel_i(0, 1.0) == doctest::Approx(1.26607).epsilon(1e-5));
  CHECK(bessel_i(1, 1.0) == doctest::Approx(0.56516).epsilon(1e-5));
  for (double x : {0.01, 0.3, 1.0, 4.0, 12.0, 15.0, 29.0, 31.0, 60.0, 200.0, 650.0}) {
    for (int k = 0; k < 3; ++k) {
      const double want = oracle::bessel_scaled_integral(k, x);
      CHECK(bessel_i_scaled(k, x) == doctest::Approx(want).epsilon(1e-11));
    }
  }
  CHECK(order_parameter(500.0) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("order parameter") {
  CHECK(order_parameter(0.0) == 0.0);
  CHECK(order_parameter(0.4) == doctest::Approx(0.196).epsilon(1e-3));
  double prev = 0.0;
  for (double b = 0.1; b <= 50.0; b += 0.1) {
    const double v = order_parameter(b);
    CHECK(v > prev);
    CHECK(v < 1.0);
    prev = v;
  }
}

TEST_CASE("inverse order parameter") {
  CHECK(beta_of_speed(0.0) == 0.0);
  // Bisection against the quadrature oracle.
  double lo = 0.0, hi = 2.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double r = oracle::bessel_scaled_integral(1, mid) / oracle::bessel_scaled_integral(0, mid);
    (r < 0.2 ? lo : hi) = mid;
  }
  CHECK(beta_of_speed(0.2) == doctest::Approx(lo).epsilon(1e-9));
  CHECK(beta_of_speed(0.2) == doctest::Approx(0.41).epsilon(0.01));
  for (double b = 0.0; b <= 50.0; b += 0.05) {
    const double back = beta_of_speed(order_parameter(b));
    CHECK(std::abs(back - b) <= 1e-8 * std::max(b, 1e-3));
  }
  CHECK_THROWS_AS(beta_of_speed(1.0), std::domain_error);
}

TEST_CASE("second-moment coefficients") {
  for (double u : {0.05, 0.2, 0.5, 0.8, 0.95, 0.999}) {
    const auto g = gamma_coefficients(u);
    CHECK(g.parallel + g.perp == doctest::Approx(1.0 / (u * u)).epsilon(1e-14));
    const double r2 = second_harmonic_ratio(u);
    CHECK(r2 >= 0.0);
    CHECK(r2 < 1.0);
  }
  const auto g999 = gamma_coefficients(0.999);
  CHECK(g999.parallel >= 0.99);
  CHECK(g999.parallel <= 1.01);

  // u = 0.5 against quadrature of cos^2 weights.
  const double beta = beta_of_speed(0.5);
  const auto m = oracle::vmf_moments(beta, 0.0, 512);
  const auto g = gamma_coefficients(0.5);
  CHECK(g.parallel * 0.25 == doctest::Approx(m.xx).epsilon(1e-10));
  CHECK(g.perp * 0.25 == doctest::Approx(m.yy).epsilon(1e-10));
}

TEST_CASE("tabulated harmonic ratio tracks the exact one") {
  const auto& t = HarmonicRatioTable::instance();
  CHECK(t.scaled(0.0) == doctest::Approx(0.5));
  for (double u = 0.01; u < 0.999; u += 0.0137) {
    CHECK(t.scaled(u) == doctest::Approx(second_harmonic_ratio(u) / (u * u)).epsilon(1e-7));
  }
}

TEST_CASE("VMF density") {
  const AngleGrid grid(256);
  const VmfParams iso{0.0, {1, 0}};
  for (int i = 0; i < 8; ++i) CHECK(vmf_density(grid.unit(i), iso) == doctest::Approx(1.0 / (2 * std::numbers::pi)));
  const VmfParams p{2.0, unit_from_angle(0.7)};
  CHECK(vmf_density(p.omega, p) / vmf_density(-p.omega, p) == doctest::Approx(std::exp(4.0)));
  for (double beta : {0.3, 2.0, 9.0}) {
    const VmfParams q{beta, unit_from_angle(-1.2)};
    const auto s = vmf_samples(grid, q);
    const Vec2 m = grid.first_moment(s);
    CHECK(m.x == doctest::Approx(order_parameter(beta) * q.omega.x).epsilon(1e-10));
    CHECK(m.y == doctest::Approx(order_parameter(beta) * q.omega.y).epsilon(1e-10));
    // Second moments in the frame of omega.
    const double u = order_parameter(beta);
    const auto g = gamma_coefficients(u);
    double par = 0.0, per = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
      const Vec2 e = grid.unit(i);
      par += s[i] * dot(e, q.omega) * dot(e, q.omega) * grid.step();
      per += s[i] * cross(q.omega, e) * cross(q.omega, e) * grid.step();
    }
    CHECK(par == doctest::Approx(g.parallel * u * u).epsilon(1e-8));
    CHECK(per == doctest::Approx(g.perp * u * u).epsilon(1e-8));
  }
}

TEST_CASE("local equilibrium from a DTI profile") {
  const AngleGrid grid(128);
  const double k = 1.0 / 16.0, L = 4.0, d = 0.1;
  const Vec2 a = unit_from_angle(0.3);
  std::vector<double> flat(grid.size(), L);
  const auto lte = lte_from_dti(flat, grid, a, k, L, d);
  CHECK(grid.integrate(lte.values) == doctest::Approx(1.0).epsilon(1e-10));
  const auto vmf = vmf_samples(grid, {k * L * L / d, a});
  for (int i = 0; i < grid.size(); ++i) CHECK(lte.values[i] == doctest::Approx(vmf[i]).epsilon(1e-10));

  const auto hot = lte_from_dti(flat, grid, a, k, L, 1e6);
  for (double v : hot.values) CHECK(std::abs(v - 1.0 / (2 * std::numbers::pi)) < 1e-4);

  std::vector<double> bumpy(grid.size());
  for (int i = 0; i < grid.size(); ++i) bumpy[i] = 0.4 + 3.6 * (0.5 + 0.5 * std::sin(3 * grid.angle(i)));
  const auto b = lte_from_dti(bumpy, grid, a, k, L, d);
  const auto imax = std::max_element(b.values.begin(), b.values.end()) - b.values.begin();
  const auto imin = std::min_element(b.potential.begin(), b.potential.end()) - b.potential.begin();
  CHECK(imax == imin);

  std::vector<double> bad = flat;
  bad[3] = std::nan("");
  CHECK_THROWS_AS(lte_from_dti(bad, grid, a, k, L, d), std::domain_error);
}
