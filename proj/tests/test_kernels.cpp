#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <vector>

#include "crowdscale/kernels.hpp"
#include "crowdscale/specialmath.hpp"
#include "oracles.hpp"

using namespace crowdscale;

namespace {

const CutoffParams kCut{0.4, 4.0, 0.4};

// Fine trapezoid VMF average of the direct full-disk kernel, with a node on
// v = w where the kernel has its s log s kink.
double vmf_average_direct(double delta, double psi, double beta, int n) {
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double phi = 2.0 * std::numbers::pi * i / n;  // angle of v from w
    const double s = 2.0 * std::abs(std::sin(0.5 * phi));
    sum += iso_kernel_direct(delta, kCut, s) * std::exp(beta * (std::cos(psi + phi) - 1.0));
  }
  return sum / n / bessel_i_scaled(0, beta);
}

}  // namespace

TEST_CASE("zero relative speed gives an empty support") {
  const auto t = build_kernel_table(0.0, 2.0, kCut, 17);
  for (int i = 0; i < t.n_mu(); ++i) CHECK(t.node(i, 0) == 0.0);
  CHECK(build_iso_kernel(2.0, kCut, 17).values()[0] == 0.0);
}

TEST_CASE("full-disk sector table equals the isotropic table") {
  const auto t = build_kernel_table(-1.0, 2.5, kCut, 33);
  const auto iso = build_iso_kernel(2.5, kCut, 33);
  for (int i = 0; i < t.n_mu(); ++i) {
    for (int j = 0; j < t.n_s(); ++j) CHECK(std::abs(t.node(i, j) - iso.values()[j]) < 1e-6);
  }
}

TEST_CASE("sector kernel against Monte-Carlo integration") {
  const double kappa = 0.2, delta = 1.5;
  const auto t = build_kernel_table(kappa, delta, kCut, 17);
  std::mt19937_64 gen(3);
  for (int k = 0; k < 8; ++k) {
    const int i = static_cast<int>(gen() % t.n_mu());
    const int j = 1 + static_cast<int>(gen() % (t.n_s() - 1));
    const auto mc = oracle::mc_sector_kernel(kappa, delta, kCut.ell, kCut.radius, t.mu_at(i), t.s_at(j), 200000, 100 + k);
    CHECK(std::abs(t.node(i, j) - mc.mean) <= 3.0 * mc.sigma + 1e-12);
  }
}

TEST_CASE("kernel values are bounded by 1/ell") {
  for (double kappa : {-1.0, -0.5, 0.0, 0.7}) {
    const auto t = build_kernel_table(kappa, 0.8, kCut, 17);
    for (double v : t.values()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0 / kCut.ell);
    }
  }
}

TEST_CASE("rotational reduction") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> ang(-3.0, 3.0);
  for (int k = 0; k < 20; ++k) {
    const Vec2 u = unit_from_angle(ang(gen));
    const Vec2 v = unit_from_angle(ang(gen));
    const Vec2 w = unit_from_angle(ang(gen));
    const Vec2 r = v - w;
    const double s = norm(r);
    const double base = local_kernel_direct(0.1, 2.0, kCut, dot(u, r) / s, s);
    const double phi = ang(gen);
    const Vec2 ur = rotate(u, phi), rr = rotate(r, phi);
    CHECK(local_kernel_direct(0.1, 2.0, kCut, dot(ur, rr) / norm(rr), norm(rr)) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("delta scaling bound") {
  for (double s : {0.05, 0.3, 1.0, 1.9}) {
    const double k1 = iso_kernel_direct(2.0, kCut, s);
    const double k2 = iso_kernel_direct(4.0, kCut, s);
    CHECK(k2 <= k1 * (1.0 + 1e-12));
  }
}

TEST_CASE("small-s behaviour of the isotropic kernel") {
  std::vector<double> ratios;
  for (double s = 1e-3; s <= 1e-2 * 1.0001; s *= std::pow(10.0, 0.1)) {
    ratios.push_back(iso_kernel_direct(3.0, kCut, s) / (s * std::abs(std::log(s / kCut.ell))));
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  CHECK(*lo > 0.0);
  CHECK(*hi / *lo < 1.25);
}

TEST_CASE("isotropic kernel is nondecreasing for small s when delta >> R") {
  const auto t = build_iso_kernel(6.0, kCut, 257);
  for (int j = 1; t.s_at(j) <= 0.5; ++j) CHECK(t.values()[j] >= t.values()[j - 1]);
}

TEST_CASE("table evaluation contract") {
  const auto t = build_kernel_table(0.0, 2.0, kCut, 33);
  CHECK(t.eval(t.mu_at(5), t.s_at(7)) == doctest::Approx(t.node(5, 7)).epsilon(1e-14));
  const double mid_s = 0.5 * (t.s_at(7) + t.s_at(8));
  CHECK(t.eval(t.mu_at(5), mid_s) == doctest::Approx(0.5 * (t.node(5, 7) + t.node(5, 8))).epsilon(1e-12));
  const double mid_mu = 0.5 * (t.mu_at(5) + t.mu_at(6));
  CHECK(t.eval(mid_mu, t.s_at(7)) == doctest::Approx(0.5 * (t.node(5, 7) + t.node(6, 7))).epsilon(1e-12));
  CHECK_THROWS_AS(t.eval(0.0, 2.5), std::out_of_range);
}

TEST_CASE("interpolated values against direct quadrature at resolution 256") {
  const auto t = build_kernel_table(0.0, 2.0, kCut, 256);
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> mu(-1.0, 1.0), s(0.0, 2.0);
  for (int k = 0; k < 40; ++k) {
    const double m = mu(gen), ss = s(gen);
    CHECK(std::abs(t.eval(m, ss) - local_kernel_direct(0.0, 2.0, kCut, m, ss)) <= 1e-3);
  }
}

TEST_CASE("VMF-averaged isotropic kernel") {
  const auto base = build_iso_kernel(2.0, kCut, 129);
  const std::vector<double> betas{0.0, 1.0, 3.0, 200.0};
  const auto v = build_vmf_kernel(base, betas, 33);
  for (int i = 1; i < v.n_w(); ++i) CHECK(v.node(i, 0, 0) == doctest::Approx(v.node(0, 0, 0)).epsilon(1e-12));
  for (double psi : {0.3, 1.0, 2.5}) {
    const double direct = iso_kernel_direct(2.0, kCut, 2.0 * std::sin(0.5 * psi));
    CHECK(std::abs(v.eval_iso(psi, 200.0) - direct) < 1e-2);
  }
  for (int i : {4, 16, 27}) {
    const double psi = v.w_angle_at(i);
    CHECK(std::abs(v.node(i, 0, 2) - vmf_average_direct(2.0, psi, 3.0, 4096)) < 1e-6);
  }
}

TEST_CASE("radius families interpolate between tables") {
  const auto fam = build_iso_family(kCut, 0.5, 8.0, 9, 65);
  const auto& t = fam.tables()[3];
  CHECK(fam.eval(fam.deltas()[3], 0.7) == doctest::Approx(t.eval(0.7)).epsilon(1e-12));
  const double mid = std::sqrt(fam.deltas()[3] * fam.deltas()[4]);
  const double direct = iso_kernel_direct(mid, kCut, 0.7);
  CHECK(fam.eval(mid, 0.7) == doctest::Approx(direct).epsilon(0.05));
  CHECK(fam.eval(100.0, 0.7) == fam.eval(8.0, 0.7));  // clamped to the covered range
}

TEST_CASE("table files round-trip and rebuilds are byte-identical") {
  const auto dir = std::filesystem::temp_directory_path() / "crowdscale_ktab_test";
  std::filesystem::create_directories(dir);
  const auto t = build_kernel_table(0.25, 1.5, kCut, 17);
  write_ktab(dir / "a.ktab", to_ktab(t));
  write_ktab(dir / "b.ktab", to_ktab(build_kernel_table(0.25, 1.5, kCut, 17)));
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  CHECK(slurp(dir / "a.ktab") == slurp(dir / "b.ktab"));
  const KernelTable back = kernel_table_from(read_ktab(dir / "a.ktab"));
  CHECK(back.values() == t.values());
  CHECK(back.kappa() == t.kappa());
  write_ktab_manifest(dir / "a.json", to_ktab(t), "a.ktab");
  const KtabData m = read_ktab_manifest(dir / "a.json");
  CHECK(m.kappa == 0.25);
  CHECK(m.delta == 1.5);
  CHECK(m.cut.ell == kCut.ell);
  CHECK(m.cut.big_l == kCut.big_l);
  CHECK(m.cut.radius == kCut.radius);
  CHECK(m.n_mu == 17);
  CHECK(m.n_s == 17);
  std::filesystem::remove_all(dir);
}
