#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "crowdscale/errors.hpp"
#include "crowdscale/fluid.hpp"
#include "crowdscale/specialmath.hpp"

using namespace crowdscale;

namespace {

const CutoffParams kCut{0.4, 4.0, 0.4};

std::shared_ptr<const IsoKernelFamily> iso_family() {
  static const auto fam = std::make_shared<IsoKernelFamily>(build_iso_family(kCut, 0.05, 30.0, 16, 129));
  return fam;
}

std::shared_ptr<const SectorKernelFamily> sector_family(double kappa) {
  return std::make_shared<SectorKernelFamily>(build_sector_family(kappa, kCut, 0.2, 30.0, 10, 65));
}

std::shared_ptr<const VmfKernelFamily> vmf_family() {
  static const auto fam = std::make_shared<VmfKernelFamily>(build_vmf_iso_family(*iso_family(), default_beta_grid(), 65));
  return fam;
}

FluidParams params(InteractionMode mode) {
  FluidParams p;
  p.mode = mode;
  p.kernels.iso = iso_family();
  p.kernels.vmf_iso = vmf_family();
  return p;
}

FluidField uniform(int n, double l, std::vector<double> targets, std::vector<double> rho, std::vector<Vec2> u) {
  FluidField f(Grid2D(n, n, l, l), TargetBins(std::move(targets)));
  for (int b = 0; b < f.n_bins(); ++b) {
    for (int c = 0; c < f.n_cells(); ++c) {
      f.rho(b, c) = rho[b];
      f.velocity(b, c) = u[b];
    }
  }
  return f;
}

double mass_drift(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]) / a[i]);
  return m;
}

int peak_cell_x(const FluidField& f) {
  const auto r = f.rho_bin(0);
  return static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin()) % f.grid().nx;
}

}  // namespace

TEST_CASE("upwind continuity is conservative") {
  const Grid2D g(8, 8, 4.0, 4.0);
  std::vector<double> rho(g.cells());
  std::vector<Vec2> u(g.cells());
  for (int c = 0; c < g.cells(); ++c) {
    rho[c] = 1.0 + 0.5 * std::sin(c * 0.7);
    u[c] = unit_from_angle(c * 1.3);
  }
  double m0 = 0.0;
  for (double r : rho) m0 += r;
  upwind_continuity(g, rho, u, 1.0, 0.2);
  double m1 = 0.0;
  for (double r : rho) m1 += r;
  CHECK(m1 == doctest::Approx(m0).epsilon(1e-14));
  CHECK(*std::min_element(rho.begin(), rho.end()) >= 0.0);
}

TEST_CASE("monokinetic force: equilibrium and restoring torque") {
  FluidParams p = params(InteractionMode::local_iso);
  const FluidField eq = uniform(2, 4.0, {0.3}, {2.0}, {unit_from_angle(0.3)});
  for (const Vec2& fv : mono_force(eq, p)) CHECK(norm(fv) < 1e-12);

  FluidParams free = params(InteractionMode::free);
  const double phi = 0.2;
  const FluidField off = uniform(2, 4.0, {0.0}, {2.0}, {unit_from_angle(phi)});
  const double kl2 = free.model.k * kCut.big_l * kCut.big_l;
  for (const Vec2& fv : mono_force(off, free)) {
    CHECK(norm(fv) == doctest::Approx(kl2 * std::sin(phi)).epsilon(1e-3));
    CHECK(cross(unit_from_angle(phi), fv) < 0.0);  // turns back toward a
    CHECK(std::abs(dot(fv, unit_from_angle(phi))) < 1e-14);
  }
}

TEST_CASE("opposing streams steer along the brute-force argmin") {
  FluidParams p = params(InteractionMode::local);
  p.model.kappa = 0.0;
  p.kernels.sector = sector_family(0.0);
  const FluidField f = uniform(2, 4.0, {0.0, std::numbers::pi}, {3.0, 3.0},
                               {unit_from_angle(0.05), unit_from_angle(std::numbers::pi - 0.3)});
  const auto force = mono_force(f, p);
  for (int b = 0; b < 2; ++b) {
    const Vec2 u = f.velocity(b, 0);
    const double th = angle_of(u);
    double best = 1e300, best_angle = th;
    for (int m = -200; m <= 200; ++m) {
      const double ang = th + 0.5 * m / 200.0;
      const Vec2 w = unit_from_angle(ang);
      const double d = mono_dti(f, 0, b, w, p);
      const double phi = 0.5 * p.model.k * norm2(d * w - kCut.big_l * f.bins().dir(b));
      if (phi < best) {
        best = phi;
        best_angle = ang;
      }
    }
    const double turn = dot(force[f.index(b, 0)], perp(u));
    CHECK(norm(force[f.index(b, 0)]) > 1e-6);
    CHECK((turn > 0.0) == (best_angle > th));
  }
}

TEST_CASE("monokinetic step: stationary state, unit speed and conservation") {
  FluidParams p = params(InteractionMode::local_iso);
  FluidField eq = uniform(4, 4.0, {0.0}, {1.0}, {{1.0, 0.0}});
  const auto before = eq.rho_data();
  for (int n = 0; n < 10; ++n) step_mono(eq, p, 0.5);
  for (std::size_t k = 0; k < before.size(); ++k) CHECK(eq.rho_data()[k] == doctest::Approx(before[k]).epsilon(1e-14));

  FluidField f(Grid2D(16, 16, 16.0, 16.0), TargetBins({0.0, 2.0}));
  for (int b = 0; b < 2; ++b) {
    for (int c = 0; c < f.n_cells(); ++c) {
      const Vec2 x = f.grid().center(c);
      f.rho(b, c) = 0.5 + 0.4 * std::sin(0.4 * x.x + b) * std::cos(0.4 * x.y);
      f.velocity(b, c) = unit_from_angle(0.3 * x.y + 2.0 * b);
    }
  }
  const auto m0 = f.mass_per_bin();
  for (int n = 0; n < 1000; ++n) {
    step_mono(f, p, 0.4);
    for (const Vec2& v : f.velocity_data()) CHECK(std::abs(norm(v) - 1.0) < 1e-8);
  }
  CHECK(mass_drift(m0, f.mass_per_bin()) < 1e-10);
}

TEST_CASE("a density bump advects at speed c") {
  FluidParams p = params(InteractionMode::free);
  p.model.k = 0.0;
  FluidField f(Grid2D(200, 1, 200.0, 1.0), TargetBins({0.0}));
  for (int c = 0; c < 200; ++c) {
    const double x = f.grid().center(c).x;
    f.rho(0, c) = 0.01 + std::exp(-0.5 * std::pow((x - 50.0) / 4.0, 2));
    f.velocity(0, c) = {1.0, 0.0};
  }
  const int start = peak_cell_x(f);
  for (int n = 0; n < 200; ++n) step_mono(f, p, 0.5);
  CHECK(std::abs(peak_cell_x(f) - (start + 100)) <= 1);
}

TEST_CASE("converging flow is reported as a caustic") {
  FluidParams p = params(InteractionMode::free);
  p.model.k = 0.0;
  p.rho_max = 10.0;
  FluidField f(Grid2D(32, 1, 32.0, 1.0), TargetBins({0.0}));
  for (int c = 0; c < 32; ++c) {
    f.rho(0, c) = 1.0;
    f.velocity(0, c) = c < 16 ? Vec2{1.0, 0.0} : Vec2{-1.0, 0.0};
  }
  bool fired = false;
  try {
    for (int n = 0; n < 200; ++n) step_mono(f, p, 0.5);
  } catch (const CausticError&) {
    fired = true;
  }
  CHECK(fired);
  for (double r : f.rho_data()) CHECK(std::isfinite(r));
}

TEST_CASE("VMF flux tensor") {
  for (double u : {0.1, 0.5, 0.9, 0.999}) {
    const Vec2 U = u * unit_from_angle(0.7);
    const SymTensor2 s = vmf_flux_tensor(2.0, U);
    CHECK(s.trace() == doctest::Approx(2.0).epsilon(1e-14));
    const Vec2 su = s.apply(U);
    CHECK(std::abs(cross(su, U)) < 1e-14);
    const Vec2 sp = s.apply(perp(U));
    CHECK(std::abs(cross(sp, perp(U))) < 1e-14);
    const SymTensor2 fast = vmf_flux_tensor_fast(2.0, U);
    CHECK(fast.xx == doctest::Approx(s.xx).epsilon(1e-7));
    CHECK(fast.xy == doctest::Approx(s.xy).epsilon(1e-7));
  }
  const Vec2 U = 0.999 * unit_from_angle(0.7);
  const SymTensor2 s = vmf_flux_tensor(1.0, U);
  CHECK(s.xx == doctest::Approx(U.x * U.x).epsilon(0.01));
  CHECK(s.xy == doctest::Approx(U.x * U.y).epsilon(0.01));
  CHECK(s.yy == doctest::Approx(U.y * U.y).epsilon(0.01));
  CHECK_THROWS_AS(vmf_flux_tensor(1.0, {1.0, 0.0}), std::domain_error);
}

TEST_CASE("VMF force: by-parts and direct forms agree") {
  const double u = order_parameter(2.5);
  for (auto mode : {InteractionMode::free, InteractionMode::local_iso}) {
    FluidParams p = params(mode);
    const FluidField f = uniform(2, 4.0, {0.0, 2.5}, {1.5, 2.0}, {u * unit_from_angle(0.0), u * unit_from_angle(2.2)});
    const auto a = vmf_force(f, p);
    const auto b = vmf_force_direct(f, p);
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(std::abs(a[k].x - b[k].x) < 1e-8);
      CHECK(std::abs(a[k].y - b[k].y) < 1e-8);
    }
  }
}

TEST_CASE("concentrated VMF force approaches the monokinetic force") {
  const double u = order_parameter(200.0);
  for (auto mode : {InteractionMode::free, InteractionMode::local_iso}) {
    FluidParams p = params(mode);
    const FluidField vmf = uniform(2, 4.0, {0.0, 2.5}, {1.5, 2.0}, {u * unit_from_angle(0.3), u * unit_from_angle(2.2)});
    const FluidField mono = uniform(2, 4.0, {0.0, 2.5}, {1.5, 2.0}, {unit_from_angle(0.3), unit_from_angle(2.2)});
    const auto a = vmf_force(vmf, p);
    const auto b = mono_force(mono, p);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(norm(a[k] - b[k]) < 1e-2);
  }
}

TEST_CASE("VMF force is antisymmetric under reflection across the corridor axis") {
  for (auto mode : {InteractionMode::local_iso, InteractionMode::local}) {
    FluidParams p = params(mode);
    p.model.kappa = 0.0;
    p.kernels.sector = sector_family(0.0);
    const double u = 0.7;
    const FluidField f = uniform(2, 4.0, {0.0, std::numbers::pi}, {2.0, 2.0},
                                 {u * unit_from_angle(0.25), u * unit_from_angle(std::numbers::pi + 0.1)});
    const FluidField m = uniform(2, 4.0, {0.0, -std::numbers::pi}, {2.0, 2.0},
                                 {u * unit_from_angle(-0.25), u * unit_from_angle(-std::numbers::pi - 0.1)});
    const auto a = vmf_force(f, p);
    const auto b = vmf_force(m, p);
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(b[k].x == doctest::Approx(a[k].x).epsilon(1e-6).scale(1e-9));
      CHECK(b[k].y == doctest::Approx(-a[k].y).epsilon(1e-6).scale(1e-9));
    }
  }
}

TEST_CASE("VMF step: free-walking equilibrium, damping and conservation") {
  FluidParams p = params(InteractionMode::free);
  const double ueq = order_parameter(p.model.free_beta());
  FluidField eq = uniform(4, 4.0, {0.4}, {1.0}, {ueq * unit_from_angle(0.4)});
  step_vmf(eq, p, 0.05);
  for (const Vec2& v : eq.velocity_data()) CHECK(norm(v - ueq * unit_from_angle(0.4)) < 0.05 * 0.05);

  FluidParams nf = params(InteractionMode::free);
  nf.model.k = 0.0;
  nf.model.d = 0.5;
  FluidField damp = uniform(2, 4.0, {0.0}, {1.0}, {{0.8, 0.0}});
  const double dt = 0.02;
  for (int n = 0; n < 100; ++n) step_vmf(damp, nf, dt);
  const double rate = -std::log(damp.velocity(0, 0).x / 0.8) / (100 * dt);
  CHECK(rate == doctest::Approx(0.5).epsilon(0.05));

  FluidParams q = params(InteractionMode::local_iso);
  FluidField f(Grid2D(16, 16, 16.0, 16.0), TargetBins({0.0, 2.0}));
  for (int b = 0; b < 2; ++b) {
    for (int c = 0; c < f.n_cells(); ++c) {
      const Vec2 x = f.grid().center(c);
      f.rho(b, c) = 0.5 + 0.4 * std::sin(0.4 * x.x + b) * std::cos(0.4 * x.y);
      f.velocity(b, c) = 0.6 * unit_from_angle(0.3 * x.y + 2.0 * b);
    }
  }
  const auto m0 = f.mass_per_bin();
  for (int n = 0; n < 1000; ++n) step_vmf(f, q, 0.4);
  CHECK(mass_drift(m0, f.mass_per_bin()) < 1e-10);
  for (const Vec2& v : f.velocity_data()) CHECK(norm(v) < 1.0);
}

TEST_CASE("VMF tracks the monokinetic closure as noise vanishes") {
  auto run = [](double d) {
    FluidParams p = params(InteractionMode::local_iso);
    p.model.d = d;
    // Keep the restoring rate k L^2 fixed; only the noise changes.
    const double beta0 = 200.0;
    FluidField mono(Grid2D(32, 32, 16.0, 16.0), TargetBins({0.0, std::numbers::pi}));
    FluidField vmf = mono;
    for (int b = 0; b < 2; ++b) {
      for (int c = 0; c < mono.n_cells(); ++c) {
        const Vec2 x = mono.grid().center(c);
        const double cx = b == 0 ? 5.0 : 11.0;
        const double r = 0.05 + 2.0 * std::exp(-0.5 * (std::pow(x.x - cx, 2) + std::pow(x.y - 8.0, 2)) / 4.0);
        const Vec2 dir = unit_from_angle(b == 0 ? 0.0 : std::numbers::pi);
        mono.rho(b, c) = vmf.rho(b, c) = r;
        mono.velocity(b, c) = dir;
        vmf.velocity(b, c) = order_parameter(beta0) * dir;
      }
    }
    for (int n = 0; n < 40; ++n) {
      step_mono(mono, p, 0.1);
      step_vmf(vmf, p, 0.1);
    }
    double l1 = 0.0;
    for (std::size_t k = 0; k < mono.rho_data().size(); ++k) l1 += std::abs(mono.rho_data()[k] - vmf.rho_data()[k]);
    return l1 * mono.grid().cell_area();
  };
  CHECK(run(1e-4) < run(1e-1));
}
