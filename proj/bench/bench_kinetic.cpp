// Serial reference kernels against the OpenMP paths on the same inputs.
// Argument: cells per side. The heading grid is fixed at 32 so the dense
// reference angular solve stays affordable.

#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "crowdscale/kinetic.hpp"
#include "crowdscale/reference.hpp"

namespace {

using namespace crowdscale;

constexpr int kTheta = 32;

KineticParams local_params() {
  static const auto family =
      std::make_shared<SectorKernelFamily>(build_sector_family(0.0, CutoffParams{}, 0.3, 30.0, 16, 65));
  KineticParams p;
  p.model.kappa = 0.0;
  p.mode = InteractionMode::local;
  p.kernels.sector = family;
  return p;
}

KineticField counter_flow(int n) {
  const double side = 8.0;
  KineticField f(Grid2D(n, n, side, side), AngleGrid(kTheta), TargetBins({0.0, std::numbers::pi}));
  for (int c = 0; c < f.n_cells(); ++c) {
    const double r = 3.0 * (1.0 + 0.3 * std::sin(2.0 * std::numbers::pi * f.grid().center(c).x / side));
    for (int i = 0; i < kTheta; ++i) {
      const double th = f.angles().angle(i);
      f.at(0, c, i) = r * std::exp(2.0 * std::cos(th));
      f.at(1, c, i) = r * std::exp(-2.0 * std::cos(th));
    }
  }
  return f;
}

template <void (*Transport)(KineticField&, double, double)>
void bm_transport(benchmark::State& state) {
  KineticField f = counter_flow(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    Transport(f, 1.0, 0.05);
    benchmark::DoNotOptimize(f.data().data());
  }
}

template <ForceField (*Force)(const KineticField&, const KineticParams&)>
void bm_force(benchmark::State& state) {
  const KineticField f = counter_flow(static_cast<int>(state.range(0)));
  const KineticParams p = local_params();
  for (auto _ : state) benchmark::DoNotOptimize(Force(f, p));
}

template <void (*Angular)(KineticField&, const ForceField&, double, double)>
void bm_angular(benchmark::State& state) {
  KineticField f = counter_flow(static_cast<int>(state.range(0)));
  const ForceField force = crowdscale::force_field(f, local_params());
  for (auto _ : state) {
    Angular(f, force, 0.1, 0.05);
    benchmark::DoNotOptimize(f.data().data());
  }
}

template <void (*Step)(KineticField&, const KineticParams&, double)>
void bm_step(benchmark::State& state) {
  KineticField f = counter_flow(static_cast<int>(state.range(0)));
  const KineticParams p = local_params();
  for (auto _ : state) {
    Step(f, p, 0.05);
    benchmark::DoNotOptimize(f.data().data());
  }
}

// The production step takes optional diagnostics; pin the plain signature.
void production_step(KineticField& f, const KineticParams& p, double dt) { crowdscale::step_kinetic(f, p, dt); }

}  // namespace

BENCHMARK(bm_transport<crowdscale::reference::transport_x>)->Name("transport_x/reference")->Arg(16)->Arg(32);
BENCHMARK(bm_transport<crowdscale::transport_x>)->Name("transport_x/openmp")->Arg(16)->Arg(32);
BENCHMARK(bm_transport<crowdscale::reference::transport_y>)->Name("transport_y/reference")->Arg(16)->Arg(32);
BENCHMARK(bm_transport<crowdscale::transport_y>)->Name("transport_y/openmp")->Arg(16)->Arg(32);
BENCHMARK(bm_force<crowdscale::reference::force_field>)->Name("force_field/reference")->Arg(8)->Arg(16);
BENCHMARK(bm_force<crowdscale::force_field>)->Name("force_field/openmp")->Arg(8)->Arg(16);
BENCHMARK(bm_angular<crowdscale::reference::angular_step>)->Name("angular_step/reference")->Arg(8)->Arg(16);
BENCHMARK(bm_angular<crowdscale::angular_step>)->Name("angular_step/openmp")->Arg(8)->Arg(16);
BENCHMARK(bm_step<crowdscale::reference::step_kinetic>)->Name("step_kinetic/reference")->Arg(8)->Arg(16);
BENCHMARK(bm_step<production_step>)->Name("step_kinetic/openmp")->Arg(8)->Arg(16);

BENCHMARK_MAIN();
