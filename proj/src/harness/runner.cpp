#include "crowdscale/harness/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

#include "crowdscale/errors.hpp"
#include "crowdscale/rng.hpp"
#include "crowdscale/specialmath.hpp"

#ifndef CROWDSCALE_VERSION
#define CROWDSCALE_VERSION "unknown"
#endif

namespace crowdscale::harness {

std::string code_version() { return CROWDSCALE_VERSION; }

KernelSet build_kernels(InteractionMode mode, const ModelParams& p, double diameter, bool vmf) {
  KernelSet k;
  if (mode != InteractionMode::local && mode != InteractionMode::local_iso) return k;
  const double dmin = p.big_c / 100.0;
  const double dmax = std::max(diameter, 2.0 * dmin);
  if (mode == InteractionMode::local) {
    k.sector = std::make_shared<SectorKernelFamily>(build_sector_family(p.kappa, p.cut, dmin, dmax));
  } else {
    k.iso = std::make_shared<IsoKernelFamily>(build_iso_family(p.cut, dmin, dmax));
    if (vmf) k.vmf_iso = std::make_shared<VmfKernelFamily>(build_vmf_iso_family(*k.iso, default_beta_grid()));
  }
  return k;
}

namespace {

double group_density(const Scenario& s, int b, Vec2 x) { return initial_density(s.groups[b], x, s.lx, s.ly); }

}  // namespace

KineticField initial_kinetic(const Scenario& s) {
  KineticField f(s.grid(), AngleGrid(s.n_theta), s.bins());
  const AngleGrid& ag = f.angles();
  for (int b = 0; b < f.n_bins(); ++b) {
    const GroupSpec& g = s.groups[b];
    std::vector<double> shape(ag.size(), 0.0);
    if (g.heading.kind == "isotropic") {
      std::fill(shape.begin(), shape.end(), 1.0);
    } else if (g.heading.kind == "vmf") {
      shape = vmf_samples(ag, {g.heading.beta, unit_from_angle(g.heading_angle())});
    } else {
      const double a = g.heading_angle() - kTwoPi * std::floor(g.heading_angle() / kTwoPi);
      shape[ag.wrap(static_cast<int>(std::lround(a / ag.step())))] = 1.0;
    }
    // Normalized so the discrete theta integral is exactly one.
    const double z = ag.integrate(shape);
    for (double& v : shape) v /= z;
    for (int c = 0; c < f.n_cells(); ++c) {
      const double rho = group_density(s, b, f.grid().center(c));
      auto fib = f.fiber(b, c);
      for (int i = 0; i < ag.size(); ++i) fib[i] = rho * shape[i];
    }
  }
  return f;
}

FluidField initial_fluid(const Scenario& s, bool vmf) {
  FluidField f(s.grid(), s.bins());
  for (int b = 0; b < f.n_bins(); ++b) {
    const GroupSpec& g = s.groups[b];
    const Vec2 dir = unit_from_angle(g.heading_angle());
    double speed = 1.0;
    if (vmf) {
      if (g.heading.kind == "isotropic") speed = 0.0;
      else if (g.heading.kind == "vmf") speed = order_parameter(g.heading.beta);
      else speed = 1.0 - 1e-9;
    }
    for (int c = 0; c < f.n_cells(); ++c) {
      f.rho(b, c) = group_density(s, b, f.grid().center(c));
      f.velocity(b, c) = speed * dir;
    }
  }
  return f;
}

HydroState initial_hydro(const Scenario& s) {
  HydroState h(s.grid(), s.bins());
  for (int b = 0; b < h.n_bins(); ++b) {
    for (int c = 0; c < h.n_cells(); ++c) h.rho[h.index(b, c)] = group_density(s, b, h.grid.center(c));
  }
  return h;
}

Crowd initial_crowd(const Scenario& s, std::uint64_t seed) {
  const CounterRng rng(seed);
  const Grid2D grid = s.grid();
  Crowd crowd;
  for (int b = 0; b < static_cast<int>(s.groups.size()); ++b) {
    const GroupSpec& g = s.groups[b];
    double mass = 0.0;
    for (int c = 0; c < grid.cells(); ++c) mass += group_density(s, b, grid.center(c));
    const long count = std::lround(mass * grid.cell_area());
    const double bound = g.density.value + g.density.background;
    const std::uint64_t stream = 2 * static_cast<std::uint64_t>(b);
    std::uint64_t counter = 0;
    for (long n = 0; n < count; ++n) {
      PedestrianState p;
      p.a = unit_from_angle(g.target_angle);
      // Rejection sampling of the position against the density bound.
      for (;;) {
        const Vec2 x{s.lx * rng.uniform(stream, counter, 0), s.ly * rng.uniform(stream, counter, 1)};
        const double accept = rng.uniform(stream, counter, 2);
        ++counter;
        if (bound <= 0.0 || accept * bound <= group_density(s, b, x)) {
          p.x = x;
          break;
        }
      }
      if (g.heading.kind == "isotropic") {
        p.theta = wrap_angle(kTwoPi * rng.uniform(stream + 1, counter++));
      } else if (g.heading.kind == "vmf") {
        for (;;) {
          const double th = kTwoPi * rng.uniform(stream + 1, counter, 0);
          const double accept = rng.uniform(stream + 1, counter, 1);
          ++counter;
          if (accept <= std::exp(g.heading.beta * (std::cos(th - g.heading_angle()) - 1.0))) {
            p.theta = wrap_angle(th);
            break;
          }
        }
      } else {
        p.theta = wrap_angle(g.heading_angle());
      }
      crowd.push_back(p);
    }
  }
  return crowd;
}

MomentField moments_of(const KineticField& f, double t) {
  const Moments m = moments(f);
  MomentField out(t, f.grid(), f.n_bins());
  out.rho = m.rho;
  out.velocity = m.velocity;
  out.mask = m.empty;
  return out;
}

MomentField moments_of(const FluidField& f, double t) {
  MomentField out(t, f.grid(), f.n_bins());
  out.rho = f.rho_data();
  out.velocity = f.velocity_data();
  return out;
}

MomentField moments_of(const HydroState& s, double t) {
  MomentField out(t, s.grid, s.n_bins());
  out.rho = s.rho;
  out.velocity = s.velocity;
  return out;
}

namespace {

std::string join_masses(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) s += ';';
    s += format_double(v[i]);
  }
  return s;
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

template <class StepFn>
void stepping(long steps, double dt, StepFn&& step) {
  for (long n = 1; n <= steps; ++n) {
    try {
      step(n);
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "step " << n << " (t = " << format_double(n * dt) << "): " << e.what();
      throw SolverError(msg.str());
    }
  }
}

}  // namespace

RunSummary run(const Scenario& s_in, Model m, const std::filesystem::path& out, const RunOptions& opts) {
  validate(s_in, m);
  Scenario s = s_in;
  s.params = s_in.resolved_params(m);
  s.kappa_given = true;
  s.model = m;
  if (opts.seed) s.seed = *opts.seed;
  if (opts.until) s.t_end = *opts.until;
  validate(s, m);

  std::filesystem::create_directories(out);
  const double dt = s.dt;
  const long steps = std::lround(s.t_end / dt);
  const long stride = std::max(1L, std::lround(s.output_every / dt));
  const InteractionMode mode = parse_interaction_mode(s.interaction);
  const Grid2D grid = s.grid();

  RunSummary sum;
  sum.model = m;
  sum.steps = steps;
  sum.t_final = steps * dt;

  auto diag = open_out(out / "diagnostics.csv");
  if (m == Model::ibm_discrete || m == Model::ibm_continuous) {
    IbmParams ip;
    ip.c = s.params.c;
    ip.dt = dt;
    ip.kappa = s.params.kappa;
    ip.cut = s.params.cut;
    ip.k = s.params.k;
    ip.d = s.params.d;
    ip.big_c = s.params.big_c;
    ip.n_test = s.n_test;
    ip.box = PeriodicBox{s.lx, s.ly};
    Crowd crowd = initial_crowd(s, s.seed);
    auto traj = open_out(out / "trajectories.csv");
    traj << "t,id,x,y,theta,a_angle\n";
    diag << "t,walkers\n";
    auto emit = [&](long n) {
      const std::string ts = format_double(n * dt);
      for (std::size_t i = 0; i < crowd.size(); ++i) {
        const PedestrianState& p = crowd[i];
        traj << ts << ',' << i << ',' << format_double(p.x.x) << ',' << format_double(p.x.y) << ','
             << format_double(p.theta) << ',' << format_double(angle_of(p.a)) << '\n';
      }
      diag << ts << ',' << crowd.size() << '\n';
    };
    emit(0);
    stepping(steps, dt, [&](long n) {
      crowd = m == Model::ibm_discrete ? step_discrete(crowd, ip)
                                       : step_continuous(crowd, ip, s.seed, static_cast<std::uint64_t>(n));
      if (n % stride == 0) emit(n);
    });
    std::vector<double> counts(s.groups.size(), 0.0);
    for (const auto& p : crowd) {
      for (std::size_t b = 0; b < s.groups.size(); ++b) {
        if (std::abs(wrap_angle(angle_of(p.a) - s.groups[b].target_angle)) < 1e-12) {
          counts[b] += 1.0;
          break;
        }
      }
    }
    sum.initial_mass = counts;
    sum.final_mass = counts;
    sum.files = {"trajectories.csv", "diagnostics.csv", "manifest.json"};
  } else {
    auto snap = open_out(out / "snapshots.csv");
    snap << kSnapshotHeader << '\n';
    if (m == Model::kinetic) {
      KineticParams kp{s.params, mode, 2.0 * std::numbers::pi / 256.0, build_kernels(mode, s.params, grid.diameter(), false)};
      KineticField f = initial_kinetic(s);
      KineticDiagnostics kd;
      diag << "t,mass_per_bin,max_rho,clamp_count\n";
      auto emit = [&](long n) {
        const MomentField mf = moments_of(f, n * dt);
        write_snapshot(snap, mf);
        diag << format_double(n * dt) << ',' << join_masses(f.mass_per_bin()) << ',' << format_double(max_of(mf.rho))
             << ',' << kd.radius_clamped << '\n';
      };
      sum.initial_mass = f.mass_per_bin();
      emit(0);
      stepping(steps, dt, [&](long n) {
        step_kinetic(f, kp, dt, &kd);
        if (n % stride == 0) emit(n);
      });
      sum.final_mass = f.mass_per_bin();
    } else if (m == Model::fluid_mono || m == Model::fluid_vmf) {
      const bool vmf = m == Model::fluid_vmf;
      FluidParams fp;
      fp.model = s.params;
      fp.mode = mode;
      fp.n_quad = s.n_quad;
      fp.rho_max = s.rho_max;
      fp.kernels = build_kernels(mode, s.params, grid.diameter(), vmf);
      FluidField f = initial_fluid(s, vmf);
      FluidDiagnostics fd;
      diag << "t,mass_per_bin,max_rho,clamp_count\n";
      auto emit = [&](long n) {
        write_snapshot(snap, moments_of(f, n * dt));
        diag << format_double(n * dt) << ',' << join_masses(f.mass_per_bin()) << ','
             << format_double(max_of(f.rho_data())) << ',' << fd.clamp_count << '\n';
      };
      sum.initial_mass = f.mass_per_bin();
      emit(0);
      stepping(steps, dt, [&](long n) {
        if (vmf) step_vmf(f, fp, dt, &fd);
        else step_mono(f, fp, dt, &fd);
        if (n % stride == 0) emit(n);
      });
      sum.final_mass = f.mass_per_bin();
    } else {
      HydroParams hp;
      hp.model = s.params;
      hp.n_theta = s.n_theta;
      hp.omega = s.hydro_omega;
      hp.tolerance = s.hydro_tolerance;
      hp.max_iterations = s.hydro_max_iterations;
      hp.diameter = grid.diameter();
      hp.kernel = build_kernels(InteractionMode::local_iso, s.params, grid.diameter(), false).iso;
      HydroState h = initial_hydro(s);
      diag << "t,mass_per_bin,max_rho,clamp_count,fp_iters,fp_residual\n";
      auto emit = [&](long n) {
        update_velocities(h, hp);
        write_snapshot(snap, moments_of(h, n * dt));
        int iters = 0;
        double res = 0.0;
        for (const auto& p : h.profiles) {
          iters = std::max(iters, p.iterations);
          res = std::max(res, p.residual);
        }
        diag << format_double(n * dt) << ',' << join_masses(h.mass_per_bin()) << ',' << format_double(max_of(h.rho))
             << ",0," << iters << ',' << format_double(res) << '\n';
      };
      sum.initial_mass = h.mass_per_bin();
      try {
        emit(0);
      } catch (const std::exception& e) {
        throw SolverError(std::string("initial state: ") + e.what());
      }
      stepping(steps, dt, [&](long n) {
        step_hydro(h, hp, dt);
        if (n % stride == 0) emit(n);
      });
      sum.final_mass = h.mass_per_bin();
    }
    sum.files = {"snapshots.csv", "diagnostics.csv", "manifest.json"};
  }

  nlohmann::ordered_json man;
  man["code_version"] = code_version();
  man["model"] = to_string(m);
  man["seed"] = s.seed;
  man["steps"] = steps;
  man["t_final"] = sum.t_final;
  man["outputs"] = sum.files;
  man["scenario"] = to_json(s);
  auto mf = open_out(out / "manifest.json");
  mf << man.dump(2) << '\n';
  return sum;
}

}  // namespace crowdscale::harness
