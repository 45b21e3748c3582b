#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "crowdscale/fluid.hpp"
#include "crowdscale/harness/io.hpp"
#include "crowdscale/harness/scenario.hpp"
#include "crowdscale/hydro.hpp"
#include "crowdscale/ibm.hpp"
#include "crowdscale/kinetic.hpp"

namespace crowdscale::harness {

/// Version string written into every manifest.
std::string code_version();

struct RunOptions {
  std::optional<double> until;         ///< overrides the scenario end time
  std::optional<std::uint64_t> seed;   ///< overrides the scenario seed
};

struct RunSummary {
  Model model = Model::kinetic;
  long steps = 0;
  double t_final = 0.0;
  std::vector<double> initial_mass;  ///< per bin (walker count for the IBM)
  std::vector<double> final_mass;
  std::vector<std::string> files;    ///< relative to the output directory
};

/// Runs one model and writes snapshots.csv (grid models) or
/// trajectories.csv (IBM), diagnostics.csv and manifest.json into `out`.
/// Throws ValidationError before any output, and SolverError (with step
/// and time) when a solver fails.
RunSummary run(const Scenario& s, Model m, const std::filesystem::path& out, const RunOptions& opts = {});

/// Kernel families a mode needs, covering interaction radii from the dense
/// limit C / 100 up to the domain diameter.
KernelSet build_kernels(InteractionMode mode, const ModelParams& p, double diameter, bool vmf);

KineticField initial_kinetic(const Scenario& s);
FluidField initial_fluid(const Scenario& s, bool vmf);
HydroState initial_hydro(const Scenario& s);
Crowd initial_crowd(const Scenario& s, std::uint64_t seed);

MomentField moments_of(const KineticField& f, double t);
MomentField moments_of(const FluidField& f, double t);
MomentField moments_of(const HydroState& s, double t);

}  // namespace crowdscale::harness
