#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crowdscale/kinetic.hpp"
#include "crowdscale/params.hpp"
#include "crowdscale/vec2.hpp"

namespace crowdscale::harness {

enum class Model { ibm_discrete, ibm_continuous, kinetic, fluid_mono, fluid_vmf, hydro };

Model parse_model(const std::string& name);
std::string to_string(Model m);

/// Initial density of one group.
struct DensitySpec {
  std::string kind = "uniform";  ///< uniform | gaussian | box
  double value = 0.0;            ///< uniform level, gaussian peak or box level
  double background = 0.0;       ///< added everywhere for gaussian and box
  Vec2 center;
  double width = 1.0;            ///< gaussian standard deviation or box half-width
};

/// Initial heading law of one group.
struct HeadingSpec {
  std::string kind = "aligned";  ///< aligned | vmf | isotropic
  std::optional<double> angle;   ///< defaults to the target angle
  double beta = 0.0;             ///< vmf concentration
};

struct GroupSpec {
  double target_angle = 0.0;
  double weight = 1.0;
  DensitySpec density;
  HeadingSpec heading;

  double heading_angle() const { return heading.angle.value_or(target_angle); }
};

/// Everything needed to reproduce a run. Parameters map to the model
/// symbols: c, R, ell, L, k, d, kappa, C, dt.
struct Scenario {
  double lx = 20.0;
  double ly = 20.0;
  int nx = 32;
  int ny = 32;
  int n_theta = 64;
  int n_test = 64;
  ModelParams params;
  bool kappa_given = false;  ///< kappa defaults to -1 for the hydro model
  double dt = 0.05;
  double t_end = 10.0;
  double output_every = 1.0;
  std::uint64_t seed = 1;
  std::string interaction = "free";
  std::optional<Model> model;
  std::vector<GroupSpec> groups;

  int n_quad = 128;
  double rho_max = 1e3;
  double hydro_omega = 0.5;
  double hydro_tolerance = 1e-8;
  int hydro_max_iterations = 500;

  /// Parameters with the per-model defaults applied.
  ModelParams resolved_params(Model m) const;
  Grid2D grid() const;
  TargetBins bins() const;
};

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const Scenario& s);
Scenario load_scenario(const std::filesystem::path& path);

/// Every violated invariant, phrased for the user; empty when valid.
std::vector<std::string> validation_problems(const Scenario& s, Model m);
/// Throws ValidationError listing all problems.
void validate(const Scenario& s, Model m);

/// Initial density of a group at a point.
double initial_density(const GroupSpec& g, Vec2 x, double lx, double ly);

}  // namespace crowdscale::harness
