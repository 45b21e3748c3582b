// Command-line front end: run, moments, compare, kernel-table, validate.
// Exit codes: 0 success, 2 validation error, 3 solver error, 4 comparison
// threshold exceeded.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>

#include "crowdscale/errors.hpp"
#include "crowdscale/harness/compare.hpp"
#include "crowdscale/harness/io.hpp"
#include "crowdscale/harness/runner.hpp"
#include "crowdscale/harness/scenario.hpp"
#include "crowdscale/kernels.hpp"

namespace fs = std::filesystem;
using namespace crowdscale;
using namespace crowdscale::harness;

namespace {

constexpr int kValidation = 2;
constexpr int kSolver = 3;
constexpr int kThreshold = 4;

Model pick_model(const Scenario& s, const std::string& flag) {
  if (!flag.empty()) return parse_model(flag);
  if (s.model) return *s.model;
  throw ValidationError({"no model given: pass --model or set \"model\" in the scenario"});
}

// A run directory stands for its snapshots.csv.
fs::path snapshot_path(const fs::path& p) { return fs::is_directory(p) ? p / "snapshots.csv" : p; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiscale crowd dynamics: particle, kinetic and fluid models"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads, "OpenMP thread count (0 keeps the runtime default)");

  std::string config, out_dir, model_name;
  std::optional<std::uint64_t> seed;
  std::optional<double> until;
  auto* run_cmd = app.add_subcommand("run", "Run one model on a scenario");
  run_cmd->add_option("--config", config, "Scenario JSON file")->required();
  run_cmd->add_option("--out", out_dir, "Output directory")->required();
  run_cmd->add_option("--model", model_name, "ibm-discrete | ibm-continuous | kinetic | fluid-mono | fluid-vmf | hydro");
  run_cmd->add_option("--seed", seed, "Override the scenario seed");
  run_cmd->add_option("--until", until, "Override the end time");

  auto* val_cmd = app.add_subcommand("validate", "Check a scenario and list every violated rule");
  val_cmd->add_option("--config", config, "Scenario JSON file")->required();
  val_cmd->add_option("--model", model_name, "Model to validate for");

  std::vector<std::string> files;
  double t_min = -1e300, t_max = 1e300;
  bool pool = false;
  std::string out_file;
  auto* mom_cmd = app.add_subcommand("moments", "Histogram IBM trajectories into moment fields");
  mom_cmd->add_option("--config", config, "Scenario giving the grid and target bins")->required();
  mom_cmd->add_option("--files", files, "Trajectory CSV files or run directories")->required();
  mom_cmd->add_option("--out", out_file, "Snapshot CSV to write")->required();
  mom_cmd->add_option("--t-min", t_min, "Window start");
  mom_cmd->add_option("--t-max", t_max, "Window end");
  mom_cmd->add_flag("--pool", pool, "Merge every time stamp in the window into one field");

  std::vector<std::string> runs;
  std::optional<double> tolerance;
  auto* cmp_cmd = app.add_subcommand("compare", "Distances between moment outputs of several runs");
  cmp_cmd->add_option("--runs", runs, "Snapshot CSV files or run directories (first is the reference)")
      ->required()
      ->expected(2, -1);
  cmp_cmd->add_option("--tolerance", tolerance, "Fail (exit 4) when any L1 density distance exceeds this");
  cmp_cmd->add_option("--out", out_file, "Distance table CSV");

  double kappa = -1.0, delta = 1.0;
  int resolution = 256;
  bool iso = false;
  CutoffParams cut;
  auto* ker_cmd = app.add_subcommand("kernel-table", "Build a local interaction kernel table");
  ker_cmd->add_option("--kappa", kappa, "Cosine of the vision half angle");
  ker_cmd->add_option("--delta", delta, "Interaction radius");
  ker_cmd->add_option("--resolution", resolution, "Nodes per axis");
  ker_cmd->add_option("--ell", cut.ell, "Lower DTI cut-off");
  ker_cmd->add_option("--L", cut.big_l, "Free-walk distance");
  ker_cmd->add_option("--R", cut.radius, "Minimal-distance threshold");
  ker_cmd->add_flag("--iso", iso, "Build the full-disk table of |v - w| only");
  ker_cmd->add_option("--out", out_dir, "Directory (default: CROWDSCALE_TABLE_DIR or ./tables)");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (*run_cmd) {
      const Scenario s = load_scenario(config);
      const Model m = pick_model(s, model_name);
      const RunSummary sum = run(s, m, out_dir, {until, seed});
      std::cout << to_string(m) << ": " << sum.steps << " steps to t = " << format_double(sum.t_final) << ", wrote";
      for (const auto& f : sum.files) std::cout << ' ' << f;
      std::cout << '\n';
    } else if (*val_cmd) {
      const Scenario s = load_scenario(config);
      const Model m = pick_model(s, model_name);
      validate(s, m);
      std::cout << "scenario valid for " << to_string(m) << '\n';
    } else if (*mom_cmd) {
      const Scenario s = load_scenario(config);
      BinningSpec spec;
      spec.grid = s.grid();
      for (const auto& g : s.groups) spec.target_angles.push_back(g.target_angle);
      spec.t_min = t_min;
      spec.t_max = t_max;
      spec.pool = pool;
      std::vector<fs::path> paths;
      for (const auto& f : files) paths.push_back(fs::is_directory(f) ? fs::path(f) / "trajectories.csv" : fs::path(f));
      const auto fields = ibm_ensemble_moments(paths, spec);
      std::ofstream out(out_file, std::ios::binary);
      out << kSnapshotHeader << '\n';
      for (const auto& m : fields) write_snapshot(out, m);
      std::cout << "wrote " << fields.size() << " moment field(s) to " << out_file << '\n';
    } else if (*cmp_cmd) {
      std::vector<std::vector<MomentField>> loaded;
      for (const auto& r : runs) loaded.push_back(read_snapshots(snapshot_path(r)));
      const ComparisonReport rep = compare(loaded);
      if (!out_file.empty()) {
        std::ofstream out(out_file, std::ios::binary);
        rep.write_csv(out);
      }
      rep.write_summary(std::cout);
      if (tolerance && rep.max_l1_rho() > *tolerance) {
        std::cout << "L1 density distance " << format_double(rep.max_l1_rho()) << " exceeds tolerance "
                  << format_double(*tolerance) << '\n';
        return kThreshold;
      }
    } else if (*ker_cmd) {
      const fs::path dir = out_dir.empty() ? table_cache_dir() : fs::path(out_dir);
      fs::create_directories(dir);
      const KtabData data = iso ? to_ktab(build_iso_kernel(delta, cut, resolution))
                                : to_ktab(build_kernel_table(kappa, delta, cut, resolution));
      const std::string name = std::string(iso ? "iso" : "sector") + "_kappa" + format_double(data.kappa) + "_delta" +
                               format_double(delta) + "_n" + std::to_string(resolution);
      write_ktab(dir / (name + ".ktab"), data);
      write_ktab_manifest(dir / (name + ".json"), data, name + ".ktab");
      std::cout << "wrote " << (dir / (name + ".ktab")).string() << '\n';
    }
  } catch (const ValidationError& e) {
    std::cerr << "validation failed:\n";
    for (const auto& p : e.problems()) std::cerr << "  - " << p << '\n';
    return kValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kSolver;
  }
  return 0;
}
