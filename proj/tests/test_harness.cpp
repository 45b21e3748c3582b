#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "crowdscale/errors.hpp"
#include "crowdscale/harness/compare.hpp"
#include "crowdscale/harness/runner.hpp"
#include "crowdscale/harness/scenario.hpp"

using namespace crowdscale;
using namespace crowdscale::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "crowdscale_test_harness" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

nlohmann::json base_config() {
  return nlohmann::json::parse(R"({
    "domain": {"lx": 20, "ly": 20},
    "grid": {"nx": 8, "ny": 8, "n_theta": 32, "n_test": 16},
    "params": {"c": 1, "R": 0.4, "ell": 0.4, "L": 4, "k": 0.0625, "d": 0.1, "C": 5, "dt": 0.1},
    "time": {"t_end": 2, "output_every": 1},
    "seed": 11,
    "interaction": "free",
    "groups": []
  })");
}

int cli(const std::string& args) {
  const std::string cmd = std::string(CROWDSCALE_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

double momentum_angle(const MomentField& m) {
  Vec2 mom;
  for (std::size_t k = 0; k < m.rho.size(); ++k) mom += m.rho[k] * m.velocity[k];
  return angle_of(mom);
}

}  // namespace

TEST_CASE("scenario parsing lists every problem") {
  nlohmann::json j = base_config();
  j["grid"]["bogus"] = 1;
  j["colour"] = "red";
  j["params"]["c"] = "fast";
  try {
    scenario_from_json(j);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("bogus") != std::string::npos);
    CHECK(msg.find("colour") != std::string::npos);
    CHECK(msg.find("params") != std::string::npos);
  }

  nlohmann::json bad = base_config();
  bad["grid"]["nx"] = 0;
  bad["params"]["dt"] = -1.0;
  bad["params"]["ell"] = 10.0;
  const Scenario s = scenario_from_json(bad);
  CHECK(validation_problems(s, Model::kinetic).size() >= 3);
  CHECK_THROWS_AS(validate(s, Model::kinetic), ValidationError);
  CHECK_THROWS_AS(parse_model("lattice-gas"), ValidationError);
}

TEST_CASE("scenario JSON round trip") {
  nlohmann::json j = base_config();
  j["groups"] = nlohmann::json::parse(R"([{"target_angle": 1.0,
      "density": {"kind": "box", "value": 0.3, "background": 0.01, "center": [5, 6], "width": 2},
      "heading": {"kind": "vmf", "beta": 3}}])");
  const Scenario s = scenario_from_json(j);
  const auto once = to_json(s);
  const auto twice = to_json(scenario_from_json(nlohmann::json::parse(once.dump())));
  CHECK(once == twice);
  CHECK(s.groups[0].heading_angle() == 1.0);
}

TEST_CASE("empty scenarios succeed with empty outputs") {
  const Scenario s = scenario_from_json(base_config());
  for (Model m : {Model::kinetic, Model::fluid_mono, Model::fluid_vmf, Model::hydro, Model::ibm_continuous}) {
    const fs::path dir = scratch("empty_" + to_string(m));
    const RunSummary r = run(s, m, dir);
    CHECK(r.final_mass.empty());
    if (m == Model::ibm_continuous) {
      CHECK(read_csv(dir / "trajectories.csv").rows.empty());
    } else {
      CHECK(read_snapshots(dir / "snapshots.csv").empty());
    }
    CHECK(fs::exists(dir / "manifest.json"));
  }
}

TEST_CASE("a lone group turns toward its target in every model") {
  nlohmann::json j = base_config();
  j["time"] = {{"t_end", 80}, {"output_every", 80}};
  j["params"]["dt"] = 0.2;
  j["groups"] = nlohmann::json::parse(R"([{"target_angle": 0.7,
      "density": {"kind": "uniform", "value": 0.5},
      "heading": {"kind": "aligned", "angle": 2.2}}])");
  const Scenario s = scenario_from_json(j);
  const double tol = 5.0 * std::numbers::pi / 180.0;
  for (Model m : {Model::kinetic, Model::fluid_mono, Model::fluid_vmf, Model::hydro}) {
    CAPTURE(to_string(m));
    const fs::path dir = scratch("drift_" + to_string(m));
    run(s, m, dir);
    const auto snaps = read_snapshots(dir / "snapshots.csv");
    REQUIRE(snaps.size() == 2);
    CHECK(std::abs(wrap_angle(momentum_angle(snaps.back()) - 0.7)) < tol);
  }
  const fs::path dir = scratch("drift_ibm");
  run(s, Model::ibm_continuous, dir);
  BinningSpec spec{s.grid(), {0.7}, 80.0, 80.0, false};
  const auto mom = ibm_ensemble_moments({dir / "trajectories.csv"}, spec);
  REQUIRE(mom.size() == 1);
  CHECK(std::abs(wrap_angle(momentum_angle(mom[0]) - 0.7)) < tol);
}

TEST_CASE("runs replay byte for byte") {
  nlohmann::json j = base_config();
  j["interaction"] = "local";
  j["params"]["kappa"] = 0.0;
  j["groups"] = nlohmann::json::parse(R"([
      {"target_angle": 0.0, "density": {"kind": "gaussian", "value": 2, "background": 0.1, "center": [8, 10], "width": 3}},
      {"target_angle": 3.14159, "density": {"kind": "gaussian", "value": 2, "background": 0.1, "center": [12, 10], "width": 3}}])");
  const Scenario s = scenario_from_json(j);
  for (Model m : {Model::kinetic, Model::fluid_vmf, Model::ibm_continuous}) {
    CAPTURE(to_string(m));
    const fs::path a = scratch("replay_a"), b = scratch("replay_b");
    const RunSummary ra = run(s, m, a);
    run(s, m, b);
    for (const auto& f : ra.files) CHECK(slurp(a / f) == slurp(b / f));
  }
}

TEST_CASE("ensemble moments of trajectory files") {
  const fs::path dir = scratch("moments");
  {
    std::ofstream f(dir / "one.csv");
    f << "t,id,x,y,theta,a_angle\n0,0,1.5,2.5,0.5,0\n1,0,2.5,2.5,0.5,0\n";
    std::ofstream g(dir / "two.csv");
    g << "t,id,x,y,theta,a_angle\n0,0,1.2,2.7,1.5,0\n0,1,7.5,7.5,0,3.14159\n1,0,3.5,2.5,0,0\n";
  }
  BinningSpec spec{Grid2D(4, 4, 8.0, 8.0), {0.0, std::numbers::pi}};
  const auto single = ibm_ensemble_moments({dir / "one.csv"}, spec);
  REQUIRE(single.size() == 2);
  const MomentField& m0 = single[0];
  const std::size_t k = m0.index(0, m0.grid.index(0, 1));
  CHECK(m0.rho[k] == doctest::Approx(1.0 / m0.grid.cell_area()));
  CHECK(m0.velocity[k].x == doctest::Approx(std::cos(0.5)));
  CHECK(m0.velocity[k].y == doctest::Approx(std::sin(0.5)));
  CHECK(m0.mask[k] == 0);
  CHECK(m0.mask[m0.index(1, 0)] == 1);

  const auto ab = ibm_ensemble_moments({dir / "one.csv", dir / "two.csv"}, spec);
  const auto ba = ibm_ensemble_moments({dir / "two.csv", dir / "one.csv"}, spec);
  REQUIRE(ab.size() == ba.size());
  for (std::size_t t = 0; t < ab.size(); ++t) {
    for (std::size_t q = 0; q < ab[t].rho.size(); ++q) {
      CHECK(ab[t].rho[q] == doctest::Approx(ba[t].rho[q]).epsilon(1e-14));
      CHECK(norm(ab[t].velocity[q] - ba[t].velocity[q]) < 1e-14);
    }
  }
  spec.pool = true;
  CHECK(ibm_ensemble_moments({dir / "one.csv"}, spec).size() == 1);
  CHECK_THROWS_AS(ibm_ensemble_moments({}, spec), std::invalid_argument);
}

TEST_CASE("comparison of runs") {
  MomentField a(0.0, Grid2D(4, 4, 4.0, 4.0), 1);
  for (std::size_t k = 0; k < a.rho.size(); ++k) a.rho[k] = 1.0 + 0.1 * k;
  MomentField b = a;
  b.rho[3] += 0.5;
  const ComparisonReport self = compare({{a}, {a}});
  CHECK(self.max_l1_rho() == 0.0);
  const ComparisonReport diff = compare({{a}, {b}});
  CHECK(diff.max_l1_rho() == doctest::Approx(0.5));
  MomentField c(0.0, Grid2D(5, 4, 5.0, 4.0), 1);
  CHECK_THROWS_AS(compare({{a}, {c}}), std::invalid_argument);
  CHECK_THROWS_AS(compare({{a}}), std::invalid_argument);
  b.t = 0.3;
  CHECK(compare({{a}, {b}}).rows[0].resampled);
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("cli");
  nlohmann::json j = base_config();
  j["groups"] = nlohmann::json::parse(R"([{"target_angle": 0, "density": {"kind": "uniform", "value": 0.2}}])");
  std::ofstream(dir / "good.json") << j.dump();
  nlohmann::json bad = j;
  bad["grid"]["nx"] = -3;
  std::ofstream(dir / "bad.json") << bad.dump();
  nlohmann::json other = j;
  other["groups"][0]["density"]["value"] = 0.4;
  std::ofstream(dir / "other.json") << other.dump();

  const std::string good = (dir / "good.json").string();
  CHECK(cli("validate --config " + good + " --model kinetic") == 0);
  CHECK(cli("validate --config " + (dir / "bad.json").string() + " --model kinetic") == 2);
  CHECK(cli("validate --config " + good) == 2);  // no model anywhere
  CHECK(cli("run --config " + good + " --model kinetic --out " + (dir / "r1").string()) == 0);
  CHECK(cli("run --config " + (dir / "other.json").string() + " --model kinetic --out " + (dir / "r2").string()) == 0);
  CHECK(cli("compare --runs " + (dir / "r1").string() + " " + (dir / "r1").string() + " --tolerance 0") == 0);
  CHECK(cli("compare --runs " + (dir / "r1").string() + " " + (dir / "r2").string() + " --tolerance 1e-6") == 4);
  CHECK(cli("moments --config " + good + " --files " + (dir / "missing.csv").string() + " --out " +
            (dir / "m.csv").string()) == 3);

  const std::string table = "kernel-table --kappa 0 --delta 2 --resolution 9 --out ";
  CHECK(cli(table + (dir / "t1").string()) == 0);
  CHECK(cli(table + (dir / "t2").string()) == 0);
  for (const auto& e : fs::directory_iterator(dir / "t1")) {
    CHECK(slurp(e.path()) == slurp(dir / "t2" / e.path().filename()));
  }
}
