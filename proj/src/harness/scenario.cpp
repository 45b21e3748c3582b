#include "crowdscale/harness/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "crowdscale/errors.hpp"

namespace crowdscale::harness {

Model parse_model(const std::string& name) {
  if (name == "ibm-discrete") return Model::ibm_discrete;
  if (name == "ibm-continuous") return Model::ibm_continuous;
  if (name == "kinetic") return Model::kinetic;
  if (name == "fluid-mono") return Model::fluid_mono;
  if (name == "fluid-vmf") return Model::fluid_vmf;
  if (name == "hydro") return Model::hydro;
  throw ValidationError({"unknown model '" + name +
                         "' (expected ibm-discrete, ibm-continuous, kinetic, fluid-mono, fluid-vmf or hydro)"});
}

std::string to_string(Model m) {
  switch (m) {
    case Model::ibm_discrete: return "ibm-discrete";
    case Model::ibm_continuous: return "ibm-continuous";
    case Model::kinetic: return "kinetic";
    case Model::fluid_mono: return "fluid-mono";
    case Model::fluid_vmf: return "fluid-vmf";
    case Model::hydro: return "hydro";
  }
  return "kinetic";
}

ModelParams Scenario::resolved_params(Model m) const {
  ModelParams p = params;
  if (m == Model::hydro && !kappa_given) p.kappa = -1.0;
  return p;
}

Grid2D Scenario::grid() const { return Grid2D(nx, ny, lx, ly); }

TargetBins Scenario::bins() const {
  std::vector<double> angles, weights;
  for (const auto& g : groups) {
    angles.push_back(g.target_angle);
    weights.push_back(g.weight);
  }
  return TargetBins(std::move(angles), std::move(weights));
}

namespace {

using json = nlohmann::json;

// Reads an optional member, recording unknown keys and type errors.
class Reader {
 public:
  Reader(const json& j, std::string where, std::vector<std::string>& problems)
      : j_(j), where_(std::move(where)), problems_(problems) {
    if (!j_.is_object()) problems_.push_back(where_ + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.is_object() || !j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      problems_.push_back(where_ + "." + key + ": wrong type");
    }
  }

  bool has(const char* key) const { return j_.is_object() && j_.contains(key); }
  const json& at(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() {
    if (!j_.is_object()) return;
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) problems_.push_back(where_ + ": unknown key '" + item.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::vector<std::string>& problems_;
  std::set<std::string> seen_;
};

void read_vec(const json& j, Vec2& v, const std::string& where, std::vector<std::string>& problems) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    problems.push_back(where + ": expected [x, y]");
    return;
  }
  v = {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

Scenario scenario_from_json(const json& j) {
  Scenario s;
  std::vector<std::string> problems;
  Reader top(j, "scenario", problems);
  if (top.has("domain")) {
    Reader r(top.at("domain"), "domain", problems);
    r.get("lx", s.lx);
    r.get("ly", s.ly);
    r.finish();
  }
  if (top.has("grid")) {
    Reader r(top.at("grid"), "grid", problems);
    r.get("nx", s.nx);
    r.get("ny", s.ny);
    r.get("n_theta", s.n_theta);
    r.get("n_test", s.n_test);
    r.get("n_quad", s.n_quad);
    r.finish();
  }
  if (top.has("params")) {
    Reader r(top.at("params"), "params", problems);
    r.get("c", s.params.c);
    r.get("R", s.params.cut.radius);
    r.get("ell", s.params.cut.ell);
    r.get("L", s.params.cut.big_l);
    r.get("k", s.params.k);
    r.get("d", s.params.d);
    s.kappa_given = r.has("kappa");
    r.get("kappa", s.params.kappa);
    r.get("C", s.params.big_c);
    r.get("dt", s.dt);
    r.finish();
  }
  if (top.has("time")) {
    Reader r(top.at("time"), "time", problems);
    r.get("t_end", s.t_end);
    r.get("output_every", s.output_every);
    r.finish();
  }
  if (top.has("fluid")) {
    Reader r(top.at("fluid"), "fluid", problems);
    r.get("rho_max", s.rho_max);
    r.finish();
  }
  if (top.has("hydro")) {
    Reader r(top.at("hydro"), "hydro", problems);
    r.get("omega", s.hydro_omega);
    r.get("tolerance", s.hydro_tolerance);
    r.get("max_iterations", s.hydro_max_iterations);
    r.finish();
  }
  top.get("seed", s.seed);
  top.get("interaction", s.interaction);
  if (top.has("model")) {
    std::string name;
    top.get("model", name);
    try {
      s.model = parse_model(name);
    } catch (const ValidationError& e) {
      problems.push_back(e.what());
    }
  }
  if (top.has("groups")) {
    const json& gs = top.at("groups");
    if (!gs.is_array()) {
      problems.push_back("groups: expected an array");
    } else {
      for (std::size_t i = 0; i < gs.size(); ++i) {
        const std::string where = "groups[" + std::to_string(i) + "]";
        GroupSpec g;
        Reader r(gs[i], where, problems);
        r.get("target_angle", g.target_angle);
        r.get("weight", g.weight);
        if (r.has("density")) {
          Reader d(r.at("density"), where + ".density", problems);
          d.get("kind", g.density.kind);
          d.get("value", g.density.value);
          d.get("background", g.density.background);
          d.get("width", g.density.width);
          if (d.has("center")) read_vec(d.at("center"), g.density.center, where + ".density.center", problems);
          d.finish();
        }
        if (r.has("heading")) {
          Reader h(r.at("heading"), where + ".heading", problems);
          h.get("kind", g.heading.kind);
          if (h.has("angle")) {
            double a = 0.0;
            h.get("angle", a);
            g.heading.angle = a;
          }
          h.get("beta", g.heading.beta);
          h.finish();
        }
        r.finish();
        s.groups.push_back(g);
      }
    }
  }
  top.finish();
  if (!problems.empty()) throw ValidationError(problems);
  return s;
}

nlohmann::ordered_json to_json(const Scenario& s) {
  nlohmann::ordered_json j;
  j["domain"] = {{"lx", s.lx}, {"ly", s.ly}};
  j["grid"] = {{"nx", s.nx}, {"ny", s.ny}, {"n_theta", s.n_theta}, {"n_test", s.n_test}, {"n_quad", s.n_quad}};
  j["params"] = {{"c", s.params.c},   {"R", s.params.cut.radius}, {"ell", s.params.cut.ell},
                 {"L", s.params.cut.big_l}, {"k", s.params.k},     {"d", s.params.d},
                 {"kappa", s.params.kappa}, {"C", s.params.big_c}, {"dt", s.dt}};
  j["time"] = {{"t_end", s.t_end}, {"output_every", s.output_every}};
  j["fluid"] = {{"rho_max", s.rho_max}};
  j["hydro"] = {{"omega", s.hydro_omega}, {"tolerance", s.hydro_tolerance},
                {"max_iterations", s.hydro_max_iterations}};
  j["seed"] = s.seed;
  j["interaction"] = s.interaction;
  if (s.model) j["model"] = to_string(*s.model);
  j["groups"] = nlohmann::ordered_json::array();
  for (const auto& g : s.groups) {
    nlohmann::ordered_json gj;
    gj["target_angle"] = g.target_angle;
    gj["weight"] = g.weight;
    gj["density"] = {{"kind", g.density.kind},
                     {"value", g.density.value},
                     {"background", g.density.background},
                     {"center", {g.density.center.x, g.density.center.y}},
                     {"width", g.density.width}};
    gj["heading"] = {{"kind", g.heading.kind}, {"angle", g.heading_angle()}, {"beta", g.heading.beta}};
    j["groups"].push_back(gj);
  }
  return j;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError({"cannot open scenario file " + path.string()});
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError({path.string() + ": " + e.what()});
  }
  return scenario_from_json(j);
}

std::vector<std::string> validation_problems(const Scenario& s, Model m) {
  std::vector<std::string> p;
  const ModelParams mp = s.resolved_params(m);
  auto need = [&p](bool ok, const std::string& msg) {
    if (!ok) p.push_back(msg);
  };
  need(s.lx > 0.0 && s.ly > 0.0, "domain sizes must be positive");
  need(s.nx >= 1 && s.ny >= 1, "grid.nx and grid.ny must be >= 1");
  need(s.n_theta >= 3, "grid.n_theta must be >= 3");
  need(s.n_test >= 3, "grid.n_test must be >= 3");
  need(s.n_quad >= 8, "grid.n_quad must be >= 8");
  need(mp.c > 0.0, "c must be positive");
  need(s.dt > 0.0, "dt must be positive");
  need(s.t_end >= 0.0, "t_end must be non-negative");
  need(s.output_every > 0.0, "output_every must be positive");
  need(mp.cut.ell > 0.0, "ell must be positive");
  need(mp.cut.ell <= mp.cut.radius && mp.cut.radius < mp.cut.big_l, "need ell <= R < L");
  need(mp.big_c > 1.0, "C must be > 1");
  need(mp.kappa >= -1.0 && mp.kappa <= 1.0, "kappa must lie in [-1, 1]");
  need(mp.kappa < 1.0, "kappa = 1 leaves an empty vision cone");
  need(mp.k >= 0.0, "k must be non-negative");
  need(mp.d >= 0.0, "d must be non-negative");
  if (m == Model::ibm_discrete) need(mp.cut.radius < mp.c * s.dt, "the discrete IBM needs R < c dt");
  if (m == Model::hydro) need(mp.kappa == -1.0, "the hydro model needs kappa = -1");
  if (m == Model::fluid_vmf || m == Model::hydro || m == Model::ibm_continuous) {
    need(mp.d > 0.0, "d must be positive for " + to_string(m));
  }
  if (m != Model::ibm_discrete && m != Model::ibm_continuous) {
    const double cfl = mp.c * s.dt / std::min(s.lx / std::max(s.nx, 1), s.ly / std::max(s.ny, 1));
    need(cfl <= 0.9, "transport CFL c dt / min(dx, dy) = " + std::to_string(cfl) + " exceeds 0.9");
  }
  try {
    parse_interaction_mode(s.interaction);
  } catch (const std::invalid_argument& e) {
    p.push_back(e.what());
  }
  for (std::size_t i = 0; i < s.groups.size(); ++i) {
    const GroupSpec& g = s.groups[i];
    const std::string w = "groups[" + std::to_string(i) + "]";
    need(g.weight > 0.0, w + ": weight must be positive");
    need(g.density.kind == "uniform" || g.density.kind == "gaussian" || g.density.kind == "box",
         w + ": density.kind must be uniform, gaussian or box");
    need(g.density.value >= 0.0 && g.density.background >= 0.0, w + ": densities must be non-negative");
    need(g.density.width > 0.0, w + ": density.width must be positive");
    need(g.heading.kind == "aligned" || g.heading.kind == "vmf" || g.heading.kind == "isotropic",
         w + ": heading.kind must be aligned, vmf or isotropic");
    need(g.heading.beta >= 0.0, w + ": heading.beta must be non-negative");
  }
  return p;
}

void validate(const Scenario& s, Model m) {
  auto p = validation_problems(s, m);
  if (!p.empty()) throw ValidationError(std::move(p));
}

double initial_density(const GroupSpec& g, Vec2 x, double lx, double ly) {
  const DensitySpec& d = g.density;
  if (d.kind == "uniform") return d.value;
  Vec2 off = x - d.center;
  off.x -= lx * std::round(off.x / lx);
  off.y -= ly * std::round(off.y / ly);
  if (d.kind == "gaussian") return d.background + d.value * std::exp(-0.5 * norm2(off) / (d.width * d.width));
  const bool inside = std::abs(off.x) <= d.width && std::abs(off.y) <= d.width;
  return d.background + (inside ? d.value : 0.0);
}

}  // namespace crowdscale::harness
