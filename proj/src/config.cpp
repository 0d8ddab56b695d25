#include "pfrac/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "pfrac/toml.hpp"

namespace pfrac {

namespace {

const std::set<std::string> kTopKeys{"name"};
const std::set<std::string> kSections{"", "geometry", "material", "loading", "solver", "outputs", "desk"};
const std::set<std::string> kGeometryKeys{"benchmark", "refinement_ratio", "coarse_h", "thickness"};
const std::set<std::string> kMaterialKeys{"E", "nu", "Gc", "l", "tol_ir"};
const std::set<std::string> kLoadingKeys{"total_displacement", "increments", "set", "component"};
const std::set<std::string> kSolverKeys{"tol", "tol_in", "tol_qm", "rho", "max_newton_iters",
                                        "max_backtracks", "max_qm_corrections"};
const std::set<std::string> kOutputKeys{"directory", "dump_stride"};
const std::set<std::string> kDeskKeys{"l", "coarse_h", "tol_qm", "increments", "total_displacement"};

double need_number(const TomlTable& t, const std::string& sec, const std::string& key) {
  if (!t.has(sec, key)) throw ConfigError("missing key " + sec + "." + key);
  const auto& v = t.at(sec, key);
  if (!v.is_number()) throw ConfigError("key " + sec + "." + key + " must be a number");
  return v.as_double();
}

long long need_integer(const TomlTable& t, const std::string& sec, const std::string& key) {
  if (!t.has(sec, key)) throw ConfigError("missing key " + sec + "." + key);
  const auto& v = t.at(sec, key);
  if (v.v.index() != 0) throw ConfigError("key " + sec + "." + key + " must be an integer");
  return std::get<long long>(v.v);
}

std::string need_string(const TomlTable& t, const std::string& sec, const std::string& key) {
  if (!t.has(sec, key)) throw ConfigError("missing key " + sec + "." + key);
  const auto& v = t.at(sec, key);
  if (v.v.index() != 3) throw ConfigError("key " + sec + "." + key + " must be a string");
  return std::get<std::string>(v.v);
}

void reject_unknown(const TomlTable& t) {
  for (const auto& [sec, keys] : t.sections) {
    if (!kSections.count(sec)) throw ConfigError("unknown section [" + sec + "]");
    const std::set<std::string>* allowed = nullptr;
    if (sec == "") allowed = &kTopKeys;
    else if (sec == "geometry") allowed = &kGeometryKeys;
    else if (sec == "material") allowed = &kMaterialKeys;
    else if (sec == "loading") allowed = &kLoadingKeys;
    else if (sec == "solver") allowed = &kSolverKeys;
    else if (sec == "outputs") allowed = &kOutputKeys;
    else allowed = &kDeskKeys;
    for (const auto& [key, value] : keys)
      if (!allowed->count(key))
        throw ConfigError("unknown key " + (sec.empty() ? key : sec + "." + key));
  }
}

}  // namespace

void BenchmarkConfig::validate() const {
  if (increments < 1) throw ConfigError("loading.increments must be >= 1");
  if (total_displacement == 0.0) throw ConfigError("loading.total_displacement must be nonzero");
  if (loaded_component != 0 && loaded_component != 1) throw ConfigError("loading.component must be x or y");
  try {
    solver.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
  if (!(E > 0.0) || !(nu >= 0.0 && nu < 0.5) || !(Gc > 0.0) || !(geometry.l > 0.0) || !(tol_ir > 0.0))
    throw ConfigError("material constants out of range");
}

BenchmarkConfig parse_config(const std::string& text, bool desk) {
  const TomlTable t = parse_toml(text);
  reject_unknown(t);

  BenchmarkConfig c;
  c.desk_mode = desk;
  c.name = need_string(t, "", "name");
  c.geometry.benchmark = benchmark_from_name(need_string(t, "geometry", "benchmark"));
  c.geometry.refinement_ratio = t.has("geometry", "refinement_ratio")
                                    ? t.at("geometry", "refinement_ratio").as_double()
                                    : 0.2;
  c.geometry.coarse_h = need_number(t, "geometry", "coarse_h");
  if (t.has("geometry", "thickness")) c.geometry.thickness = t.at("geometry", "thickness").as_double();

  c.E = need_number(t, "material", "E");
  c.nu = need_number(t, "material", "nu");
  c.Gc = need_number(t, "material", "Gc");
  c.geometry.l = need_number(t, "material", "l");
  if (t.has("material", "tol_ir")) c.tol_ir = t.at("material", "tol_ir").as_double();

  c.total_displacement = need_number(t, "loading", "total_displacement");
  c.increments = static_cast<int>(need_integer(t, "loading", "increments"));
  c.loaded_set = need_string(t, "loading", "set");
  const std::string comp = need_string(t, "loading", "component");
  if (comp == "x") c.loaded_component = 0;
  else if (comp == "y") c.loaded_component = 1;
  else throw ConfigError("loading.component must be \"x\" or \"y\"");

  auto opt_solver = [&](const std::string& key, double& target) {
    if (t.has("solver", key)) target = t.at("solver", key).as_double();
  };
  opt_solver("tol", c.solver.tol);
  opt_solver("tol_in", c.solver.tol_in);
  opt_solver("tol_qm", c.solver.tol_qm);
  opt_solver("rho", c.solver.rho);
  if (t.has("solver", "max_newton_iters")) c.solver.max_newton_iters = need_integer(t, "solver", "max_newton_iters");
  if (t.has("solver", "max_backtracks")) c.solver.max_backtracks = static_cast<int>(need_integer(t, "solver", "max_backtracks"));
  if (t.has("solver", "max_qm_corrections")) c.solver.max_qm_corrections = static_cast<int>(need_integer(t, "solver", "max_qm_corrections"));

  if (t.has("outputs", "directory")) c.output_directory = std::get<std::string>(t.at("outputs", "directory").v);
  if (t.has("outputs", "dump_stride")) c.dump_stride = static_cast<int>(need_integer(t, "outputs", "dump_stride"));

  if (desk) {
    if (!t.sections.count("desk")) throw ConfigError("config has no [desk] section");
    if (t.has("desk", "l")) c.geometry.l = t.at("desk", "l").as_double();
    if (t.has("desk", "coarse_h")) c.geometry.coarse_h = t.at("desk", "coarse_h").as_double();
    if (t.has("desk", "tol_qm")) c.solver.tol_qm = t.at("desk", "tol_qm").as_double();
    if (t.has("desk", "increments")) c.increments = static_cast<int>(need_integer(t, "desk", "increments"));
    if (t.has("desk", "total_displacement")) c.total_displacement = t.at("desk", "total_displacement").as_double();
  }

  c.validate();
  return c;
}

BenchmarkConfig load_config(const std::string& path, bool desk) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), desk);
}

Problem make_problem(const BenchmarkConfig& cfg, const Mesh& mesh) {
  Problem p;
  p.mesh = &mesh;
  p.mat = cfg.material();
  const auto zero = [](double) { return 0.0; };
  const double total = cfg.total_displacement;
  const auto ramp = [total](double t) { return total * t; };

  switch (cfg.geometry.benchmark) {
    case Benchmark::senp_tension:
      p.bcs = {{"bottom_edge", 0, zero}, {"bottom_edge", 1, zero}};
      break;
    case Benchmark::senp_shear:
      // The loaded edge additionally keeps its transverse component fixed.
      p.bcs = {{"bottom_edge", 0, zero}, {"bottom_edge", 1, zero}, {cfg.loaded_set, 1 - cfg.loaded_component, zero}};
      break;
    case Benchmark::three_point_bending:
      p.bcs = {{"support_left", 0, zero}, {"support_left", 1, zero}, {"support_right", 1, zero}};
      break;
    case Benchmark::l_panel:
      p.bcs = {{"bottom_edge", 0, zero}, {"bottom_edge", 1, zero}};
      break;
  }
  p.bcs.push_back({cfg.loaded_set, cfg.loaded_component, ramp});
  p.reaction_set = cfg.loaded_set;
  p.reaction_component = cfg.loaded_component;
  p.applied_magnitude = [total](double t) { return std::abs(total) * t; };
  return p;
}

}  // namespace pfrac
