#pragma once

#include <string>

#include "pfrac/mesh.hpp"
#include "pfrac/solvers.hpp"

namespace pfrac {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Complete description of one benchmark run. Each shipped file carries
/// the paper-scale parameters plus a [desk] override section with a
/// larger regularization length and coarser mesh for minute-scale runs.
struct BenchmarkConfig {
  std::string name;
  GeometrySpec geometry;
  double E = 0.0, nu = 0.0, Gc = 0.0, tol_ir = 0.01;  // material source values
  double total_displacement = 0.0;
  int increments = 50;
  std::string loaded_set;
  int loaded_component = 1;
  SolverConfig solver;
  std::string output_directory;
  int dump_stride = 0;
  bool desk_mode = false;

  MaterialParams material() const { return make_material(E, nu, Gc, geometry.l, tol_ir); }
  void validate() const;
};

/// Parses and validates a TOML benchmark configuration; unknown keys are
/// rejected with their key path. desk = true applies the [desk] override
/// section.
BenchmarkConfig load_config(const std::string& path, bool desk = false);
BenchmarkConfig parse_config(const std::string& text, bool desk = false);

/// Benchmark-intrinsic boundary conditions plus the configured loading.
Problem make_problem(const BenchmarkConfig& cfg, const Mesh& mesh);

}  // namespace pfrac
