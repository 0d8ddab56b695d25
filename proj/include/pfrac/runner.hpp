#pragma once

#include <string>
#include <vector>

#include "pfrac/config.hpp"

namespace pfrac {

/// Per-run aggregate written to summary.json next to the CSV outputs.
struct RunSummary {
  std::string benchmark;
  std::string solver;
  std::string mode;  // "paper" or "desk"
  int increments_requested = 0;
  int increments_completed = 0;
  int failed_increment = -1;  // -1: none
  long total_iterations = 0;
  long max_iterations_per_increment = 0;
  long ic_iterations = 0;
  long qm_corrections = 0;
  long factorizations = 0;
  double wall_time_s = 0.0;
  double peak_reaction_abs = 0.0;
  double min_irreversibility = 0.0;  // min over increments of min(D - D_prev)
  bool qm_cap_hit = false;
  int nodes = 0;
  int elements = 0;

  std::string to_json() const;
  static RunSummary from_json_file(const std::string& path);
};

/// Runs one benchmark with one solver and writes fd.csv, report.csv,
/// summary.json and VTK snapshots (dump_stride > 0) into out_dir.
/// Partial artifacts are retained when the solver fails mid-run.
RunSummary run_benchmark(const BenchmarkConfig& cfg, SolverKind kind, const std::string& out_dir);

/// Side-by-side table (one row per solver, the four report columns plus
/// wall-time speedups relative to the slowest run). Throws when fewer
/// than two summaries are given or the benchmarks differ.
struct Comparison {
  std::string csv;
  std::string markdown;
};

Comparison compare_runs(const std::vector<RunSummary>& summaries);
Comparison compare_run_files(const std::vector<std::string>& summary_paths);

/// Mesh-refinement study: repeats the run with the in-band element size
/// at l/10, l/5 and 2l/5 (modified Newton solver), one subdirectory per
/// refinement. Returns the three summaries in that order.
std::vector<RunSummary> mesh_study(const BenchmarkConfig& cfg, const std::string& out_dir);

/// Load the (step, applied, reaction) columns of an fd.csv.
struct ForceCurve {
  std::vector<double> applied;
  std::vector<double> reaction;
};
ForceCurve read_force_curve(const std::string& fd_csv_path);

}  // namespace pfrac
