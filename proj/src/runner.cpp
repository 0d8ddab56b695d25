#include "pfrac/runner.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pfrac/vtk.hpp"

namespace pfrac {

namespace fs = std::filesystem;

namespace {

std::string csv_double(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

}  // namespace

std::string RunSummary::to_json() const {
  nlohmann::json j;
  j["benchmark"] = benchmark;
  j["solver"] = solver;
  j["mode"] = mode;
  j["increments_requested"] = increments_requested;
  j["increments_completed"] = increments_completed;
  j["failed_increment"] = failed_increment;
  j["total_iterations"] = total_iterations;
  j["max_iterations_per_increment"] = max_iterations_per_increment;
  j["ic_iterations"] = ic_iterations;
  j["qm_corrections"] = qm_corrections;
  j["factorizations"] = factorizations;
  j["wall_time_s"] = wall_time_s;
  j["peak_reaction_abs"] = peak_reaction_abs;
  j["min_irreversibility"] = min_irreversibility;
  j["qm_cap_hit"] = qm_cap_hit;
  j["nodes"] = nodes;
  j["elements"] = elements;
  return j.dump(2);
}

RunSummary RunSummary::from_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open summary '" + path + "'");
  nlohmann::json j;
  f >> j;
  RunSummary s;
  s.benchmark = j.at("benchmark").get<std::string>();
  s.solver = j.at("solver").get<std::string>();
  s.mode = j.at("mode").get<std::string>();
  s.increments_requested = j.at("increments_requested").get<int>();
  s.increments_completed = j.at("increments_completed").get<int>();
  s.failed_increment = j.at("failed_increment").get<int>();
  s.total_iterations = j.at("total_iterations").get<long>();
  s.max_iterations_per_increment = j.at("max_iterations_per_increment").get<long>();
  s.ic_iterations = j.at("ic_iterations").get<long>();
  s.qm_corrections = j.at("qm_corrections").get<long>();
  s.factorizations = j.at("factorizations").get<long>();
  s.wall_time_s = j.at("wall_time_s").get<double>();
  s.peak_reaction_abs = j.at("peak_reaction_abs").get<double>();
  s.min_irreversibility = j.at("min_irreversibility").get<double>();
  s.qm_cap_hit = j.at("qm_cap_hit").get<bool>();
  s.nodes = j.at("nodes").get<int>();
  s.elements = j.at("elements").get<int>();
  return s;
}

RunSummary run_benchmark(const BenchmarkConfig& cfg, SolverKind kind, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const Mesh mesh = build_benchmark_mesh(cfg.geometry);
  const Problem problem = make_problem(cfg, mesh);

  RunSummary sum;
  sum.benchmark = benchmark_name(cfg.geometry.benchmark);
  sum.solver = solver_name(kind);
  sum.mode = cfg.desk_mode ? "desk" : "paper";
  sum.increments_requested = cfg.increments;
  sum.nodes = mesh.node_count();
  sum.elements = mesh.element_count();
  sum.min_irreversibility = 0.0;

  std::ofstream fd(fs::path(out_dir) / "fd.csv");
  std::ofstream rep(fs::path(out_dir) / "report.csv");
  if (!fd || !rep) throw std::runtime_error("cannot create output CSVs in '" + out_dir + "'");
  fd << "step,u_applied_mm,reaction_N\n";
  rep << "step,iterations,ic_iterations,qm_corrections,residual_inf,wall_time_s\n";

  RunOptions opt;
  opt.increments = cfg.increments;
  opt.continue_on_failure = false;
  opt.on_step = [&](const State& state, const StepReport& r) {
    fd << r.increment << "," << csv_double(r.applied) << "," << csv_double(std::abs(r.reaction)) << "\n";
    rep << r.increment << "," << r.iterations << "," << r.ic_iterations << "," << r.qm_corrections
        << "," << csv_double(r.residual_inf) << "," << csv_double(r.wall_time_s) << "\n";
    fd.flush();
    rep.flush();
    if (cfg.dump_stride > 0 && (r.increment % cfg.dump_stride == 0 || r.increment == cfg.increments)) {
      std::ostringstream name;
      name << "state_" << r.increment << ".vtk";
      write_vtk(mesh, state, (fs::path(out_dir) / name.str()).string());
    }
    sum.increments_completed = r.increment;
    sum.total_iterations += r.iterations;
    sum.max_iterations_per_increment = std::max(sum.max_iterations_per_increment, r.iterations);
    sum.ic_iterations += r.ic_iterations;
    sum.qm_corrections += r.qm_corrections;
    sum.factorizations += r.factorizations;
    sum.peak_reaction_abs = std::max(sum.peak_reaction_abs, std::abs(r.reaction));
    sum.qm_cap_hit = sum.qm_cap_hit || r.qm_cap_hit;
    if (!r.converged && sum.failed_increment < 0) sum.failed_increment = r.increment;
    const double min_growth = (state.D - state.D_prev).minCoeff();
    sum.min_irreversibility = std::min(sum.min_irreversibility, min_growth);
  };

  const auto t0 = std::chrono::steady_clock::now();
  run_load_stepping(problem, kind, cfg.solver, opt);
  sum.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::ofstream js(fs::path(out_dir) / "summary.json");
  js << sum.to_json() << "\n";
  return sum;
}

Comparison compare_runs(const std::vector<RunSummary>& summaries) {
  if (summaries.size() < 2) throw std::invalid_argument("compare_runs: need at least two summaries");
  for (size_t i = 1; i < summaries.size(); ++i)
    if (summaries[i].benchmark != summaries[0].benchmark)
      throw std::invalid_argument("compare_runs: mismatched benchmarks ('" + summaries[i].benchmark +
                                  "' vs '" + summaries[0].benchmark + "')");
  double slowest = 0.0;
  for (const auto& s : summaries) slowest = std::max(slowest, s.wall_time_s);

  std::ostringstream csv, md;
  csv << "solver,max_it_per_inc,total_it,ic_it,total_time_s,speedup_vs_slowest\n";
  md << "| solver | max it./inc. | total it. | IC it. | total time [s] | speedup |\n";
  md << "|---|---|---|---|---|---|\n";
  for (const auto& s : summaries) {
    const double speedup = s.wall_time_s > 0.0 ? slowest / s.wall_time_s : 1.0;
    csv << s.solver << "," << s.max_iterations_per_increment << "," << s.total_iterations << ","
        << s.ic_iterations << "," << s.wall_time_s << "," << speedup << "\n";
    md << "| " << s.solver << " | " << s.max_iterations_per_increment << " | " << s.total_iterations
       << " | " << s.ic_iterations << " | " << s.wall_time_s << " | " << speedup << " |\n";
  }
  return {csv.str(), md.str()};
}

Comparison compare_run_files(const std::vector<std::string>& summary_paths) {
  std::vector<RunSummary> summaries;
  summaries.reserve(summary_paths.size());
  for (const auto& p : summary_paths) summaries.push_back(RunSummary::from_json_file(p));
  return compare_runs(summaries);
}

std::vector<RunSummary> mesh_study(const BenchmarkConfig& cfg, const std::string& out_dir) {
  std::vector<RunSummary> out;
  const double l = cfg.geometry.l;
  const struct {
    const char* label;
    double ratio;
  } levels[] = {{"h_l10", 0.1}, {"h_l5", 0.2}, {"h_2l5", 0.4}};
  for (const auto& lvl : levels) {
    BenchmarkConfig c = cfg;
    c.geometry.refinement_ratio = lvl.ratio;
    (void)l;
    out.push_back(run_benchmark(c, SolverKind::modified_newton, (fs::path(out_dir) / lvl.label).string()));
  }
  return out;
}

ForceCurve read_force_curve(const std::string& fd_csv_path) {
  std::ifstream f(fd_csv_path);
  if (!f) throw std::runtime_error("cannot open '" + fd_csv_path + "'");
  std::string line;
  std::getline(f, line);  // header
  ForceCurve c;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream s(line);
    std::string step, applied, reaction;
    std::getline(s, step, ',');
    std::getline(s, applied, ',');
    std::getline(s, reaction, ',');
    c.applied.push_back(std::stod(applied));
    c.reaction.push_back(std::stod(reaction));
  }
  return c;
}

}  // namespace pfrac
