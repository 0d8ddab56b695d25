// Benchmark front end. Links against the C API only.

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "pfrac.h"

namespace {

struct ConfigDeleter {
  void operator()(pfrac_config* c) const { pfrac_config_free(c); }
};
struct SummaryDeleter {
  void operator()(pfrac_summary* s) const { pfrac_summary_free(s); }
};
using ConfigPtr = std::unique_ptr<pfrac_config, ConfigDeleter>;
using SummaryPtr = std::unique_ptr<pfrac_summary, SummaryDeleter>;

int report_error(const char* what, pfrac_status status) {
  std::fprintf(stderr, "pfbench: %s: %s\n", what, pfrac_last_error());
  return status == PFRAC_ERR_SOLVER ? 2 : 1;
}

ConfigPtr load(const std::string& path, bool desk, long qm_max_corrections, long increments,
               long dump_stride, pfrac_status& status) {
  pfrac_config* raw = nullptr;
  status = pfrac_config_load(path.c_str(), desk ? 1 : 0, &raw);
  ConfigPtr cfg(raw);
  if (status != PFRAC_OK) return cfg;
  if (qm_max_corrections >= 0) pfrac_config_set_qm_max_corrections(cfg.get(), qm_max_corrections);
  if (increments > 0) pfrac_config_set_increments(cfg.get(), increments);
  if (dump_stride >= 0) pfrac_config_set_dump_stride(cfg.get(), dump_stride);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-field brittle fracture benchmarks (AT1, three nonlinear solvers)"};
  app.require_subcommand(1);

  // run
  std::string run_config, run_solver, run_out = "out";
  long run_stride = -1, run_qm_max = -1, run_increments = -1;
  bool run_desk = false, run_paper = false;
  auto* run = app.add_subcommand("run", "Run one benchmark with one solver");
  run->add_option("--config", run_config, "TOML benchmark configuration")->required();
  run->add_option("--solver", run_solver, "am | qm | mn")->required();
  run->add_option("--out", run_out, "Output directory");
  run->add_option("--dump-stride", run_stride, "Write a VTK snapshot every N increments (0: none)");
  run->add_option("--qm-max-corrections", run_qm_max,
                  "Override the extrapolation-correction cap (0: original quasi-monolithic scheme)");
  run->add_option("--increments", run_increments, "Override the number of load increments");
  auto* desk_flag = run->add_flag("--desk", run_desk, "Apply the [desk] override section");
  run->add_flag("--paper", run_paper, "Use the paper-scale parameters (default)")->excludes(desk_flag);

  // compare
  std::vector<std::string> cmp_paths;
  std::string cmp_csv, cmp_md;
  auto* cmp = app.add_subcommand("compare", "Tabulate summary.json files of one benchmark");
  cmp->add_option("summaries", cmp_paths, "summary.json files")->required()->expected(-2);
  cmp->add_option("--csv", cmp_csv, "Write the CSV table here");
  cmp->add_option("--markdown", cmp_md, "Write the Markdown table here");

  // mesh-study
  std::string study_config, study_out = "out/mesh_study";
  bool study_desk = false;
  auto* study = app.add_subcommand("mesh-study", "Refinement study at h = l/10, l/5, 2l/5 (mn solver)");
  study->add_option("--config", study_config, "TOML benchmark configuration")->required();
  study->add_option("--out", study_out, "Output directory");
  study->add_flag("--desk", study_desk, "Apply the [desk] override section");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    pfrac_status status = PFRAC_OK;
    ConfigPtr cfg = load(run_config, run_desk, run_qm_max, run_increments, run_stride, status);
    if (status != PFRAC_OK) return report_error("config", status);
    pfrac_summary* raw = nullptr;
    status = pfrac_run_benchmark(cfg.get(), run_solver.c_str(), run_out.c_str(), &raw);
    SummaryPtr summary(raw);
    if (status != PFRAC_OK && status != PFRAC_ERR_SOLVER) return report_error("run", status);
    if (summary) {
      double total = 0, maxinc = 0, ic = 0, wall = 0;
      pfrac_summary_get(summary.get(), "total_iterations", &total);
      pfrac_summary_get(summary.get(), "max_iterations_per_increment", &maxinc);
      pfrac_summary_get(summary.get(), "ic_iterations", &ic);
      pfrac_summary_get(summary.get(), "wall_time_s", &wall);
      std::printf("solver %s: max it./inc. %.0f, total it. %.0f, IC it. %.0f, %.2f s\n",
                  run_solver.c_str(), maxinc, total, ic, wall);
    }
    if (status == PFRAC_ERR_SOLVER) {
      std::fprintf(stderr, "pfbench: %s\n", pfrac_last_error());
      return 2;
    }
    return 0;
  }

  if (cmp->parsed()) {
    std::vector<const char*> raw;
    raw.reserve(cmp_paths.size());
    for (const auto& p : cmp_paths) raw.push_back(p.c_str());
    const pfrac_status status =
        pfrac_compare_summaries(raw.data(), raw.size(), cmp_csv.empty() ? nullptr : cmp_csv.c_str(),
                                cmp_md.empty() ? nullptr : cmp_md.c_str());
    if (status != PFRAC_OK) return report_error("compare", status);
    if (cmp_csv.empty() && cmp_md.empty()) {
      // Print the CSV table to stdout through a temporary file-less path:
      // re-run with a stdout sink is not part of the C API, so write CSV
      // to a temp file instead.
      const std::string tmp = "/tmp/pfrac_compare.csv";
      if (pfrac_compare_summaries(raw.data(), raw.size(), tmp.c_str(), nullptr) == PFRAC_OK) {
        if (FILE* f = std::fopen(tmp.c_str(), "r")) {
          char buf[4096];
          size_t n;
          while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) std::fwrite(buf, 1, n, stdout);
          std::fclose(f);
        }
      }
    }
    return 0;
  }

  if (study->parsed()) {
    pfrac_status status = PFRAC_OK;
    ConfigPtr cfg = load(study_config, study_desk, -1, -1, -1, status);
    if (status != PFRAC_OK) return report_error("config", status);
    status = pfrac_mesh_study(cfg.get(), study_out.c_str());
    if (status != PFRAC_OK) return report_error("mesh-study", status);
    return 0;
  }
  return 0;
}
