#include "pfrac.h"

#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "pfrac/config.hpp"
#include "pfrac/runner.hpp"
#include "pfrac/toml.hpp"

using namespace pfrac;

struct pfrac_config {
  BenchmarkConfig cfg;
};

struct pfrac_summary {
  RunSummary sum;
};

namespace {

thread_local std::string g_last_error;

pfrac_status fail(pfrac_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

pfrac_status guard_invalid(const char* what) { return fail(PFRAC_ERR_INVALID_ARGUMENT, what); }

template <typename Fn>
pfrac_status wrap(Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    return fail(PFRAC_ERR_CONFIG, e.what());
  } catch (const TomlError& e) {
    return fail(PFRAC_ERR_CONFIG, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(PFRAC_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(PFRAC_ERR_INTERNAL, e.what());
  }
}

}  // namespace

extern "C" {

const char* pfrac_version(void) { return "0.1.0"; }

const char* pfrac_last_error(void) { return g_last_error.c_str(); }

pfrac_status pfrac_config_load(const char* path, int desk_mode, pfrac_config** out) {
  if (!path || !out) return guard_invalid("pfrac_config_load: null argument");
  *out = nullptr;
  return wrap([&] {
    auto cfg = std::make_unique<pfrac_config>();
    cfg->cfg = load_config(path, desk_mode != 0);
    *out = cfg.release();
    return PFRAC_OK;
  });
}

void pfrac_config_free(pfrac_config* config) { delete config; }

pfrac_status pfrac_config_set_qm_max_corrections(pfrac_config* config, long value) {
  if (!config) return guard_invalid("null config");
  if (value >= 0) config->cfg.solver.max_qm_corrections = static_cast<int>(value);
  return PFRAC_OK;
}

pfrac_status pfrac_config_set_increments(pfrac_config* config, long value) {
  if (!config) return guard_invalid("null config");
  if (value > 0) config->cfg.increments = static_cast<int>(value);
  return PFRAC_OK;
}

pfrac_status pfrac_config_set_dump_stride(pfrac_config* config, long value) {
  if (!config) return guard_invalid("null config");
  if (value >= 0) config->cfg.dump_stride = static_cast<int>(value);
  return PFRAC_OK;
}

pfrac_status pfrac_run_benchmark(const pfrac_config* config, const char* solver,
                                 const char* out_dir, pfrac_summary** out) {
  if (!config || !solver || !out_dir) return guard_invalid("pfrac_run_benchmark: null argument");
  if (out) *out = nullptr;
  return wrap([&]() -> pfrac_status {
    const SolverKind kind = solver_from_name(solver);
    auto summary = std::make_unique<pfrac_summary>();
    summary->sum = run_benchmark(config->cfg, kind, out_dir);
    const bool failed = summary->sum.failed_increment >= 0;
    if (failed)
      g_last_error = "solver failed at increment " + std::to_string(summary->sum.failed_increment);
    if (out) *out = summary.release();
    return failed ? PFRAC_ERR_SOLVER : PFRAC_OK;
  });
}

pfrac_status pfrac_mesh_study(const pfrac_config* config, const char* out_dir) {
  if (!config || !out_dir) return guard_invalid("pfrac_mesh_study: null argument");
  return wrap([&] {
    mesh_study(config->cfg, out_dir);
    return PFRAC_OK;
  });
}

pfrac_status pfrac_summary_get(const pfrac_summary* summary, const char* key, double* out) {
  if (!summary || !key || !out) return guard_invalid("pfrac_summary_get: null argument");
  const RunSummary& s = summary->sum;
  const std::string k = key;
  if (k == "total_iterations") *out = static_cast<double>(s.total_iterations);
  else if (k == "max_iterations_per_increment") *out = static_cast<double>(s.max_iterations_per_increment);
  else if (k == "ic_iterations") *out = static_cast<double>(s.ic_iterations);
  else if (k == "qm_corrections") *out = static_cast<double>(s.qm_corrections);
  else if (k == "factorizations") *out = static_cast<double>(s.factorizations);
  else if (k == "wall_time_s") *out = s.wall_time_s;
  else if (k == "peak_reaction_abs") *out = s.peak_reaction_abs;
  else if (k == "min_irreversibility") *out = s.min_irreversibility;
  else if (k == "failed_increment") *out = static_cast<double>(s.failed_increment);
  else if (k == "increments_completed") *out = static_cast<double>(s.increments_completed);
  else if (k == "qm_cap_hit") *out = s.qm_cap_hit ? 1.0 : 0.0;
  else if (k == "nodes") *out = static_cast<double>(s.nodes);
  else if (k == "elements") *out = static_cast<double>(s.elements);
  else return fail(PFRAC_ERR_INVALID_ARGUMENT, "unknown summary key '" + k + "'");
  return PFRAC_OK;
}

pfrac_status pfrac_summary_write_json(const pfrac_summary* summary, const char* path) {
  if (!summary || !path) return guard_invalid("pfrac_summary_write_json: null argument");
  return wrap([&]() -> pfrac_status {
    std::ofstream f(path);
    if (!f) return fail(PFRAC_ERR_IO, std::string("cannot open '") + path + "'");
    f << summary->sum.to_json() << "\n";
    return PFRAC_OK;
  });
}

void pfrac_summary_free(pfrac_summary* summary) { delete summary; }

pfrac_status pfrac_compare_summaries(const char* const* summary_paths, size_t count,
                                     const char* csv_path, const char* markdown_path) {
  if (!summary_paths) return guard_invalid("pfrac_compare_summaries: null paths");
  return wrap([&]() -> pfrac_status {
    std::vector<std::string> paths(summary_paths, summary_paths + count);
    const Comparison cmp = compare_run_files(paths);
    auto write = [&](const char* path, const std::string& text) -> bool {
      if (!path) return true;
      std::ofstream f(path);
      if (!f) return false;
      f << text;
      return static_cast<bool>(f);
    };
    if (!write(csv_path, cmp.csv)) return fail(PFRAC_ERR_IO, "cannot write comparison CSV");
    if (!write(markdown_path, cmp.markdown)) return fail(PFRAC_ERR_IO, "cannot write comparison Markdown");
    return PFRAC_OK;
  });
}

}  // extern "C"
