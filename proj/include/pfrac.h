/* C interface to the phase-field fracture benchmark library.
 *
 * All functions return pfrac_status; on failure pfrac_last_error() gives
 * a thread-local description of what went wrong. Objects returned through
 * out-parameters are owned by the caller and released with the matching
 * _free function.
 */
#ifndef PFRAC_H
#define PFRAC_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pfrac_status {
  PFRAC_OK = 0,
  PFRAC_ERR_INVALID_ARGUMENT = 1,
  PFRAC_ERR_IO = 2,
  PFRAC_ERR_CONFIG = 3,
  PFRAC_ERR_SOLVER = 4,
  PFRAC_ERR_INTERNAL = 5
} pfrac_status;

typedef struct pfrac_config pfrac_config;
typedef struct pfrac_summary pfrac_summary;

const char* pfrac_version(void);

/* Thread-local message describing the last error returned on this thread. */
const char* pfrac_last_error(void);

/* Loads and validates a TOML benchmark configuration. desk_mode != 0
 * applies the [desk] override section. */
pfrac_status pfrac_config_load(const char* path, int desk_mode, pfrac_config** out);
void pfrac_config_free(pfrac_config* config);

/* Overrides applied after loading. A negative value leaves the setting
 * unchanged. */
pfrac_status pfrac_config_set_qm_max_corrections(pfrac_config* config, long value);
pfrac_status pfrac_config_set_increments(pfrac_config* config, long value);
pfrac_status pfrac_config_set_dump_stride(pfrac_config* config, long value);

/* Runs one benchmark. solver is "am", "qm" or "mn"; out_dir receives
 * fd.csv, report.csv, summary.json and VTK snapshots. A solver failure
 * returns PFRAC_ERR_SOLVER while keeping the partial artifacts and the
 * summary retrievable through *out. */
pfrac_status pfrac_run_benchmark(const pfrac_config* config, const char* solver,
                                 const char* out_dir, pfrac_summary** out);

/* Mesh-refinement study (in-band h = l/10, l/5, 2l/5) with the modified
 * Newton solver; one subdirectory per refinement under out_dir. */
pfrac_status pfrac_mesh_study(const pfrac_config* config, const char* out_dir);

/* Numeric summary fields: total_iterations, max_iterations_per_increment,
 * ic_iterations, qm_corrections, factorizations, wall_time_s,
 * peak_reaction_abs, min_irreversibility, failed_increment,
 * increments_completed, qm_cap_hit, nodes, elements. */
pfrac_status pfrac_summary_get(const pfrac_summary* summary, const char* key, double* out);
pfrac_status pfrac_summary_write_json(const pfrac_summary* summary, const char* path);
void pfrac_summary_free(pfrac_summary* summary);

/* Comparison table across summary.json files of the same benchmark.
 * Either output path may be NULL; csv_path receives the CSV table and
 * markdown_path the Markdown rendering. */
pfrac_status pfrac_compare_summaries(const char* const* summary_paths, size_t count,
                                     const char* csv_path, const char* markdown_path);

#ifdef __cplusplus
}
#endif

#endif /* PFRAC_H */
