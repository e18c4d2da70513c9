/* gfra.h — C interface to the grant-free random access simulation library.
 *
 * Usage: build an experiment from a JSON spec (see gfra_preset_json for the
 * schema), run it, then either read the metrics CSV from memory or write
 * the full output set (metrics.csv, metrics.meta.json, scenario extras) to
 * a directory. Handles are opaque; every call reports a gfra_status and the
 * last error detail is retrievable per handle (or thread-locally for
 * creation failures).
 */
#ifndef GFRA_H
#define GFRA_H

#include <stdint.h>

#if defined(_WIN32)
#define GFRA_API __declspec(dllexport)
#else
#define GFRA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gfra_status {
  GFRA_OK = 0,
  GFRA_ERROR_INVALID_ARGUMENT = 1,
  GFRA_ERROR_CONFIG = 2,
  GFRA_ERROR_NUMERIC = 3,
  GFRA_ERROR_IO = 4,
  GFRA_ERROR_INTERNAL = 5
} gfra_status;

typedef struct gfra_experiment gfra_experiment;

GFRA_API const char* gfra_version(void);

/* Static description of a status code ("ok", "config error", ...). */
GFRA_API const char* gfra_status_message(gfra_status status);

/* Detail message for the most recent failure on this thread (creation and
 * other handle-less calls). Never NULL; empty string when no error. */
GFRA_API const char* gfra_last_error(void);

/* Resolved spec JSON for a named preset scenario (example1, example2_smv,
 * example2_smv_desk, example3_mmv, example3_mmv_desk, embedded, csa,
 * density_evolution, se_trace). *out_json is malloc'd; release it with
 * gfra_string_free. */
GFRA_API gfra_status gfra_preset_json(const char* scenario, char** out_json);

GFRA_API void gfra_string_free(char* s);

/* Parses and validates a full experiment spec. On success *out owns the
 * experiment and must be released with gfra_experiment_destroy. */
GFRA_API gfra_status gfra_experiment_create(const char* spec_json, gfra_experiment** out);

/* Runs all trials. Deterministic for a fixed spec (any thread count). */
GFRA_API gfra_status gfra_experiment_run(gfra_experiment* experiment);

/* metrics.csv content of the completed run; NULL before a successful run.
 * Owned by the handle. */
GFRA_API const char* gfra_experiment_metrics_csv(const gfra_experiment* experiment);

/* Resolved spec of the experiment as JSON (also embedded in the meta file).
 * Owned by the handle. */
GFRA_API const char* gfra_experiment_spec_json(const gfra_experiment* experiment);

/* Writes metrics.csv, metrics.meta.json and scenario extras under out_dir,
 * creating the directory if needed. Requires a completed run. */
GFRA_API gfra_status gfra_experiment_write_outputs(gfra_experiment* experiment,
                                                   const char* out_dir);

/* Detail message for the most recent failure on this handle. Never NULL. */
GFRA_API const char* gfra_experiment_last_error(const gfra_experiment* experiment);

GFRA_API void gfra_experiment_destroy(gfra_experiment* experiment);

#ifdef __cplusplus
}
#endif

#endif /* GFRA_H */
