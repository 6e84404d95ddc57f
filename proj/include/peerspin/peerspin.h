/* C interface to the peerspin library.
 *
 * Handles are opaque and owned by the caller; release them with the matching
 * *_free function. Every call returning ps_status leaves a description of the
 * last failure in ps_last_error() (thread-local). Strings returned through
 * char** outputs must be released with ps_string_free. */
#ifndef PEERSPIN_H
#define PEERSPIN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PS_API __declspec(dllexport)
#else
#define PS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct ps_store ps_store;
typedef struct ps_outcome ps_outcome;

typedef enum ps_status {
  PS_OK = 0,
  PS_ERR_MALFORMED_VERSION = 1,
  PS_ERR_MALFORMED_RANGE = 2,
  PS_ERR_SOURCE_UNREADABLE = 3,
  PS_ERR_EMPTY_SNAPSHOT = 4,
  PS_ERR_PACKAGE_NOT_FOUND = 5,
  PS_ERR_NO_SATISFYING_VERSION = 6,
  PS_ERR_SINK_UNWRITABLE = 7,
  PS_ERR_NETWORK = 8,
  PS_ERR_INVALID_ARGUMENT = 9,
  PS_ERR_INTERNAL = 10
} ps_status;

typedef enum ps_verdict {
  PS_VERDICT_CLEAN = 0,
  PS_VERDICT_PEERSPIN = 1,
  PS_VERDICT_UNRESOLVABLE = 2,
  PS_VERDICT_ITERATION_LIMIT = 3
} ps_verdict;

typedef enum ps_format { PS_FORMAT_JSON = 0, PS_FORMAT_TREE_TEXT = 1, PS_FORMAT_NDJSON = 2 } ps_format;

typedef enum ps_snapshot_format { PS_SNAPSHOT_NDJSON = 0, PS_SNAPSHOT_DIRECTORY = 1 } ps_snapshot_format;

typedef struct ps_config {
  uint64_t max_iterations;
  int detector_enabled;
  int emit_placement_log;
  int debug_checks;
} ps_config;

typedef struct ps_scan_summary {
  size_t peerspin;
  size_t clean;
  size_t unresolvable;
  size_t error;
  size_t iteration_limit;
} ps_scan_summary;

/* Defaults: 10000 iterations, detector on, no log, no debug checks. */
PS_API void ps_config_init(ps_config* config);

PS_API const char* ps_last_error(void);
PS_API const char* ps_status_name(ps_status status);
PS_API void ps_string_free(char* s);

PS_API ps_status ps_store_open(const char* path, ps_snapshot_format format, ps_store** out);
/* HTTP registry with a write-once cache directory (may be NULL for no cache). */
PS_API ps_status ps_store_open_remote(const char* base_url, const char* cache_dir, ps_store** out);
/* Number of snapshot entries skipped on import, and their diagnostics. */
PS_API size_t ps_store_skipped(const ps_store* store);
PS_API const char* ps_store_diagnostic(const ps_store* store, size_t index);
PS_API void ps_store_free(ps_store* store);

/* Resolves name@range_or_tag. A missing root yields an unresolvable outcome,
 * not an error status. */
PS_API ps_status ps_resolve(const ps_store* store, const char* name, const char* range_or_tag,
                            const ps_config* config, ps_outcome** out);
PS_API ps_verdict ps_outcome_verdict(const ps_outcome* outcome);
PS_API uint64_t ps_outcome_iterations(const ps_outcome* outcome);
/* include_tree = 0 renders only the verdict payload for clean outcomes. */
PS_API ps_status ps_outcome_render(const ps_outcome* outcome, ps_format format, int include_tree, char** out);
/* Writes the placement log as NDJSON. */
PS_API ps_status ps_outcome_write_log(const ps_outcome* outcome, const char* path);
PS_API void ps_outcome_free(ps_outcome* outcome);

/* Each task is "name@version" or a bare "name" (every version, newest first).
 * With n_tasks == 0 every package in the store is scanned. Results go to
 * out_path as NDJSON, or to standard output when out_path is NULL. */
PS_API ps_status ps_scan(const ps_store* store, const char* const* tasks, size_t n_tasks, unsigned jobs,
                         const ps_config* config, const char* out_path, ps_scan_summary* summary);

/* Usage, yearly and top-dependent statistics as a JSON object. results_path
 * (NDJSON written by ps_scan) may be NULL. Requires a snapshot store. */
PS_API ps_status ps_stats(const ps_store* store, const char* results_path, size_t top_n, char** json_out);

/* kind is "A", "B" or "motivating". Writes the snapshot to out_path and
 * returns a JSON descriptor {root, version, cyclePackage, expected, packages, versions}. */
PS_API ps_status ps_gen_fixture(const char* kind, unsigned intermediates, const char* out_path,
                                ps_snapshot_format format, char** descriptor_json);

PS_API ps_status ps_semver_satisfies(const char* version, const char* range, int* out);

#ifdef __cplusplus
}
#endif

#endif
