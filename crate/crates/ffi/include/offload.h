#ifndef OFFLOAD_H
#define OFFLOAD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OffloadPolicy {
  OFFLOAD_POLICY_MINIMUM = 0,
  OFFLOAD_POLICY_DETERMINISTIC = 1,
  OFFLOAD_POLICY_RANDOM = 2,
} OffloadPolicy;

typedef enum OffloadStatus {
  OFFLOAD_STATUS_OK = 0,
  OFFLOAD_STATUS_NULL_POINTER = 1,
  OFFLOAD_STATUS_INVALID_UTF8 = 2,
  OFFLOAD_STATUS_CONFIG = 3,
  OFFLOAD_STATUS_ARGUMENT = 4,
  OFFLOAD_STATUS_IO = 5,
  OFFLOAD_STATUS_OUT_OF_RANGE = 6,
  OFFLOAD_STATUS_PANIC = 7,
} OffloadStatus;

/**
 * Opaque experiment configuration.
 */
typedef struct OffloadConfig OffloadConfig;

/**
 * Opaque result of one episode.
 */
typedef struct OffloadEpisode OffloadEpisode;

/**
 * Episode-level metrics.
 */
typedef struct OffloadMetrics {
  double satisfaction_ratio;
  double jfi;
  double comm_util_mean;
  double comm_util_std;
  double comp_util_mean;
  double comp_util_std;
  double local_ratio;
  double objective;
  size_t task_count;
} OffloadMetrics;

/**
 * Outcome of a single task. `total_s` is infinite for an unserved task.
 */
typedef struct OffloadTask {
  size_t subnet;
  size_t source_unit;
  size_t unit;
  double total_s;
  double deadline_s;
  bool satisfied;
} OffloadTask;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *offload_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *offload_version(void);

/**
 * Default configuration.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum OffloadStatus offload_config_default(struct OffloadConfig **out);

/**
 * Parses and validates a JSON configuration.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum OffloadStatus offload_config_from_json(const char *json, struct OffloadConfig **out);

/**
 * # Safety
 * `config` must come from this library and not be used afterwards. Null is ignored.
 */
void offload_config_free(struct OffloadConfig *config);

/**
 * Runs one episode of `policy` on the configured scenario.
 *
 * # Safety
 * `config` must be a live handle and `out` a valid pointer.
 */
enum OffloadStatus offload_run_episode(const struct OffloadConfig *config,
                                       enum OffloadPolicy policy,
                                       uint64_t seed,
                                       struct OffloadEpisode **out);

/**
 * # Safety
 * `episode` must be a live handle and `out` a valid pointer.
 */
enum OffloadStatus offload_episode_metrics(const struct OffloadEpisode *episode,
                                           struct OffloadMetrics *out);

/**
 * Outcome of task `index` of an episode.
 *
 * # Safety
 * `episode` must be a live handle and `out` a valid pointer.
 */
enum OffloadStatus offload_episode_task(const struct OffloadEpisode *episode,
                                        size_t index,
                                        struct OffloadTask *out);

/**
 * # Safety
 * `episode` must come from this library and not be used afterwards. Null is ignored.
 */
void offload_episode_free(struct OffloadEpisode *episode);

/**
 * Runs the configured sweep and writes the CSV to `path`.
 *
 * # Safety
 * `config` must be a live handle and `path` a NUL-terminated string.
 */
enum OffloadStatus offload_run_sweep(const struct OffloadConfig *config,
                                     const char *path,
                                     size_t *rows);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OFFLOAD_H */
