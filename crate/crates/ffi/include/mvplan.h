#ifndef MVPLAN_H
#define MVPLAN_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum MvStatus {
  MV_STATUS_OK = 0,
  MV_STATUS_NULL_ARGUMENT = 1,
  MV_STATUS_INVALID_UTF8 = 2,
  MV_STATUS_IO = 3,
  MV_STATUS_INVALID_INPUT = 4,
  MV_STATUS_INVALID_CONFIG = 5,
  MV_STATUS_INTERNAL = 6,
  MV_STATUS_PANIC = 7,
} MvStatus;

/**
 * Execution mode of a simulation.
 */
typedef enum MvMode {
  MV_MODE_FULL = 0,
  MV_MODE_DECISION_ONLY = 1,
} MvMode;

/**
 * Engine configuration.
 */
typedef struct MvConfig MvConfig;

/**
 * The log of one finished simulation run.
 */
typedef struct MvLog MvLog;

/**
 * A parsed scenario.
 */
typedef struct MvScenario MvScenario;

/**
 * A set of named trajectory-cost weight vectors.
 */
typedef struct MvWeights MvWeights;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *mv_last_error(void);

/**
 * Releases a string returned by the library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void mv_string_free(char *s);

/**
 * Parses a scenario from TOML text.
 *
 * # Safety
 * `toml` must be a nul-terminated string; `out` must be writable.
 */
enum MvStatus mv_scenario_from_toml(const char *toml, struct MvScenario **out);

/**
 * Loads a scenario file.
 *
 * # Safety
 * `path` must be a nul-terminated string; `out` must be writable.
 */
enum MvStatus mv_scenario_load(const char *path, struct MvScenario **out);

/**
 * Number of vehicles in the scenario.
 *
 * # Safety
 * `sc` must be a live scenario handle; `out` must be writable.
 */
enum MvStatus mv_scenario_vehicle_count(const struct MvScenario *sc, size_t *out);

/**
 * # Safety
 * `sc` must be null or a live scenario handle.
 */
void mv_scenario_free(struct MvScenario *sc);

/**
 * The built-in aggressive, normal and conservative weight vectors.
 *
 * # Safety
 * `out` must be writable.
 */
enum MvStatus mv_weights_default(struct MvWeights **out);

/**
 * Parses a weight set from TOML text.
 *
 * # Safety
 * `toml` must be a nul-terminated string; `out` must be writable.
 */
enum MvStatus mv_weights_from_toml(const char *toml, struct MvWeights **out);

/**
 * # Safety
 * `w` must be null or a live weights handle.
 */
void mv_weights_free(struct MvWeights *w);

/**
 * The default engine configuration.
 *
 * # Safety
 * `out` must be writable.
 */
enum MvStatus mv_config_default(struct MvConfig **out);

/**
 * Parses an engine configuration from TOML text; omitted keys keep their defaults.
 *
 * # Safety
 * `toml` must be a nul-terminated string; `out` must be writable.
 */
enum MvStatus mv_config_from_toml(const char *toml, struct MvConfig **out);

/**
 * # Safety
 * `cfg` must be a live config handle.
 */
enum MvStatus mv_config_set_seed(struct MvConfig *cfg, uint64_t seed);

/**
 * # Safety
 * `cfg` must be a live config handle.
 */
enum MvStatus mv_config_set_mode(struct MvConfig *cfg, enum MvMode mode);

/**
 * Sets the maximum simulated time in seconds.
 *
 * # Safety
 * `cfg` must be a live config handle.
 */
enum MvStatus mv_config_set_max_duration(struct MvConfig *cfg, double seconds);

/**
 * # Safety
 * `cfg` must be null or a live config handle.
 */
void mv_config_free(struct MvConfig *cfg);

/**
 * Runs one closed-loop simulation. Null `weights` or `cfg` select the defaults.
 *
 * # Safety
 * Non-null handles must be live; `out` must be writable.
 */
enum MvStatus mv_simulate(const struct MvScenario *sc,
                          const struct MvWeights *weights,
                          const struct MvConfig *cfg,
                          struct MvLog **out);

/**
 * Runs one search at the scenario's initial state and returns the decision as JSON.
 *
 * # Safety
 * Non-null handles must be live; `out` must be writable.
 */
enum MvStatus mv_decide_json(const struct MvScenario *sc,
                             const struct MvWeights *weights,
                             const struct MvConfig *cfg,
                             char **out);

/**
 * Number of recorded ticks.
 *
 * # Safety
 * `log` must be a live log handle; `out` must be writable.
 */
enum MvStatus mv_log_tick_count(const struct MvLog *log, size_t *out);

/**
 * Whether the run ended in a collision.
 *
 * # Safety
 * `log` must be a live log handle; `out` must be writable.
 */
enum MvStatus mv_log_collision(const struct MvLog *log, bool *out);

/**
 * Simulated duration in seconds.
 *
 * # Safety
 * `log` must be a live log handle; `out` must be writable.
 */
enum MvStatus mv_log_duration(const struct MvLog *log, double *out);

/**
 * Full log as JSON.
 *
 * # Safety
 * `log` must be a live log handle; `out` must be writable.
 */
enum MvStatus mv_log_to_json(const struct MvLog *log, char **out);

/**
 * Run metrics as JSON.
 *
 * # Safety
 * `log` must be a live log handle; `out` must be writable.
 */
enum MvStatus mv_log_metrics_json(const struct MvLog *log, char **out);

/**
 * Writes the per-tick state table as CSV.
 *
 * # Safety
 * `log` must be a live log handle; `path` must be a nul-terminated string.
 */
enum MvStatus mv_log_write_csv(const struct MvLog *log, const char *path);

/**
 * # Safety
 * `log` must be null or a live log handle.
 */
void mv_log_free(struct MvLog *log);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MVPLAN_H */
