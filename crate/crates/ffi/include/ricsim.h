#ifndef RICSIM_H
#define RICSIM_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RicsimStatus {
  RICSIM_STATUS_OK = 0,
  RICSIM_STATUS_NULL_ARGUMENT = 1,
  RICSIM_STATUS_INVALID_UTF8 = 2,
  RICSIM_STATUS_CONFIG = 3,
  RICSIM_STATUS_MODEL = 4,
  RICSIM_STATUS_CODEC = 5,
  RICSIM_STATUS_STATS = 6,
  RICSIM_STATUS_UNKNOWN_METRIC = 7,
  RICSIM_STATUS_PANIC = 8,
} RicsimStatus;

/**
 * A trained recurrent forecaster.
 */
typedef struct RicsimModel RicsimModel;

/**
 * A finished simulation run.
 */
typedef struct RicsimRun RicsimRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or an empty string.
 * The pointer stays valid until the next call on the same thread.
 */
const char *ricsim_last_error(void);

/**
 * Runs a scenario given as JSON. `mode` is `default`, `oracle`, `lstm`
 * or `gru`; `model` may be null unless the mode needs one.
 *
 * # Safety
 * `scenario_json` and `mode` must be NUL-terminated strings, `model` null
 * or a live model handle, and `out` a valid pointer.
 */
enum RicsimStatus ricsim_run_scenario(const char *scenario_json,
                                      const char *mode,
                                      const struct RicsimModel *model,
                                      struct RicsimRun **out);

/**
 * Reads one aggregate by name, e.g. `mean_delay_ms` or `freeze_count`.
 *
 * # Safety
 * `run` must be a live run handle, `name` a NUL-terminated string and
 * `out` a valid pointer.
 */
enum RicsimStatus ricsim_run_metric(const struct RicsimRun *run, const char *name, double *out);

/**
 * Aggregates of the run as JSON. Owned by the run handle.
 *
 * # Safety
 * `run` must be null or a live run handle.
 */
const char *ricsim_run_aggregates_json(const struct RicsimRun *run);

/**
 * Number of executed handovers, 0 for a null handle.
 *
 * # Safety
 * `run` must be null or a live run handle.
 */
uint64_t ricsim_run_handover_count(const struct RicsimRun *run);

/**
 * # Safety
 * `run` must be null or a handle from `ricsim_run_scenario` not yet freed.
 */
void ricsim_run_free(struct RicsimRun *run);

/**
 * Loads a model file written by `ricsim train`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RicsimStatus ricsim_model_load(const char *path, struct RicsimModel **out);

/**
 * Samples of history the model expects, 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live model handle.
 */
size_t ricsim_model_lookback(const struct RicsimModel *model);

/**
 * One-step RSRP forecast (dBm) from the last `lookback` samples (dBm).
 *
 * # Safety
 * `model` must be a live model handle, `window` point to `len` doubles
 * and `out` be a valid pointer.
 */
enum RicsimStatus ricsim_model_predict(const struct RicsimModel *model,
                                       const double *window,
                                       size_t len,
                                       double *out);

/**
 * # Safety
 * `model` must be null or a handle from `ricsim_model_load` not yet freed.
 */
void ricsim_model_free(struct RicsimModel *model);

/**
 * Encodes an E2 message given as JSON into its wire bytes. Release the
 * buffer with `ricsim_bytes_free`.
 *
 * # Safety
 * `message_json` must be a NUL-terminated string; `out_bytes` and
 * `out_len` valid pointers.
 */
enum RicsimStatus ricsim_e2_encode(const char *message_json, uint8_t **out_bytes, size_t *out_len);

/**
 * Decodes wire bytes into the JSON form of the message. Release the
 * string with `ricsim_string_free`.
 *
 * # Safety
 * `bytes` must point to `len` bytes and `out_json` be a valid pointer.
 */
enum RicsimStatus ricsim_e2_decode(const uint8_t *bytes, size_t len, char **out_json);

/**
 * # Safety
 * `bytes` and `len` must come from one `ricsim_e2_encode` call.
 */
void ricsim_bytes_free(uint8_t *bytes, size_t len);

/**
 * # Safety
 * `s` must be null or a string returned by this library as owned.
 */
void ricsim_string_free(char *s);

/**
 * Two-group one-way ANOVA.
 *
 * # Safety
 * `a` and `b` must point to `a_len` and `b_len` doubles; `out_f` and
 * `out_p` must be valid pointers.
 */
enum RicsimStatus ricsim_anova(const double *a,
                               size_t a_len,
                               const double *b,
                               size_t b_len,
                               double *out_f,
                               double *out_p);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RICSIM_H */
