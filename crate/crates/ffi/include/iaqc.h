#ifndef IAQC_H
#define IAQC_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum {
  IAQC_STATUS_OK = 0,
  IAQC_STATUS_NULL_POINTER = 1,
  IAQC_STATUS_INVALID_PARAMETER = 2,
  IAQC_STATUS_PARSE = 3,
  IAQC_STATUS_PANIC = 4,
} IaqcStatus;

/**
 * Opaque experiment configuration: session settings plus the round template.
 */
typedef struct IaqcConfig IaqcConfig;

/**
 * Session statistics. Eve's rates are NaN when no round had an active Eve.
 */
typedef struct {
  uint64_t rounds;
  double detection_rate;
  double intensity_alarm_rate;
  double alignment_alarm_rate;
  double bit_error_rate_undetected;
  double undetermined_rate;
  double eve_accuracy;
  double eve_reconstruction_rate;
  double mean_final_intensity;
  /**
   * 95% halfwidth of `detection_rate`.
   */
  double detection_rate_halfwidth;
} IaqcStats;

typedef struct {
  uint64_t eve_photons;
  uint64_t safe_source_intensity;
} IaqcBudget;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL after a success.
 * The pointer stays valid until the next call into this library on the
 * same thread.
 */
const char *iaqc_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *iaqc_version(void);

/**
 * A new configuration with default settings. Free with [`iaqc_config_free`].
 */
IaqcConfig *iaqc_config_default(void);

/**
 * Parses a TOML configuration (`[session]` and `[round]` sections).
 *
 * # Safety
 * `toml` must be NULL or a NUL-terminated string; `out` must be NULL or
 * writable.
 */
IaqcStatus iaqc_config_from_toml(const char *toml, IaqcConfig **out);

/**
 * Applies one `key=value` override, e.g. `round.tap_fraction=0.05`. The
 * configuration is left unchanged on failure.
 *
 * # Safety
 * `cfg` must come from this library; `assignment` must be NULL or a
 * NUL-terminated string.
 */
IaqcStatus iaqc_config_set(IaqcConfig *cfg, const char *assignment);

/**
 * Serializes the configuration to TOML. Free the string with
 * [`iaqc_string_free`].
 *
 * # Safety
 * `cfg` must come from this library; `out` must be NULL or writable.
 */
IaqcStatus iaqc_config_to_toml(const IaqcConfig *cfg, char **out);

/**
 * # Safety
 * `cfg` must be NULL or come from this library, and not be used afterwards.
 */
void iaqc_config_free(IaqcConfig *cfg);

/**
 * Runs a full session with master `seed`.
 *
 * # Safety
 * `cfg` must come from this library; `out` must be NULL or writable.
 */
IaqcStatus iaqc_run_session(const IaqcConfig *cfg, uint64_t seed, IaqcStats *out);

/**
 * Monte Carlo detection probability of the configured round over `trials`
 * seeded trials (at least 100), with its 95% halfwidth.
 *
 * # Safety
 * `cfg` must come from this library; the out-pointers must be NULL or
 * writable.
 */
IaqcStatus iaqc_detection_probability(const IaqcConfig *cfg,
                                      uint64_t trials,
                                      uint64_t seed,
                                      double *out_estimate,
                                      double *out_halfwidth);

/**
 * # Safety
 * `out` must be NULL or writable.
 */
IaqcStatus iaqc_min_photons_info_bound(uint64_t s, uint64_t *out);

/**
 * # Safety
 * `out` must be NULL or writable.
 */
IaqcStatus iaqc_detector_bank_budget(uint64_t s, IaqcBudget *out);

/**
 * # Safety
 * `out` must be NULL or writable.
 */
IaqcStatus iaqc_siphon_budget(uint64_t m, IaqcBudget *out);

/**
 * Renders the six-photon ledger for `seed`. Free the string with
 * [`iaqc_string_free`].
 *
 * # Safety
 * `out` must be NULL or writable.
 */
IaqcStatus iaqc_table1(uint64_t seed, bool no_eve, char **out);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void iaqc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IAQC_H */
