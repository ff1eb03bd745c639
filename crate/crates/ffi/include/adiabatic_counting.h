#ifndef ADIABATIC_COUNTING_H
#define ADIABATIC_COUNTING_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AqcStatus {
  AQC_STATUS_OK = 0,
  AQC_STATUS_NULL_POINTER = 1,
  AQC_STATUS_INVALID_ARGUMENT = 2,
  AQC_STATUS_GUARD_EXCEEDED = 3,
  AQC_STATUS_NUMERICAL = 4,
  AQC_STATUS_IO = 5,
  AQC_STATUS_PANIC = 6,
} AqcStatus;

typedef enum AqcMode {
  AQC_MODE_CLOSED_FORM = 0,
  AQC_MODE_INTEGRATE2D = 1,
  AQC_MODE_FULL = 2,
} AqcMode;

/**
 * Opaque database handle.
 */
typedef struct AqcDatabase AqcDatabase;

/**
 * Opaque result of one counting run.
 */
typedef struct AqcRun AqcRun;

/**
 * Overlap of the two control branches after a sweep of duration `t`.
 */
typedef struct AqcOverlap {
  double inner_re;
  double inner_im;
  double mu1;
  double mu2;
  double p_success;
  double arg_phase;
  double leak_magnitude;
} AqcOverlap;

typedef struct AqcCountingOptions {
  uint32_t m;
  enum AqcMode mode;
  uint64_t seed;
  double c_omega;
  double delta;
  double failure_prob;
} AqcCountingOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *aqc_last_error_message(void);

/**
 * # Safety
 * `marked` must point to `len` readable values (or be null when `len` is 0)
 * and `out` must be writable.
 */
enum AqcStatus aqc_database_new(uint32_t n,
                                const uint64_t *marked,
                                size_t len,
                                struct AqcDatabase **out);

/**
 * Parses the `n=..` / `marked=..` instance text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` writable.
 */
enum AqcStatus aqc_database_parse(const char *text, struct AqcDatabase **out);

/**
 * # Safety
 * `db` must come from this library and not be freed twice. Null is ignored.
 */
void aqc_database_free(struct AqcDatabase *db);

/**
 * Marked fraction as a reduced fraction.
 *
 * # Safety
 * `db` must be a live handle; the output pointers must be writable.
 */
enum AqcStatus aqc_database_alpha(const struct AqcDatabase *db, uint64_t *numer, uint64_t *denom);

/**
 * Berry phase of one branch and the relative phase after stage `j`.
 *
 * # Safety
 * The output pointers must be writable.
 */
enum AqcStatus aqc_berry_phase_exact(double alpha, uint32_t j, double *gamma, double *big_gamma);

/**
 * # Safety
 * `out` must be writable.
 */
enum AqcStatus aqc_overlap_report(double alpha, double omega, double t, struct AqcOverlap *out);

/**
 * Defaults for `m` stages in closed-form mode with seed 0.
 */
struct AqcCountingOptions aqc_counting_options_default(uint32_t m);

/**
 * # Safety
 * `db` and `options` must be valid; `out` must be writable. The run is
 * released with [`aqc_run_free`].
 */
enum AqcStatus aqc_run_counting(const struct AqcDatabase *db,
                                const struct AqcCountingOptions *options,
                                struct AqcRun **out);

/**
 * # Safety
 * `run` must come from this library and not be freed twice. Null is ignored.
 */
void aqc_run_free(struct AqcRun *run);

/**
 * Estimate as a reduced fraction.
 *
 * # Safety
 * `run` must be live; the output pointers writable.
 */
enum AqcStatus aqc_run_alpha_hat(const struct AqcRun *run, uint64_t *numer, uint64_t *denom);

/**
 * Number of stages, or 0 for a null handle.
 *
 * # Safety
 * `run` must be live or null.
 */
size_t aqc_run_stage_count(const struct AqcRun *run);

/**
 * Total evolution time charged to the run.
 *
 * # Safety
 * `run` must be live; `total` writable.
 */
enum AqcStatus aqc_run_total_cost(const struct AqcRun *run, double *total);

/**
 * The run report as a JSON string owned by the caller; release it with
 * [`aqc_string_free`]. Returns null for a null handle.
 *
 * # Safety
 * `run` must be live or null.
 */
char *aqc_run_to_json(const struct AqcRun *run);

/**
 * # Safety
 * `s` must come from this library and not be freed twice. Null is ignored.
 */
void aqc_string_free(char *s);

/**
 * Fitted exponent of total evolution time against `1/epsilon` over
 * `m_lo..=m_hi`.
 *
 * # Safety
 * `slope` must be writable.
 */
enum AqcStatus aqc_scaling_slope(uint32_t m_lo, uint32_t m_hi, double c_omega, double *slope);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ADIABATIC_COUNTING_H */
