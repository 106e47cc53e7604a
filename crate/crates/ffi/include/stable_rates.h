#ifndef STABLE_RATES_H
#define STABLE_RATES_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of the C interface.
 */
typedef enum SrStatus {
  SR_STATUS_OK = 0,
  SR_STATUS_NULL_POINTER = 1,
  SR_STATUS_INVALID_PARAMETER = 2,
  SR_STATUS_HYPOTHESIS_VIOLATED = 3,
  SR_STATUS_OUT_OF_DOMAIN = 4,
  SR_STATUS_CONTRACT_VIOLATED = 5,
  SR_STATUS_BUDGET_EXCEEDED = 6,
  SR_STATUS_GENERATION_FAILED = 7,
  SR_STATUS_ACCURACY_NOT_REACHED = 8,
  SR_STATUS_INVALID_CONFIG = 9,
  SR_STATUS_IO = 10,
  SR_STATUS_BUFFER_TOO_SMALL = 11,
  SR_STATUS_INVALID_UTF8 = 12,
  SR_STATUS_PANIC = 13,
} SrStatus;

/**
 * Which table of a run report to export.
 */
typedef enum SrTable {
  SR_TABLE_DISTANCES = 0,
  SR_TABLE_BOUNDS = 1,
  SR_TABLE_RATES = 2,
} SrTable;

/**
 * Opaque fBm sampler on a uniform grid of `[0, 1]`.
 */
typedef struct SrFbmSampler SrFbmSampler;

/**
 * Opaque result of an experiment run.
 */
typedef struct SrReport SrReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sr_version(void);

/**
 * Copies the message of the last failed call on this thread into `buf`.
 *
 * # Safety
 * `buf` must point to `len` writable bytes or be null; `required` must be
 * null or writable.
 */
enum SrStatus sr_last_error_message(char *buf, size_t len, size_t *required);

/**
 * `c_H = sqrt(H Gamma(2H))`, defined for `H >= 1/2`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SrStatus sr_c_h(double hurst, double *out);

/**
 * `sigma_H = 2 sum_p rho_H(p)^2` to absolute tolerance `tol`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SrStatus sr_sigma_h(double hurst, double tol, double *out);

/**
 * Correlation of unit-lag fBm increments at lag `p`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SrStatus sr_rho_h(int64_t p, double hurst, double *out);

/**
 * Characteristic function of the stable limit at `(lambda, mu)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SrStatus sr_stable_cf_limit(double lambda, double mu, double hurst, double *out);

/**
 * Empirical Wasserstein-1 distance between two samples.
 *
 * # Safety
 * `xs` and `ys` must point to `nx` and `ny` readable doubles; `out` must be writable.
 */
enum SrStatus sr_wasserstein1(const double *xs,
                              size_t nx,
                              const double *ys,
                              size_t ny,
                              double *out);

/**
 * Two-sample Kolmogorov distance.
 *
 * # Safety
 * Same as [`sr_wasserstein1`].
 */
enum SrStatus sr_kolmogorov(const double *xs, size_t nx, const double *ys, size_t ny, double *out);

/**
 * Creates a sampler for fBm on the grid `{k/n : k = 0..n}`.
 *
 * # Safety
 * `out` must be writable; the handle it receives is owned by the caller.
 */
enum SrStatus sr_fbm_sampler_new(size_t n, double hurst, struct SrFbmSampler **out);

/**
 * Number of grid points (`n + 1`) of a sampler.
 *
 * # Safety
 * `sampler` must be a live handle or null (which yields 0).
 */
size_t sr_fbm_sampler_len(const struct SrFbmSampler *sampler);

/**
 * Writes path `replica` of stream `seed` into `values` (`len` must equal
 * [`sr_fbm_sampler_len`]). Identical arguments always give identical paths.
 *
 * # Safety
 * `sampler` must be a live handle and `values` must point to `len` writable doubles.
 */
enum SrStatus sr_fbm_sampler_sample(const struct SrFbmSampler *sampler,
                                    uint64_t seed,
                                    uint64_t replica,
                                    double *values,
                                    size_t len);

/**
 * Releases a sampler. Null is ignored.
 *
 * # Safety
 * `sampler` must come from [`sr_fbm_sampler_new`] and not be used afterwards.
 */
void sr_fbm_sampler_free(struct SrFbmSampler *sampler);

/**
 * Runs an experiment described by a JSON configuration (same keys as the
 * command-line config file; `experiment` is required).
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `out` must be writable.
 */
enum SrStatus sr_run_experiment(const char *config_json, struct SrReport **out);

/**
 * Copies one CSV table of `report` into `buf` (NUL-terminated). Call with a
 * null `buf` to learn the size through `required`.
 *
 * # Safety
 * `report` must be a live handle; `buf` must point to `len` writable bytes
 * or be null; `required` must be null or writable.
 */
enum SrStatus sr_report_csv(const struct SrReport *report,
                            enum SrTable table,
                            char *buf,
                            size_t len,
                            size_t *required);

/**
 * 1 if every check in the report passed, 0 otherwise or for a null handle.
 *
 * # Safety
 * `report` must be a live handle or null.
 */
int32_t sr_report_all_pass(const struct SrReport *report);

/**
 * 1 if the run stopped early on its time budget.
 *
 * # Safety
 * `report` must be a live handle or null.
 */
int32_t sr_report_truncated(const struct SrReport *report);

/**
 * Releases a report. Null is ignored.
 *
 * # Safety
 * `report` must come from [`sr_run_experiment`] and not be used afterwards.
 */
void sr_report_free(struct SrReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STABLE_RATES_H */
