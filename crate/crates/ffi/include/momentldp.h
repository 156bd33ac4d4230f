#ifndef MOMENTLDP_H
#define MOMENTLDP_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every API call.
 */
typedef enum MldpStatus {
  MLDP_STATUS_OK = 0,
  MLDP_STATUS_NULL_POINTER = 1,
  MLDP_STATUS_INVALID_UTF8 = 2,
  MLDP_STATUS_INVALID_CONFIG = 3,
  MLDP_STATUS_COMPUTE_FAILED = 4,
  MLDP_STATUS_BUFFER_TOO_SMALL = 5,
  MLDP_STATUS_PANIC = 6,
} MldpStatus;

/**
 * Certificate attached to a rate value.
 */
typedef enum MldpCertificate {
  /**
   * Gradient converged below tolerance; the value is a finite supremum.
   */
  MLDP_CERTIFICATE_CONVERGED = 0,
  /**
   * The point is certifiably outside the weight polytope; the rate is +inf.
   */
  MLDP_CERTIFICATE_DIVERGED = 1,
  /**
   * Evaluated by an exact closed form.
   */
  MLDP_CERTIFICATE_CLOSED_FORM = 2,
} MldpCertificate;

/**
 * Opaque handle wrapping a parsed run configuration.
 */
typedef struct MldpRun MldpRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the message for the most recent error on this thread into `buf`
 * (NUL-terminated, truncated to `cap` bytes). Returns the full message
 * length in bytes, excluding the terminator.
 *
 * # Safety
 * `buf` must point to `cap` writable bytes, or be NULL (query mode).
 */
uintptr_t mldp_last_error(char *buf, uintptr_t cap);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mldp_version(void);

/**
 * Parse a JSON run configuration into a new handle. Returns NULL on error
 * (see `mldp_last_error`).
 *
 * # Safety
 * `json` must be a NUL-terminated string.
 */
struct MldpRun *mldp_run_new(const char *json);

/**
 * Free a handle returned by `mldp_run_new`. NULL is a no-op.
 *
 * # Safety
 * `run` must be NULL or a pointer obtained from `mldp_run_new` that has not
 * been freed yet.
 */
void mldp_run_free(struct MldpRun *run);

/**
 * Evaluate the configured rate function.
 *
 * `method` is one of "numeric", "an", "keyl", "cramer", "mixed",
 * "contracted", "bipartite". `out_value` receives the rate (may be +inf) and
 * `out_certificate` the certificate kind; either may be NULL to skip.
 *
 * # Safety
 * `run` must be a live handle; `method` a NUL-terminated string; the out
 * pointers NULL or valid for writes.
 */
enum MldpStatus mldp_rate(const struct MldpRun *run,
                          const char *method,
                          double *out_value,
                          enum MldpCertificate *out_certificate);

/**
 * Chamber coordinates of the moment-map value J(rho) of the configured state.
 *
 * Writes up to `cap` coordinates into `out`; `out_len` receives the full
 * coordinate count. Returns `BufferTooSmall` when `cap` is insufficient
 * (after filling `out_len`).
 *
 * # Safety
 * `run` must be a live handle; `out` must point to `cap` writable doubles;
 * `out_len` must be NULL or valid for writes.
 */
enum MldpStatus mldp_moment_map_chamber(const struct MldpRun *run,
                                        double *out,
                                        uintptr_t cap,
                                        uintptr_t *out_len);

/**
 * Outcome mass of a region under the m-copy covariant measurement.
 *
 * `region` uses the CLI grammar (`halfspace:...`, `chamberball:...`,
 * `ball:<radius>` around J(rho), `complement:` prefix). When the region is
 * decidable from block data the mass is summed exactly and the interval
 * collapses; otherwise `n_samples` Monte Carlo draws produce a Wilson 95%
 * interval. `out_exact` reports which path ran (1 exact, 0 sampled).
 *
 * # Safety
 * `run` must be a live handle; `region` a NUL-terminated string; the out
 * pointers NULL or valid for writes.
 */
enum MldpStatus mldp_region_mass(const struct MldpRun *run,
                                 uintptr_t m,
                                 const char *region,
                                 uintptr_t n_samples,
                                 double *out_mass,
                                 double *out_ci_lo,
                                 double *out_ci_hi,
                                 int32_t *out_exact);

/**
 * Infimum of the rate function over a region (the decay exponent of the
 * region's outcome mass). Supports chamber-decidable regions and dual-space
 * balls containing J(rho).
 *
 * # Safety
 * Same contracts as `mldp_region_mass`.
 */
enum MldpStatus mldp_region_inf_rate(const struct MldpRun *run,
                                     const char *region,
                                     double *out_inf_rate);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOMENTLDP_H */
