#ifndef RABIEST_H
#define RABIEST_H

/* Generated by the rabiest-ffi build script from src/lib.rs; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible function in this interface.
 */
enum RabiestStatus
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  /**
   * The call succeeded and all out-parameters hold results.
   */
  RABIEST_STATUS_OK = 0,
  /**
   * An argument was rejected (non-finite input, out-of-range index,
   * malformed configuration, or a state that fails validation).
   */
  RABIEST_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The requested quantity is undefined at this point: a revival time,
   * a singular information matrix, or vanishing drive amplitudes.
   */
  RABIEST_STATUS_SINGULAR = 2,
  /**
   * An internal computation failed; treat the out-parameters as garbage.
   */
  RABIEST_STATUS_INTERNAL = 3,
  /**
   * A required pointer argument was NULL.
   */
  RABIEST_STATUS_NULL_POINTER = 4,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum RabiestStatus RabiestStatus;
#else
typedef int32_t RabiestStatus;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Quantum information matrix of a three-level drive, produced by
 * [`rabiest_qfim_new`] and released by [`rabiest_qfim_free`].
 */
typedef struct RabiestQfim RabiestQfim;

/**
 * Record of a simulated adaptive estimation run, produced by
 * [`rabiest_adaptive_run`] and released by [`rabiest_trace_free`].
 */
typedef struct RabiestTrace RabiestTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns the library version as a static NUL-terminated string.
 */
const char *rabiest_version(void);

/**
 * Writes the smallest attainable trace of the inverse information matrix
 * for a single probe evolved for `time` at eigenfrequency `omega_plus`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
RabiestStatus rabiest_min_trace_inverse(double omega_plus, double time, double *out);

/**
 * Writes the total-variance bound of the joint scheme that splits `probes`
 * probes over one estimation of both frequencies.
 *
 * # Safety
 * `out` must be valid for writes.
 */
RabiestStatus rabiest_joint_bound(double omega_plus, double time, size_t probes, double *out);

/**
 * Writes the total-variance bound of the scheme that estimates each
 * frequency separately with half of `probes` probes each.
 *
 * # Safety
 * `out` must be valid for writes.
 */
RabiestStatus rabiest_separate_bound(size_t probes, double time, double *out);

/**
 * Writes the total-variance bound of the control-assisted scheme whose
 * control cancels the drive up to `mismatch` in eigenfrequency. The bound
 * is even in `mismatch`, and `mismatch = 0` gives the perfect-control
 * floor `1 / (probes * time^2)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
RabiestStatus rabiest_controlled_bound(size_t probes, double time, double mismatch, double *out);

/**
 * Writes the evolution time at which the joint and separate schemes trade
 * places for eigenfrequency `omega_plus`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
RabiestStatus rabiest_crossover_time(double omega_plus, double *out);

/**
 * Creates the quantum information matrix for drive amplitudes
 * (`omega1`, `omega2`) after evolving a probe for `time`.
 *
 * `probe` selects the probe state: NULL asks for the variance-minimizing
 * probe at these settings, otherwise it must point to 6 doubles holding
 * the real and imaginary parts of the three bare-level amplitudes
 * (re0, im0, re1, im1, re2, im2); the amplitudes are normalized
 * internally. At a revival time the matrix is rank one; the handle is
 * still created and reports itself singular.
 *
 * On success writes a handle to `out`, to be released with
 * [`rabiest_qfim_free`].
 *
 * # Safety
 * `probe` must be NULL or valid for reads of 6 doubles; `out` must be
 * valid for writes.
 */
RabiestStatus rabiest_qfim_new(double omega1,
                               double omega2,
                               double time,
                               const double *probe,
                               struct RabiestQfim **out);

/**
 * Writes entry (`row`, `col`) of the 2x2 information matrix.
 *
 * # Safety
 * `qfim` must be a live handle from [`rabiest_qfim_new`]; `out` must be
 * valid for writes.
 */
RabiestStatus rabiest_qfim_entry(const struct RabiestQfim *qfim,
                                 size_t row,
                                 size_t col,
                                 double *out);

/**
 * Writes the trace of the inverse information matrix, the figure of merit
 * for the joint estimation variance. Fails with
 * `RABIEST_STATUS_SINGULAR` when the matrix is rank deficient (as at a
 * revival time).
 *
 * # Safety
 * `qfim` must be a live handle; `out` must be valid for writes.
 */
RabiestStatus rabiest_qfim_trace_inverse(const struct RabiestQfim *qfim, double *out);

/**
 * Writes the residual that measures how far the optimal measurements for
 * the two frequencies are from being jointly realizable; zero means one
 * measurement saturates both.
 *
 * # Safety
 * `qfim` must be a live handle; `out` must be valid for writes.
 */
RabiestStatus rabiest_qfim_commutation_residual(const struct RabiestQfim *qfim, double *out);

/**
 * Writes 1 if the information matrix is singular (rank one), else 0.
 *
 * # Safety
 * `qfim` must be a live handle; `out` must be valid for writes.
 */
RabiestStatus rabiest_qfim_is_singular(const struct RabiestQfim *qfim, int32_t *out);

/**
 * Releases a handle from [`rabiest_qfim_new`]. Accepts NULL.
 *
 * # Safety
 * `qfim` must be NULL or a live handle, and must not be used afterwards.
 */
void rabiest_qfim_free(struct RabiestQfim *qfim);

/**
 * Simulates the control-chased adaptive estimation of a three-level drive
 * and writes a trace handle to `out`.
 *
 * The simulated truth is (`omega1_true`, `omega2_true`); each of `rounds`
 * rounds applies the control matched to the current estimate, evolves for
 * `time` in `segments` product steps, draws `shots_per_round` measurement
 * outcomes, and re-maximizes the cumulative likelihood started from a
 * `grid_points` x `grid_points` scan of the box
 * [`box_lo`, `box_hi`]^2 that also contains the initial guess
 * (`guess1`, `guess2`). Equal `seed` values give bitwise-equal traces.
 *
 * # Safety
 * `out` must be valid for writes.
 */
RabiestStatus rabiest_adaptive_run(double omega1_true,
                                   double omega2_true,
                                   double time,
                                   size_t rounds,
                                   size_t shots_per_round,
                                   size_t segments,
                                   size_t grid_points,
                                   double box_lo,
                                   double box_hi,
                                   double guess1,
                                   double guess2,
                                   uint64_t seed,
                                   struct RabiestTrace **out);

/**
 * Writes the number of completed rounds recorded in the trace.
 *
 * # Safety
 * `trace` must be a live handle from [`rabiest_adaptive_run`]; `out` must
 * be valid for writes.
 */
RabiestStatus rabiest_trace_rounds(const struct RabiestTrace *trace, size_t *out);

/**
 * Writes the frequency estimate after round `round` (0-based).
 *
 * # Safety
 * `trace` must be a live handle; `out_omega1` and `out_omega2` must be
 * valid for writes.
 */
RabiestStatus rabiest_trace_estimate(const struct RabiestTrace *trace,
                                     size_t round,
                                     double *out_omega1,
                                     double *out_omega2);

/**
 * Writes the running inverse-variance proxy after round `round`
 * (0-based): shots so far divided by the squared estimate error.
 *
 * # Safety
 * `trace` must be a live handle; `out` must be valid for writes.
 */
RabiestStatus rabiest_trace_inverse_variance(const struct RabiestTrace *trace,
                                             size_t round,
                                             double *out);

/**
 * Releases a handle from [`rabiest_adaptive_run`]. Accepts NULL.
 *
 * # Safety
 * `trace` must be NULL or a live handle, and must not be used afterwards.
 */
void rabiest_trace_free(struct RabiestTrace *trace);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RABIEST_H */
