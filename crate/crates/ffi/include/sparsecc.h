#ifndef SPARSECC_H
#define SPARSECC_H

/* Generated by cbindgen from crates/ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result discriminant shared by every ABI function.
 */
typedef enum sparsecc_status {
  SPARSECC_OK = 0,
  SPARSECC_NULL_ARGUMENT = 1,
  SPARSECC_INVALID_ARGUMENT = 2,
  SPARSECC_NUMERICAL = 3,
  SPARSECC_BUFFER_TOO_SMALL = 4,
} sparsecc_status;

/**
 * Opaque encoding design: dimensions, stability index, sampling rate, seed.
 */
typedef struct sparsecc_design sparsecc_design;

/**
 * Opaque sparse nonnegative signal.
 */
typedef struct sparsecc_signal sparsecc_signal;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates an encoding design. On success writes a handle to `out`; release
 * it with [`sparsecc_design_free`].
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one pointer.
 */
enum sparsecc_status sparsecc_design_new(size_t n,
                                         size_t m,
                                         double alpha,
                                         double gamma,
                                         uint64_t master_seed,
                                         struct sparsecc_design **out);

/**
 * Releases a design handle. Passing null is a no-op.
 *
 * # Safety
 * `design` must be null or a pointer returned by [`sparsecc_design_new`]
 * that has not been freed already.
 */
void sparsecc_design_free(struct sparsecc_design *design);

/**
 * Creates a sparse signal from parallel arrays of `len` coordinate indices
 * and strictly positive values. On success writes a handle to `out`;
 * release it with [`sparsecc_signal_free`].
 *
 * # Safety
 * `indices` and `values` must point to `len` readable elements (they may be
 * null only when `len` is zero), and `out` must be valid for one pointer.
 */
enum sparsecc_status sparsecc_signal_new(size_t n,
                                         const size_t *indices,
                                         const double *values,
                                         size_t len,
                                         struct sparsecc_signal **out);

/**
 * Releases a signal handle. Passing null is a no-op.
 *
 * # Safety
 * `signal` must be null or a pointer returned by [`sparsecc_signal_new`]
 * that has not been freed already.
 */
void sparsecc_signal_free(struct sparsecc_signal *signal);

/**
 * Encodes `signal` under `design`, writing the design's `m` measurement
 * values into `out_values`. `out_len` is the capacity of `out_values`;
 * fails with `SPARSECC_BUFFER_TOO_SMALL` when it is less than `m`.
 *
 * # Safety
 * `design` and `signal` must be live handles and `out_values` must point to
 * `out_len` writable doubles.
 */
enum sparsecc_status sparsecc_encode(const struct sparsecc_design *design,
                                     const struct sparsecc_signal *signal,
                                     double *out_values,
                                     size_t out_len);

/**
 * Decodes `len` measurement values under `design`. Writes the design's `n`
 * estimates into `out_values` and coverage flags (1 covered, 0 uncovered)
 * into `out_covered`; both buffers hold `out_len` elements and must fit `n`.
 *
 * # Safety
 * `design` must be a live handle, `values` must point to `len` readable
 * doubles, and `out_values` / `out_covered` must each point to `out_len`
 * writable elements.
 */
enum sparsecc_status sparsecc_decode(const struct sparsecc_design *design,
                                     const double *values,
                                     size_t len,
                                     double *out_values,
                                     uint8_t *out_covered,
                                     size_t out_len);

/**
 * Evaluates the decodability CDF `F_alpha(t)` by Gauss-Legendre quadrature
 * with `nodes` points per axis and writes it to `out`.
 *
 * # Safety
 * `out` must be a valid pointer to one writable double.
 */
enum sparsecc_status sparsecc_cdf_ratio(double alpha, double t, size_t nodes, double *out);

/**
 * Measurement count sufficient in the small-stability regime: writes the
 * integer count `M = ceil(coefficient * ln(n/delta))` and the coefficient.
 *
 * # Safety
 * `out_m` and `out_coefficient` must each be valid pointers to writable
 * storage (either may be null to skip that output).
 */
enum sparsecc_status sparsecc_measurements_alpha0(size_t k,
                                                  size_t n,
                                                  double delta,
                                                  double gamma,
                                                  uint64_t *out_m,
                                                  double *out_coefficient);

/**
 * Returns a static, NUL-terminated description of a status code.
 */
const char *sparsecc_status_describe(enum sparsecc_status status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPARSECC_H */
