#ifndef COUPLING_SCATTER_H
#define COUPLING_SCATTER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum CsStatus {
  CS_STATUS_OK = 0,
  CS_STATUS_NULL_POINTER = 1,
  /**
   * Bad config, argument or problem.
   */
  CS_STATUS_INVALID_INPUT = 2,
  /**
   * `b` vanishes identically.
   */
  CS_STATUS_DEGENERATE = 3,
  /**
   * Integration, contour or search failure.
   */
  CS_STATUS_SOLVER_FAILURE = 4,
  CS_STATUS_PANIC = 5,
} CsStatus;

/**
 * Opaque problem handle.
 */
typedef struct CsProblem CsProblem;

typedef struct CsComplex {
  double re;
  double im;
} CsComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a JSON config (the `problem` block is required, `command` is ignored).
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum CsStatus cs_problem_from_json(const char *json, struct CsProblem **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `p` must come from `cs_problem_from_json` and not be used afterwards.
 */
void cs_problem_free(struct CsProblem *p);

/**
 * `a(λ)`, `b(λ)` and an absolute error estimate. Any output pointer may be null.
 *
 * # Safety
 * `p` must be a live handle; non-null outputs must be writable.
 */
enum CsStatus cs_coefficients(const struct CsProblem *p,
                              struct CsComplex lambda,
                              struct CsComplex *a,
                              struct CsComplex *b,
                              double *err);

/**
 * Transfer matrix from `0-` to `1+` in row-major order.
 *
 * # Safety
 * `p` must be a live handle and `out` must point to 4 writable `CsComplex`.
 */
enum CsStatus cs_transfer_matrix(const struct CsProblem *p,
                                 struct CsComplex lambda,
                                 struct CsComplex *out);

/**
 * Reflection probability `|β/α|²` and flux defect at real `λ`.
 *
 * # Safety
 * `p` must be a live handle; non-null outputs must be writable.
 */
enum CsStatus cs_reflection(const struct CsProblem *p,
                            double lambda,
                            double *reflection_out,
                            double *flux_defect);

/**
 * Zeros of `b` in `|λ| ≤ r` with multiplicity; `nodes = 0` picks a default.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum CsStatus cs_disk_zero_count(const struct CsProblem *p, double r, size_t nodes, size_t *out);

/**
 * Negative eigenvalues of `-u'' + (Q + λV) u` with the boundary conditions of `u0`.
 *
 * # Safety
 * `p` must be a live handle; `count` writable; `zero_is_eigenvalue` may be null.
 */
enum CsStatus cs_negative_eigenvalue_count(const struct CsProblem *p,
                                           double lambda,
                                           size_t *count,
                                           bool *zero_is_eigenvalue);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length plus one, so a call
 * with `len = 0` sizes the buffer.
 *
 * # Safety
 * `buf` must have room for `len` bytes, or be null with `len = 0`.
 */
size_t cs_last_error_message(char *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COUPLING_SCATTER_H */
