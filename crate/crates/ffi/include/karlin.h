#ifndef KARLIN_H
#define KARLIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Number of processes written per replica by [`karlin_simulate`], in the
 * order Z*, U*, Z, U, Z1, Z2, U1, U2.
 */
#define KARLIN_NUM_PROCESSES 8

/**
 * Result codes.
 */
typedef enum KarlinStatus {
  KARLIN_STATUS_OK = 0,
  KARLIN_STATUS_NULL_POINTER = 1,
  KARLIN_STATUS_DOMAIN = 2,
  KARLIN_STATUS_NOT_PSD = 3,
  KARLIN_STATUS_NUMERICAL = 4,
  KARLIN_STATUS_OVERFLOW = 5,
  KARLIN_STATUS_INVALID_ARGUMENT = 6,
  KARLIN_STATUS_PANIC = 99,
} KarlinStatus;

/**
 * Kernel families accepted by [`karlin_kernel_eval`] and [`karlin_cov_matrix_new`].
 */
typedef enum KarlinKernelFamily {
  KARLIN_KERNEL_FAMILY_LIMIT_Z1 = 0,
  KARLIN_KERNEL_FAMILY_LIMIT_Z2 = 1,
  KARLIN_KERNEL_FAMILY_LIMIT_Z = 2,
  KARLIN_KERNEL_FAMILY_LIMIT_U1 = 3,
  KARLIN_KERNEL_FAMILY_LIMIT_U2 = 4,
  KARLIN_KERNEL_FAMILY_LIMIT_U = 5,
  KARLIN_KERNEL_FAMILY_FBM = 6,
  KARLIN_KERNEL_FAMILY_BIFBM = 7,
  KARLIN_KERNEL_FAMILY_TIME_CHANGED_BM = 8,
} KarlinKernelFamily;

/**
 * Poissonized components for [`karlin_exact_cov`].
 */
typedef enum KarlinComponent {
  KARLIN_COMPONENT_Z1 = 0,
  KARLIN_COMPONENT_Z2 = 1,
  KARLIN_COMPONENT_U1 = 2,
  KARLIN_COMPONENT_U2 = 3,
} KarlinComponent;

typedef enum KarlinUrnMode {
  KARLIN_URN_MODE_DISCRETE = 0,
  KARLIN_URN_MODE_POISSONIZED = 1,
} KarlinUrnMode;

typedef enum KarlinSignMode {
  KARLIN_SIGN_MODE_RANDOM = 0,
  KARLIN_SIGN_MODE_ALL_ONES = 1,
} KarlinSignMode;

/**
 * Covariance matrix handle, optionally factored.
 */
typedef struct KarlinCovMatrix KarlinCovMatrix;

/**
 * Weight sequence handle.
 */
typedef struct KarlinWeights KarlinWeights;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *karlin_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *karlin_version(void);

/**
 * Create the weight sequence `p_k = k^{-1/alpha} / zeta(1/alpha)`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum KarlinStatus karlin_weights_new(double alpha, double tail_tol, struct KarlinWeights **out);

/**
 * Release a weight handle. Null is ignored.
 *
 * # Safety
 * `w` must be null or a handle from [`karlin_weights_new`] not yet freed.
 */
void karlin_weights_free(struct KarlinWeights *w);

/**
 * `p_k` for `k >= 1`.
 *
 * # Safety
 * `w` must be a live weight handle and `out` writable.
 */
enum KarlinStatus karlin_weights_p(const struct KarlinWeights *w, uint64_t k, double *out);

/**
 * `nu(t) = #{k : p_k >= 1/t}`.
 *
 * # Safety
 * `w` must be a live weight handle and `out` writable.
 */
enum KarlinStatus karlin_weights_nu(const struct KarlinWeights *w, double t, uint64_t *out);

/**
 * `V(t) = sum_k (1 - exp(-p_k t))`.
 *
 * # Safety
 * `w` must be a live weight handle and `out` writable.
 */
enum KarlinStatus karlin_weights_big_v(const struct KarlinWeights *w, double t, double *out);

/**
 * Normalization `sigma_n^2 = nu(n)`.
 *
 * # Safety
 * `w` must be a live weight handle and `out` writable.
 */
enum KarlinStatus karlin_weights_sigma2(const struct KarlinWeights *w, double n, double *out);

/**
 * `Gamma(1 - alpha)` for `alpha` in (0,1).
 *
 * # Safety
 * `out` must be writable.
 */
enum KarlinStatus karlin_gamma_one_minus_alpha(double alpha, double *out);

/**
 * Evaluate a covariance kernel at `(s, t)`. Unused parameters are ignored:
 * limit kernels read `alpha`, fBm reads `hurst`, bifractional reads `hurst` and `k`.
 *
 * # Safety
 * `out` must be writable.
 */
enum KarlinStatus karlin_kernel_eval(enum KarlinKernelFamily family,
                                     double alpha,
                                     double hurst,
                                     double k,
                                     double s,
                                     double t,
                                     double *out);

/**
 * Exact covariance of a Poissonized component at rate `n`, unnormalized.
 *
 * # Safety
 * `w` must be a live weight handle and `out` writable.
 */
enum KarlinStatus karlin_exact_cov(const struct KarlinWeights *w,
                                   enum KarlinComponent component,
                                   double n,
                                   double s,
                                   double t,
                                   double *out);

/**
 * Simulate `replicas` independent replicas on the grid `times[0..len]`
 * (starting at 0, strictly increasing, at most 1).
 *
 * `out` receives `replicas * KARLIN_NUM_PROCESSES * len` values laid out
 * as `[replica][process][time]`. With `normalize != 0` paths are divided
 * by `sigma_n`. Results depend only on the arguments, not on `workers`
 * (0 selects the default).
 *
 * # Safety
 * `times` must point to `len` readable doubles and `out` to `out_len` writable doubles.
 */
enum KarlinStatus karlin_simulate(enum KarlinUrnMode mode,
                                  double alpha,
                                  uint64_t n,
                                  const double *times,
                                  size_t len,
                                  size_t replicas,
                                  uint64_t seed,
                                  enum KarlinSignMode signs,
                                  int32_t normalize,
                                  size_t workers,
                                  double *out,
                                  size_t out_len);

/**
 * Covariance matrix of a kernel on `times[0..len]` (any nonnegative points).
 *
 * # Safety
 * `times` must point to `len` readable doubles and `out` be writable.
 */
enum KarlinStatus karlin_cov_matrix_new(enum KarlinKernelFamily family,
                                        double alpha,
                                        double hurst,
                                        double k,
                                        const double *times,
                                        size_t len,
                                        struct KarlinCovMatrix **out);

/**
 * Release a matrix handle. Null is ignored.
 *
 * # Safety
 * `m` must be null or a handle from [`karlin_cov_matrix_new`] not yet freed.
 */
void karlin_cov_matrix_free(struct KarlinCovMatrix *m);

/**
 * Smallest eigenvalue of the matrix.
 *
 * # Safety
 * `m` must be a live matrix handle and `out` writable.
 */
enum KarlinStatus karlin_cov_matrix_min_eig(const struct KarlinCovMatrix *m, double *out);

/**
 * Cholesky-factor the matrix in place, adding diagonal jitter if needed.
 * Returns `KARLIN_STATUS_NOT_PSD` when the jitter cap is exceeded.
 *
 * # Safety
 * `m` must be a live matrix handle; `jitter_used` may be null.
 */
enum KarlinStatus karlin_cov_matrix_factor(struct KarlinCovMatrix *m, double *jitter_used);

/**
 * Draw path `index` of stream `seed` from a factored matrix into `out[0..len]`.
 *
 * # Safety
 * `m` must be a live matrix handle and `out` point to `len` writable doubles.
 */
enum KarlinStatus karlin_cov_matrix_sample(const struct KarlinCovMatrix *m,
                                           uint64_t seed,
                                           uint64_t index,
                                           double *out,
                                           size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KARLIN_H */
