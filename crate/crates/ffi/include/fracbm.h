/* C interface to the fracbm library. Generated by cbindgen; do not edit. */

#ifndef FRACBM_H
#define FRACBM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Success.
 */
#define FB_OK 0

/**
 * A required pointer argument was null.
 */
#define FB_ERR_NULL_ARG 1

/**
 * A parameter is outside its domain or violates a precondition
 * (Hurst exponent outside (0,1), path not starting at the stated level).
 */
#define FB_ERR_INVALID_PARAM 2

/**
 * A numerical failure inside the library (failed factorization,
 * non-finite input or intermediate).
 */
#define FB_ERR_NUMERICAL 3

/**
 * A buffer length does not match the engine's node count.
 */
#define FB_ERR_SIZE_MISMATCH 4

/**
 * The input carries no signal for the question asked of it
 * (zero Fisher information in the estimator).
 */
#define FB_ERR_DEGENERATE 5

/**
 * Opaque simulation, transform, and inference engine for one uniform grid
 * and one Hurst exponent.
 */
typedef struct FbEngine FbEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Create an engine for an `n`-cell uniform grid on [0, `horizon`] at Hurst
 * exponent `hurst` in (0, 1), and store the handle in `*out`. On failure
 * `*out` is left untouched.
 *
 * # Safety
 * `out` must be null or valid for writing one pointer.
 */
int32_t fb_engine_new(size_t n, double horizon, double hurst, struct FbEngine **out);

/**
 * Destroy an engine created by `fb_engine_new`. A null handle is a no-op.
 *
 * # Safety
 * `engine` must be null or a handle from `fb_engine_new` not yet freed;
 * the handle must not be used afterwards.
 */
void fb_engine_free(struct FbEngine *engine);

/**
 * Number of values in every path buffer for this engine (`n + 1`), or 0
 * for a null handle.
 *
 * # Safety
 * `engine` must be null or a live handle from `fb_engine_new`.
 */
size_t fb_engine_nodes(const struct FbEngine *engine);

/**
 * Norros constants (c_H, c_1, c_2) at the given Hurst exponent; each out
 * pointer may be null to skip that value. All three are 1 at H = 1/2.
 *
 * # Safety
 * Each non-null out pointer must be valid for writing one double.
 */
int32_t fb_norros_constants(double hurst, double *c_h, double *c_1, double *c_2);

/**
 * Sample one exact fractional Brownian motion path into `out[0..len]`.
 * `len` must equal `fb_engine_nodes(engine)`; (seed, stream) pairs are
 * reproducible and distinct streams are independent.
 *
 * # Safety
 * `engine` must be null or a live handle; `out` must be null or valid for
 * writing `len` doubles.
 */
int32_t fb_sample_fbm(const struct FbEngine *engine,
                      uint64_t seed,
                      uint64_t stream,
                      double *out,
                      size_t len);

/**
 * Sample one fractional Ornstein-Uhlenbeck path, Euler scheme driven by an
 * exact fBm increment stream, for dX = rho (m - X) dt + dW^H with
 * X_0 = x0. Buffer rules match `fb_sample_fbm`.
 *
 * # Safety
 * `engine` must be null or a live handle; `out` must be null or valid for
 * writing `len` doubles.
 */
int32_t fb_sample_fou(const struct FbEngine *engine,
                      uint64_t seed,
                      uint64_t stream,
                      double rho,
                      double m,
                      double x0,
                      double *out,
                      size_t len);

/**
 * Forward transform of an fBm path `w` (starting at 0) into the kernel
 * integral Y, the fundamental martingale M, and the innovation Brownian
 * motion B. Each of `y`, `m`, `b` may be null to skip that output; non-null
 * buffers receive `len` values.
 *
 * # Safety
 * `engine` must be null or a live handle; `w` must be null or valid for
 * reading `len` doubles; each non-null out buffer must be valid for
 * writing `len` doubles.
 */
int32_t fb_forward(const struct FbEngine *engine,
                   const double *w,
                   size_t len,
                   double *y,
                   double *m,
                   double *b);

/**
 * Reconstruct the fBm path from an innovation Brownian path `b` (starting
 * at 0), writing `len` values into `out`.
 *
 * # Safety
 * `engine` must be null or a live handle; `b` must be null or valid for
 * reading `len` doubles; `out` must be null or valid for writing `len`
 * doubles.
 */
int32_t fb_reconstruct(const struct FbEngine *engine, const double *b, size_t len, double *out);

/**
 * Girsanov log likelihood ratio of the observed path `x` (with X_0 = x0)
 * under the drift rho (m - X_t) dt against the driftless model; rho = 0
 * evaluates the zero drift. Scalar out pointers may be null; `singular`
 * receives 1 when the integrand diverges at t = 0.
 *
 * # Safety
 * `engine` must be null or a live handle; `x` must be null or valid for
 * reading `len` doubles; each non-null scalar out pointer must be valid
 * for one write.
 */
int32_t fb_log_density(const struct FbEngine *engine,
                       const double *x,
                       size_t len,
                       double rho,
                       double m,
                       double x0,
                       double *log_density,
                       double *ito_sum,
                       double *l2_norm_sq,
                       int32_t *singular);

/**
 * Closed-form MLE of the mean-reversion speed rho from one observed fOU
 * path `x` with known mean `m` and starting level `x0`. Scalar out
 * pointers may be null. Returns `FB_ERR_DEGENERATE` when the path carries
 * no information about rho.
 *
 * # Safety
 * `engine` must be null or a live handle; `x` must be null or valid for
 * reading `len` doubles; each non-null scalar out pointer must be valid
 * for one write.
 */
int32_t fb_fou_mle(const struct FbEngine *engine,
                   const double *x,
                   size_t len,
                   double m,
                   double x0,
                   double *rho_hat,
                   double *score,
                   double *information,
                   double *log_lik);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRACBM_H */
