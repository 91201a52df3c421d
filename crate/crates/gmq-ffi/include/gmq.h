#ifndef GMQ_H
#define GMQ_H

/* Generated by cbindgen from the gmq-ffi crate; regenerate with `cargo build -p gmq-ffi`, do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Loss family selector mirroring the library's families.
 */
typedef enum GmqLossFamily {
  GMQ_LOSS_FAMILY_CHECK = 0,
  GMQ_LOSS_FAMILY_GMQ = 1,
  GMQ_LOSS_FAMILY_EXPECTILE = 2,
  GMQ_LOSS_FAMILY_SMOOTH_EXPECTILE = 3,
  GMQ_LOSS_FAMILY_KTH_POWER = 4,
  GMQ_LOSS_FAMILY_SMOOTH_KTH_POWER = 5,
  GMQ_LOSS_FAMILY_CONQUER_GAUSSIAN = 6,
  GMQ_LOSS_FAMILY_CONQUER_LOGISTIC = 7,
} GmqLossFamily;

/**
 * Status code of every fallible FFI call.
 */
typedef enum GmqStatus {
  GMQ_STATUS_OK = 0,
  GMQ_STATUS_NULL_POINTER = 1,
  GMQ_STATUS_INVALID_PARAMETER = 2,
  GMQ_STATUS_DOMAIN_ERROR = 3,
  GMQ_STATUS_DATA_ERROR = 4,
  GMQ_STATUS_GUARD_ERROR = 5,
  GMQ_STATUS_OPTIMIZATION_ERROR = 6,
  GMQ_STATUS_IO_ERROR = 7,
  GMQ_STATUS_INTERNAL_ERROR = 8,
} GmqStatus;

/**
 * Opaque fit result handle.
 */
typedef struct GmqFitResult GmqFitResult;

/**
 * Optional optimizer settings for [`gmq_fit`]; pass NULL for the defaults
 * (tolerance 1e-6, 5000 iterations, step cap 100).
 */
typedef struct GmqFitOptions {
  double tol;
  size_t max_iter;
  double step_cap;
} GmqFitOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code.
 */
const char *gmq_status_message(enum GmqStatus status);

/**
 * Message describing the most recent failure on this thread, or NULL when
 * the last call succeeded. The pointer stays valid until the next failing
 * call on the same thread.
 */
const char *gmq_last_error_message(void);

/**
 * Rule-of-thumb multiquadric shape `((p + ln n)/n)^{1/3}` clamped to
 * `[1e-3, 1]`.
 */
double gmq_default_c(size_t n, size_t p);

/**
 * Kernel-smoothing bandwidth `((p + ln n)/n)^{2/5}`.
 */
double gmq_conquer_bandwidth(size_t n, size_t p);

/**
 * Evaluate the loss over a residual buffer: `out[i] = rho(residuals[i])`.
 *
 * # Safety
 * `residuals` and `out` must each point to `len` readable (resp. writable)
 * doubles and must not overlap.
 */
enum GmqStatus gmq_loss_eval(enum GmqLossFamily family,
                             double tau,
                             double shape,
                             double k,
                             const double *residuals,
                             size_t len,
                             double *out);

/**
 * Evaluate the loss derivative over a residual buffer.
 *
 * # Safety
 * Same contract as [`gmq_loss_eval`].
 */
enum GmqStatus gmq_grad_eval(enum GmqLossFamily family,
                             double tau,
                             double shape,
                             double k,
                             const double *residuals,
                             size_t len,
                             double *out);

/**
 * Evaluate the loss second derivative over a residual buffer.
 *
 * # Safety
 * Same contract as [`gmq_loss_eval`].
 */
enum GmqStatus gmq_hess_eval(enum GmqLossFamily family,
                             double tau,
                             double shape,
                             double k,
                             const double *residuals,
                             size_t len,
                             double *out);

/**
 * Fit a linear model and hand back an owned result handle through
 * `out_result`.
 *
 * `x` is row-major `n × p` (ignored when `p = 0`), `y` has length `n`.
 * With `has_intercept` a constant column leads the coefficient vector, so
 * the fitted model has `p + 1` coefficients.
 *
 * # Safety
 * `x` must point to `n*p` readable doubles when `p > 0`; `y` must point to
 * `n` readable doubles; `options` must be NULL or point to a valid
 * [`GmqFitOptions`]; `out_result` must be a valid destination pointer.
 */
enum GmqStatus gmq_fit(const double *x,
                       size_t n,
                       size_t p,
                       const double *y,
                       bool has_intercept,
                       enum GmqLossFamily family,
                       double tau,
                       double shape,
                       double k,
                       const struct GmqFitOptions *options,
                       struct GmqFitResult **out_result);

/**
 * Number of fitted coefficients (0 for a null handle).
 *
 * # Safety
 * `result` must be NULL or a handle produced by [`gmq_fit`].
 */
size_t gmq_fit_result_num_coeffs(const struct GmqFitResult *result);

/**
 * Copy the fitted coefficients (original scale, intercept first) into `out`.
 *
 * # Safety
 * `result` must be a live handle from [`gmq_fit`]; `out` must point to at
 * least `len` writable doubles.
 */
enum GmqStatus gmq_fit_result_coefficients(const struct GmqFitResult *result,
                                           double *out,
                                           size_t len);

/**
 * Copy the coefficients on the standardized scale actually optimized over.
 *
 * # Safety
 * Same contract as [`gmq_fit_result_coefficients`].
 */
enum GmqStatus gmq_fit_result_standardized(const struct GmqFitResult *result,
                                           double *out,
                                           size_t len);

/**
 * Whether the optimizer met its gradient tolerance (false for null handles).
 *
 * # Safety
 * `result` must be NULL or a live handle from [`gmq_fit`].
 */
bool gmq_fit_result_converged(const struct GmqFitResult *result);

/**
 * Number of optimizer iterations across all continuation stages.
 *
 * # Safety
 * `result` must be NULL or a live handle from [`gmq_fit`].
 */
size_t gmq_fit_result_iterations(const struct GmqFitResult *result);

/**
 * Final gradient norm (NaN for a null handle or a zero-iteration fit).
 *
 * # Safety
 * `result` must be NULL or a live handle from [`gmq_fit`].
 */
double gmq_fit_result_final_grad_norm(const struct GmqFitResult *result);

/**
 * Wall-clock seconds spent fitting.
 *
 * # Safety
 * `result` must be NULL or a live handle from [`gmq_fit`].
 */
double gmq_fit_result_wall_seconds(const struct GmqFitResult *result);

/**
 * Release a handle from [`gmq_fit`]. NULL is a no-op.
 *
 * # Safety
 * `result` must be NULL or a handle produced by [`gmq_fit`] that has not
 * been freed already.
 */
void gmq_fit_result_free(struct GmqFitResult *result);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* GMQ_H */
