//! C ABI over the gmq library: loss/derivative evaluation over buffers,
//! model fitting with an opaque result handle, and the shape-parameter rules
//! of thumb. Every fallible call returns a [`GmqStatus`]; a thread-local
//! message with the details of the most recent failure is available through
//! [`gmq_last_error_message`].
//!
//! Conventions:
//! - Covariate buffers are row-major `n × p`; the intercept column is never
//!   stored, it is requested with the `has_intercept` flag and leads the
//!   coefficient vector.
//! - Output buffers are caller-allocated; length arguments are checked.
//! - `gmq_fit` hands back an owned handle that must be released with
//!   [`gmq_fit_result_free`]. Accessors on a null handle return an error
//!   status or zero, never crash.

use gmq::loss::LossSpec;
use gmq::model::{conquer_bandwidth, default_c, fit, Dataset, FitResult};
use gmq::optimize::OptimizerConfig;
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status code of every fallible FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    DomainError = 3,
    DataError = 4,
    GuardError = 5,
    OptimizationError = 6,
    IoError = 7,
    InternalError = 8,
}

/// Loss family selector mirroring the library's families.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmqLossFamily {
    Check = 0,
    Gmq = 1,
    Expectile = 2,
    SmoothExpectile = 3,
    KthPower = 4,
    SmoothKthPower = 5,
    ConquerGaussian = 6,
    ConquerLogistic = 7,
}

/// Optional optimizer settings for [`gmq_fit`]; pass NULL for the defaults
/// (tolerance 1e-6, 5000 iterations, step cap 100).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GmqFitOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub step_cap: f64,
}

/// Opaque fit result handle.
pub struct GmqFitResult {
    inner: FitResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let cstr = CString::new(message).unwrap_or_else(|_| CString::new("invalid message").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(cstr));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_of(err: &gmq::Error) -> GmqStatus {
    match err {
        gmq::Error::InvalidParameter(_) => GmqStatus::InvalidParameter,
        gmq::Error::Domain(_) => GmqStatus::DomainError,
        gmq::Error::Data(_) => GmqStatus::DataError,
        gmq::Error::Guard(_) => GmqStatus::GuardError,
        gmq::Error::Optimization { .. } => GmqStatus::OptimizationError,
        gmq::Error::Io(_) => GmqStatus::IoError,
        gmq::Error::Csv(_) | gmq::Error::Json(_) | gmq::Error::Parse(_) => {
            GmqStatus::InvalidParameter
        }
    }
}

fn fail(err: gmq::Error) -> GmqStatus {
    let status = status_of(&err);
    set_last_error(err.to_string());
    status
}

fn build_spec(family: GmqLossFamily, tau: f64, shape: f64, k: f64) -> gmq::Result<LossSpec> {
    match family {
        GmqLossFamily::Check => LossSpec::check(tau),
        GmqLossFamily::Gmq => LossSpec::gmq(tau, shape),
        GmqLossFamily::Expectile => LossSpec::expectile(tau),
        GmqLossFamily::SmoothExpectile => LossSpec::smooth_expectile(tau, shape),
        GmqLossFamily::KthPower => LossSpec::kth_power(tau, k),
        GmqLossFamily::SmoothKthPower => LossSpec::smooth_kth_power(tau, shape, k),
        GmqLossFamily::ConquerGaussian => LossSpec::conquer_gaussian(tau, shape),
        GmqLossFamily::ConquerLogistic => LossSpec::conquer_logistic(tau, shape),
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn gmq_status_message(status: GmqStatus) -> *const c_char {
    let msg: &'static [u8] = match status {
        GmqStatus::Ok => b"ok\0",
        GmqStatus::NullPointer => b"null pointer argument\0",
        GmqStatus::InvalidParameter => b"invalid parameter\0",
        GmqStatus::DomainError => b"derivative undefined at the requested point\0",
        GmqStatus::DataError => b"data violates a structural requirement\0",
        GmqStatus::GuardError => b"instance exceeds a combinatorial guard\0",
        GmqStatus::OptimizationError => b"optimizer failed\0",
        GmqStatus::IoError => b"I/O failure\0",
        GmqStatus::InternalError => b"internal error\0",
    };
    msg.as_ptr() as *const c_char
}

/// Message describing the most recent failure on this thread, or NULL when
/// the last call succeeded. The pointer stays valid until the next failing
/// call on the same thread.
#[no_mangle]
pub extern "C" fn gmq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|s| s.as_ptr())
            .unwrap_or(std::ptr::null())
    })
}

/// Rule-of-thumb multiquadric shape `((p + ln n)/n)^{1/3}` clamped to
/// `[1e-3, 1]`.
#[no_mangle]
pub extern "C" fn gmq_default_c(n: usize, p: usize) -> f64 {
    default_c(n, p.max(1))
}

/// Kernel-smoothing bandwidth `((p + ln n)/n)^{2/5}`.
#[no_mangle]
pub extern "C" fn gmq_conquer_bandwidth(n: usize, p: usize) -> f64 {
    conquer_bandwidth(n, p.max(1))
}

enum EvalKind {
    Loss,
    Grad,
    Hess,
}

#[allow(clippy::too_many_arguments)] // mirrors the C signature
unsafe fn eval_buffer(
    kind: EvalKind,
    family: GmqLossFamily,
    tau: f64,
    shape: f64,
    k: f64,
    residuals: *const f64,
    len: usize,
    out: *mut f64,
) -> GmqStatus {
    if residuals.is_null() || out.is_null() {
        set_last_error("residuals/out must not be NULL".into());
        return GmqStatus::NullPointer;
    }
    let spec = match build_spec(family, tau, shape, k) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let input = std::slice::from_raw_parts(residuals, len);
    let output = std::slice::from_raw_parts_mut(out, len);
    let outcome = catch_unwind(AssertUnwindSafe(|| match kind {
        EvalKind::Loss => {
            spec.loss_vec(input, output);
            Ok(())
        }
        EvalKind::Grad => spec.grad_vec(input, output),
        EvalKind::Hess => spec.hess_vec(input, output),
    }));
    match outcome {
        Ok(Ok(())) => {
            clear_last_error();
            GmqStatus::Ok
        }
        Ok(Err(e)) => fail(e),
        Err(_) => {
            set_last_error("panic inside loss evaluation".into());
            GmqStatus::InternalError
        }
    }
}

/// Evaluate the loss over a residual buffer: `out[i] = rho(residuals[i])`.
///
/// # Safety
/// `residuals` and `out` must each point to `len` readable (resp. writable)
/// doubles and must not overlap.
#[no_mangle]
pub unsafe extern "C" fn gmq_loss_eval(
    family: GmqLossFamily,
    tau: f64,
    shape: f64,
    k: f64,
    residuals: *const f64,
    len: usize,
    out: *mut f64,
) -> GmqStatus {
    eval_buffer(EvalKind::Loss, family, tau, shape, k, residuals, len, out)
}

/// Evaluate the loss derivative over a residual buffer.
///
/// # Safety
/// Same contract as [`gmq_loss_eval`].
#[no_mangle]
pub unsafe extern "C" fn gmq_grad_eval(
    family: GmqLossFamily,
    tau: f64,
    shape: f64,
    k: f64,
    residuals: *const f64,
    len: usize,
    out: *mut f64,
) -> GmqStatus {
    eval_buffer(EvalKind::Grad, family, tau, shape, k, residuals, len, out)
}

/// Evaluate the loss second derivative over a residual buffer.
///
/// # Safety
/// Same contract as [`gmq_loss_eval`].
#[no_mangle]
pub unsafe extern "C" fn gmq_hess_eval(
    family: GmqLossFamily,
    tau: f64,
    shape: f64,
    k: f64,
    residuals: *const f64,
    len: usize,
    out: *mut f64,
) -> GmqStatus {
    eval_buffer(EvalKind::Hess, family, tau, shape, k, residuals, len, out)
}

/// Fit a linear model and hand back an owned result handle through
/// `out_result`.
///
/// `x` is row-major `n × p` (ignored when `p = 0`), `y` has length `n`.
/// With `has_intercept` a constant column leads the coefficient vector, so
/// the fitted model has `p + 1` coefficients.
///
/// # Safety
/// `x` must point to `n*p` readable doubles when `p > 0`; `y` must point to
/// `n` readable doubles; `options` must be NULL or point to a valid
/// [`GmqFitOptions`]; `out_result` must be a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn gmq_fit(
    x: *const f64,
    n: usize,
    p: usize,
    y: *const f64,
    has_intercept: bool,
    family: GmqLossFamily,
    tau: f64,
    shape: f64,
    k: f64,
    options: *const GmqFitOptions,
    out_result: *mut *mut GmqFitResult,
) -> GmqStatus {
    if out_result.is_null() || y.is_null() || (p > 0 && x.is_null()) {
        set_last_error("x/y/out_result must not be NULL".into());
        return GmqStatus::NullPointer;
    }
    *out_result = std::ptr::null_mut();
    let spec = match build_spec(family, tau, shape, k) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let x_vec = if p > 0 {
        std::slice::from_raw_parts(x, n * p).to_vec()
    } else {
        Vec::new()
    };
    let y_vec = std::slice::from_raw_parts(y, n).to_vec();
    let config = if options.is_null() {
        None
    } else {
        let opts = &*options;
        let m = p + usize::from(has_intercept);
        let mut cfg = OptimizerConfig::new(vec![0.0; m])
            .with_tol(opts.tol)
            .with_max_iter(opts.max_iter);
        cfg.step_cap = opts.step_cap;
        Some(cfg)
    };
    let outcome = catch_unwind(AssertUnwindSafe(|| -> gmq::Result<FitResult> {
        let dataset = Dataset::new(x_vec, p, y_vec, has_intercept)?;
        fit(&dataset, &spec, config)
    }));
    match outcome {
        Ok(Ok(result)) => {
            clear_last_error();
            *out_result = Box::into_raw(Box::new(GmqFitResult { inner: result }));
            GmqStatus::Ok
        }
        Ok(Err(e)) => fail(e),
        Err(_) => {
            set_last_error("panic inside fit".into());
            GmqStatus::InternalError
        }
    }
}

/// Number of fitted coefficients (0 for a null handle).
///
/// # Safety
/// `result` must be NULL or a handle produced by [`gmq_fit`].
#[no_mangle]
pub unsafe extern "C" fn gmq_fit_result_num_coeffs(result: *const GmqFitResult) -> usize {
    if result.is_null() {
        return 0;
    }
    (*result).inner.beta_hat.len()
}

unsafe fn copy_coeffs(src: &[f64], out: *mut f64, len: usize) -> GmqStatus {
    if out.is_null() {
        set_last_error("out must not be NULL".into());
        return GmqStatus::NullPointer;
    }
    if len < src.len() {
        set_last_error(format!(
            "output buffer holds {len} values, fit has {}",
            src.len()
        ));
        return GmqStatus::InvalidParameter;
    }
    std::ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    GmqStatus::Ok
}

/// Copy the fitted coefficients (original scale, intercept first) into `out`.
///
/// # Safety
/// `result` must be a live handle from [`gmq_fit`]; `out` must point to at
/// least `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gmq_fit_result_coefficients(
    result: *const GmqFitResult,
    out: *mut f64,
    len: usize,
) -> GmqStatus {
    if result.is_null() {
        set_last_error("result handle is NULL".into());
        return GmqStatus::NullPointer;
    }
    copy_coeffs(&(*result).inner.beta_hat, out, len)
}

/// Copy the coefficients on the standardized scale actually optimized over.
///
/// # Safety
/// Same contract as [`gmq_fit_result_coefficients`].
#[no_mangle]
pub unsafe extern "C" fn gmq_fit_result_standardized(
    result: *const GmqFitResult,
    out: *mut f64,
    len: usize,
) -> GmqStatus {
    if result.is_null() {
        set_last_error("result handle is NULL".into());
        return GmqStatus::NullPointer;
    }
    copy_coeffs(&(*result).inner.beta_std, out, len)
}

/// Whether the optimizer met its gradient tolerance (false for null handles).
///
/// # Safety
/// `result` must be NULL or a live handle from [`gmq_fit`].
#[no_mangle]
pub unsafe extern "C" fn gmq_fit_result_converged(result: *const GmqFitResult) -> bool {
    if result.is_null() {
        return false;
    }
    (*result).inner.trace.converged
}

/// Number of optimizer iterations across all continuation stages.
///
/// # Safety
/// `result` must be NULL or a live handle from [`gmq_fit`].
#[no_mangle]
pub unsafe extern "C" fn gmq_fit_result_iterations(result: *const GmqFitResult) -> usize {
    if result.is_null() {
        return 0;
    }
    (*result).inner.trace.iterations
}

/// Final gradient norm (NaN for a null handle or a zero-iteration fit).
///
/// # Safety
/// `result` must be NULL or a live handle from [`gmq_fit`].
#[no_mangle]
pub unsafe extern "C" fn gmq_fit_result_final_grad_norm(result: *const GmqFitResult) -> f64 {
    if result.is_null() {
        return f64::NAN;
    }
    (*result)
        .inner
        .trace
        .grad_norms
        .last()
        .copied()
        .unwrap_or(f64::NAN)
}

/// Wall-clock seconds spent fitting.
///
/// # Safety
/// `result` must be NULL or a live handle from [`gmq_fit`].
#[no_mangle]
pub unsafe extern "C" fn gmq_fit_result_wall_seconds(result: *const GmqFitResult) -> f64 {
    if result.is_null() {
        return f64::NAN;
    }
    (*result).inner.trace.wall_time
}

/// Release a handle from [`gmq_fit`]. NULL is a no-op.
///
/// # Safety
/// `result` must be NULL or a handle produced by [`gmq_fit`] that has not
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn gmq_fit_result_free(result: *mut GmqFitResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
