//! Loss families for smoothed quantile, expectile and kth-power-expectile
//! regression, with closed-form first and second derivatives.
//!
//! The central object is the multiquadric surrogate
//! `ρ_{τ,c}(u) = (2τ-1)u/2 + √(c²+u²)/2`, the upper branch of a hyperbola
//! whose asymptotes are the two linear pieces `τu` and `(τ-1)u` of the check
//! loss. `c = 0` recovers the check loss exactly; any `c > 0` gives an
//! infinitely smooth convex function whose derivatives involve only algebraic
//! operations. Convolution-kernel smoothing (Gaussian and logistic, the
//! "conquer" approach) is implemented alongside as the baseline: its gradient
//! needs the normal CDF or an exponential per residual, which is what the
//! derivative benchmarks compare against.
//!
//! All functions here are pure; residual vectors can be processed from any
//! number of threads concurrently.

use crate::error::{Error, Result};
use crate::special::{normal_cdf, normal_pdf};
use serde::{Deserialize, Serialize};

/// Magnitudes above this are rescaled before squaring to avoid overflow.
const RADICAL_RESCALE: f64 = 1e150;

/// √(c² + u²) without overflow for |u| up to ~1e300.
///
/// Exact at the axes: returns `c` when `u = 0` and `|u|` when `c = 0`, so the
/// `c = 0` reduction to the check loss and the gap at the origin hold without
/// rounding residue.
#[inline]
pub fn radical(c: f64, u: f64) -> f64 {
    let au = u.abs();
    if au == 0.0 {
        return c;
    }
    if c == 0.0 {
        return au;
    }
    let m = au.max(c);
    if m > RADICAL_RESCALE {
        let ru = au / m;
        let rc = c / m;
        m * (rc * rc + ru * ru).sqrt()
    } else {
        (c * c + au * au).sqrt()
    }
}

#[inline]
fn sign(u: f64) -> f64 {
    if u > 0.0 {
        1.0
    } else if u < 0.0 {
        -1.0
    } else {
        0.0
    }
}

// ---------------------------------------------------------------------------
// Check loss
// ---------------------------------------------------------------------------

/// Check (pinball) loss `u(τ - 1[u<0])`. Nonnegative, zero only at `u = 0`.
#[inline]
pub fn check_loss(u: f64, tau: f64) -> f64 {
    if u < 0.0 {
        u * (tau - 1.0)
    } else {
        u * tau
    }
}

// ---------------------------------------------------------------------------
// Multiquadric smoothed check loss
// ---------------------------------------------------------------------------

/// Smoothed check loss `(2τ-1)u/2 + √(c²+u²)/2`; equals [`check_loss`] at `c = 0`.
#[inline]
pub fn gmq_loss(u: f64, tau: f64, c: f64) -> f64 {
    (2.0 * tau - 1.0) * u * 0.5 + 0.5 * radical(c, u)
}

/// Raw derivative `(2τ-1)/2 + u/(2√(c²+u²))`; NaN at `u = c = 0`.
#[inline]
pub(crate) fn gmq_grad_raw(u: f64, tau: f64, c: f64) -> f64 {
    (2.0 * tau - 1.0) * 0.5 + u / (2.0 * radical(c, u))
}

/// First derivative of [`gmq_loss`], strictly increasing in `u` and bounded in
/// `(τ-1, τ)`.
///
/// Errors with [`Error::Domain`] only at `u = c = 0`, where the check loss has
/// a subgradient interval rather than a derivative.
#[inline]
pub fn gmq_grad(u: f64, tau: f64, c: f64) -> Result<f64> {
    if c == 0.0 && u == 0.0 {
        return Err(Error::Domain(
            "check-loss derivative at a zero residual (c = 0, u = 0)".into(),
        ));
    }
    Ok(gmq_grad_raw(u, tau, c))
}

/// Raw second derivative `c²/(2(c²+u²)^{3/2})`; requires `c > 0`.
#[inline]
pub(crate) fn gmq_hess_raw(u: f64, c: f64) -> f64 {
    let r = radical(c, u);
    (c / r) * (c / r) / (2.0 * r)
}

/// Second derivative of [`gmq_loss`]: strictly positive, maximal at `u = 0`
/// with value `1/(2c)`, decaying like `c²/(2|u|³)`. Independent of `τ`.
#[inline]
pub fn gmq_hess(u: f64, _tau: f64, c: f64) -> Result<f64> {
    if c <= 0.0 {
        return Err(Error::Domain(
            "second derivative requires a positive shape parameter".into(),
        ));
    }
    Ok(gmq_hess_raw(u, c))
}

/// Upper bound on `gmq_loss - check_loss`: `c/2` for `|u| ≤ c`, else `c²/(2|u|)`.
#[inline]
pub fn smoothing_gap_bound(u: f64, c: f64) -> f64 {
    let au = u.abs();
    if au <= c {
        0.5 * c
    } else {
        c * c / (2.0 * au)
    }
}

/// Exact smoothing gap `gmq_loss(u,τ,c) - check_loss(u,τ)` in cancellation-free
/// form `c²/(2(√(c²+u²) + |u|))`.
#[inline]
pub fn gmq_gap(u: f64, c: f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    let au = u.abs();
    if au == 0.0 {
        return 0.5 * c;
    }
    c * c / (2.0 * (radical(c, u) + au))
}

/// Distances from `gmq_loss(u,τ,c)` to its two asymptotes `τu` and `(τ-1)u`,
/// evaluated in conjugate form so the hyperbola identity
/// `gap₁ · gap₂ = c²/4` holds to machine precision even where the direct
/// subtraction would cancel catastrophically.
///
/// The gaps `(√(c²+u²)-u)/2` and `(√(c²+u²)+u)/2` are themselves τ-free.
#[inline]
pub fn gmq_asymptote_gaps(u: f64, _tau: f64, c: f64) -> (f64, f64) {
    let r = radical(c, u);
    let (minus, plus) = if u >= 0.0 {
        // r - u cancels for u >> c; r + u is safe
        let plus = 0.5 * (r + u);
        let minus = if c == 0.0 { 0.0 } else { c * c / (4.0 * plus) };
        (minus, plus)
    } else {
        let minus = 0.5 * (r - u);
        let plus = if c == 0.0 { 0.0 } else { c * c / (4.0 * minus) };
        (minus, plus)
    };
    (minus, plus)
}

// ---------------------------------------------------------------------------
// Expectile (asymmetric least squares) and its smoothed form
// ---------------------------------------------------------------------------

/// Asymmetric least squares loss `τu²` for `u ≥ 0`, `(1-τ)u²` otherwise.
#[inline]
pub fn expectile_loss(u: f64, tau: f64) -> f64 {
    if u >= 0.0 {
        tau * u * u
    } else {
        (1.0 - tau) * u * u
    }
}

/// Derivative of [`expectile_loss`]; continuous everywhere.
#[inline]
pub fn expectile_grad(u: f64, tau: f64) -> f64 {
    if u >= 0.0 {
        2.0 * tau * u
    } else {
        2.0 * (1.0 - tau) * u
    }
}

/// Multiquadric-smoothed asymmetric least squares loss
/// `(2τ-1)u²/2 + (u√(c²+u²) + c²·asinh(u/c))/2`.
///
/// `c² asinh(u/c)` is the stable rewriting of
/// `c² ln|u + √(c²+u²)| - c² ln c`; the two are identical for every real `u`.
/// By construction its derivative is exactly `2·gmq_loss(u, τ, c)`.
#[inline]
pub fn smooth_expectile_loss(u: f64, tau: f64, c: f64) -> f64 {
    debug_assert!(c > 0.0);
    (2.0 * tau - 1.0) * u * u * 0.5 + 0.5 * (u * radical(c, u) + c * c * (u / c).asinh())
}

/// Derivative of [`smooth_expectile_loss`]; identically `2·gmq_loss(u, τ, c)`.
#[inline]
pub fn smooth_expectile_grad(u: f64, tau: f64, c: f64) -> f64 {
    2.0 * gmq_loss(u, tau, c)
}

/// Second derivative of [`smooth_expectile_loss`]: `2·ρ'_{τ,c}(u)`.
#[inline]
pub fn smooth_expectile_hess(u: f64, tau: f64, c: f64) -> f64 {
    2.0 * gmq_grad_raw(u, tau, c)
}

// ---------------------------------------------------------------------------
// kth-power expectile and its smoothed form
// ---------------------------------------------------------------------------

fn validate_k(k: f64) -> Result<()> {
    if !(k > 1.0 && k <= 2.0) {
        return Err(Error::InvalidParameter(format!(
            "power k must lie in (1, 2], got {k}"
        )));
    }
    Ok(())
}

/// kth-power expectile loss `τ|u|^k` for `u ≥ 0`, `(1-τ)|u|^k` otherwise,
/// for `1 < k ≤ 2`.
#[inline]
pub fn kth_power_loss(u: f64, tau: f64, k: f64) -> f64 {
    let w = u.abs().powf(k);
    if u >= 0.0 {
        tau * w
    } else {
        (1.0 - tau) * w
    }
}

/// Derivative of [`kth_power_loss`]; continuous (zero at the origin for k > 1).
#[inline]
pub fn kth_power_grad(u: f64, tau: f64, k: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    let w = u.abs().powf(k - 1.0);
    if u > 0.0 {
        k * tau * w
    } else {
        -k * (1.0 - tau) * w
    }
}

/// Smoothed kth-power expectile loss `((2τ-1)s(u) + √(c² + |u|^{2k}))/2` with
/// the sign extension `s(u) = sign(u)|u|^k`, which makes the `c → 0` limit the
/// piecewise kth-power loss exactly.
#[inline]
pub fn smooth_kth_power_loss(u: f64, tau: f64, c: f64, k: f64) -> f64 {
    let w = u.abs().powf(k);
    let s = sign(u) * w;
    0.5 * ((2.0 * tau - 1.0) * s + radical(c, w))
}

/// Derivative of [`smooth_kth_power_loss`] (zero at the origin for k > 1).
#[inline]
pub fn smooth_kth_power_grad(u: f64, tau: f64, c: f64, k: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    let au = u.abs();
    let w = au.powf(k);
    // k|u|^{k-1} * ((2τ-1) + sign(u) |u|^k / √(c²+|u|^{2k})) / 2
    0.5 * k * au.powf(k - 1.0) * ((2.0 * tau - 1.0) + sign(u) * w / radical(c, w))
}

/// Second derivative of [`smooth_kth_power_loss`] away from the origin.
///
/// For `1 < k < 2` the second derivative is unbounded at `u = 0`; callers that
/// need curvature there must treat the origin separately.
#[inline]
pub fn smooth_kth_power_hess(u: f64, tau: f64, c: f64, k: f64) -> f64 {
    debug_assert!(u != 0.0);
    let au = u.abs();
    let w = au.powf(k);
    let r = radical(c, w);
    let curb = k * au.powf(2.0 * k - 2.0) * ((2.0 * k - 1.0) * c * c + (k - 1.0) * w * w)
        / (r * r * r);
    0.5 * (k * (k - 1.0) * sign(u) * au.powf(k - 2.0) * (2.0 * tau - 1.0) + curb)
}

// ---------------------------------------------------------------------------
// Convolution-smoothed check loss (conquer baseline)
// ---------------------------------------------------------------------------

/// Kernel used by the convolution-smoothing baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConquerKernel {
    Gaussian,
    Logistic,
}

/// `ln(1 + e^x)` without overflow.
#[inline]
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Convolution-smoothed check loss with bandwidth `h`.
///
/// Gaussian kernel: `hφ(u/h) + u(τ - Φ(-u/h))`; logistic kernel:
/// `τu + h·ln(1 + e^{-u/h})`.
#[inline]
pub fn conquer_loss(u: f64, tau: f64, h: f64, kernel: ConquerKernel) -> f64 {
    debug_assert!(h > 0.0);
    match kernel {
        ConquerKernel::Gaussian => {
            let z = u / h;
            h * normal_pdf(z) + u * (tau - normal_cdf(-z))
        }
        ConquerKernel::Logistic => tau * u + h * softplus(-u / h),
    }
}

/// Gradient of the convolution-smoothed check loss: `τ - Φ(-u/h)` for the
/// Gaussian kernel, `τ - 1/(1 + e^{u/h})` for the logistic kernel. Both are
/// strictly increasing in `u` and bounded in `(τ-1, τ)`.
#[inline]
pub fn conquer_grad(u: f64, tau: f64, h: f64, kernel: ConquerKernel) -> f64 {
    debug_assert!(h > 0.0);
    match kernel {
        ConquerKernel::Gaussian => tau - normal_cdf(-u / h),
        ConquerKernel::Logistic => tau - 1.0 / (1.0 + (u / h).exp()),
    }
}

/// Second derivative of the convolution-smoothed check loss: the kernel
/// density rescaled by the bandwidth. Decays like `e^{-u²/2h²}` (Gaussian),
/// in contrast to the algebraic `O(|u|^{-3})` tail of [`gmq_hess`].
#[inline]
pub fn conquer_hess(u: f64, h: f64, kernel: ConquerKernel) -> f64 {
    debug_assert!(h > 0.0);
    match kernel {
        ConquerKernel::Gaussian => normal_pdf(u / h) / h,
        ConquerKernel::Logistic => {
            let t = (-(u / h).abs()).exp();
            let d = 1.0 + t;
            t / (h * d * d)
        }
    }
}

// ---------------------------------------------------------------------------
// LossSpec: family + parameters, validated once
// ---------------------------------------------------------------------------

/// Loss family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossFamily {
    Check,
    Gmq,
    Expectile,
    SmoothExpectile,
    KthPower,
    SmoothKthPower,
    ConquerGaussian,
    ConquerLogistic,
}

impl LossFamily {
    /// True for the families whose shape parameter is a multiquadric `c`
    /// (as opposed to a kernel bandwidth `h`, or nothing at all).
    pub fn uses_c(self) -> bool {
        matches!(
            self,
            LossFamily::Gmq | LossFamily::SmoothExpectile | LossFamily::SmoothKthPower
        )
    }

    /// True for the convolution-kernel families (shape parameter is `h`).
    pub fn uses_h(self) -> bool {
        matches!(
            self,
            LossFamily::ConquerGaussian | LossFamily::ConquerLogistic
        )
    }

    /// True for the kth-power families (the only ones that read `k`).
    pub fn uses_k(self) -> bool {
        matches!(self, LossFamily::KthPower | LossFamily::SmoothKthPower)
    }
}

/// A fully-parameterized loss: family, quantile/expectile level `τ`, shape
/// parameter (`c` for the multiquadric families, `h` for the kernel families,
/// ignored otherwise) and power `k` (kth-power families only).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub family: LossFamily,
    pub tau: f64,
    /// `c` or `h` depending on the family; 0 for families without one.
    pub shape: f64,
    /// Power for the kth-power families; fixed at 2 elsewhere.
    pub k: f64,
}

impl LossSpec {
    fn validated(family: LossFamily, tau: f64, shape: f64, k: f64) -> Result<Self> {
        if !(tau > 0.0 && tau < 1.0) || !tau.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "quantile level tau must lie in (0, 1), got {tau}"
            )));
        }
        if !shape.is_finite() || shape < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "shape parameter must be a nonnegative real, got {shape}"
            )));
        }
        if family.uses_k() {
            validate_k(k)?;
        }
        if family.uses_h() && shape == 0.0 {
            return Err(Error::InvalidParameter(
                "kernel bandwidth h must be positive".into(),
            ));
        }
        if family == LossFamily::SmoothExpectile && shape == 0.0 {
            return Err(Error::InvalidParameter(
                "smoothed expectile loss requires c > 0".into(),
            ));
        }
        Ok(LossSpec {
            family,
            tau,
            shape,
            k,
        })
    }

    pub fn check(tau: f64) -> Result<Self> {
        Self::validated(LossFamily::Check, tau, 0.0, 2.0)
    }

    pub fn gmq(tau: f64, c: f64) -> Result<Self> {
        Self::validated(LossFamily::Gmq, tau, c, 2.0)
    }

    pub fn expectile(tau: f64) -> Result<Self> {
        Self::validated(LossFamily::Expectile, tau, 0.0, 2.0)
    }

    pub fn smooth_expectile(tau: f64, c: f64) -> Result<Self> {
        Self::validated(LossFamily::SmoothExpectile, tau, c, 2.0)
    }

    pub fn kth_power(tau: f64, k: f64) -> Result<Self> {
        Self::validated(LossFamily::KthPower, tau, 0.0, k)
    }

    pub fn smooth_kth_power(tau: f64, c: f64, k: f64) -> Result<Self> {
        Self::validated(LossFamily::SmoothKthPower, tau, c, k)
    }

    pub fn conquer_gaussian(tau: f64, h: f64) -> Result<Self> {
        Self::validated(LossFamily::ConquerGaussian, tau, h, 2.0)
    }

    pub fn conquer_logistic(tau: f64, h: f64) -> Result<Self> {
        Self::validated(LossFamily::ConquerLogistic, tau, h, 2.0)
    }

    /// Re-validate a spec that was deserialized from external input.
    pub fn validate(&self) -> Result<Self> {
        Self::validated(self.family, self.tau, self.shape, self.k)
    }

    /// Loss value at residual `u`. Total for every family.
    #[inline]
    pub fn loss(&self, u: f64) -> f64 {
        match self.family {
            LossFamily::Check => check_loss(u, self.tau),
            LossFamily::Gmq => gmq_loss(u, self.tau, self.shape),
            LossFamily::Expectile => expectile_loss(u, self.tau),
            LossFamily::SmoothExpectile => smooth_expectile_loss(u, self.tau, self.shape),
            LossFamily::KthPower => kth_power_loss(u, self.tau, self.k),
            LossFamily::SmoothKthPower => smooth_kth_power_loss(u, self.tau, self.shape, self.k),
            LossFamily::ConquerGaussian => {
                conquer_loss(u, self.tau, self.shape, ConquerKernel::Gaussian)
            }
            LossFamily::ConquerLogistic => {
                conquer_loss(u, self.tau, self.shape, ConquerKernel::Logistic)
            }
        }
    }

    /// Whether the first derivative exists for every residual value.
    pub fn smooth_everywhere(&self) -> bool {
        match self.family {
            LossFamily::Check => false,
            LossFamily::Gmq => self.shape > 0.0,
            // kth-power with c = 0 reduces to the plain kth-power loss,
            // which is C^1 for k > 1.
            _ => true,
        }
    }

    /// First derivative at residual `u`.
    ///
    /// Errors where the derivative does not exist: the check loss (or GMQ with
    /// `c = 0`) at `u = 0`.
    #[inline]
    pub fn grad(&self, u: f64) -> Result<f64> {
        match self.family {
            LossFamily::Check => {
                if u == 0.0 {
                    Err(Error::Domain(
                        "check-loss derivative at a zero residual".into(),
                    ))
                } else {
                    Ok(if u < 0.0 { self.tau - 1.0 } else { self.tau })
                }
            }
            LossFamily::Gmq => gmq_grad(u, self.tau, self.shape),
            LossFamily::Expectile => Ok(expectile_grad(u, self.tau)),
            LossFamily::SmoothExpectile => Ok(smooth_expectile_grad(u, self.tau, self.shape)),
            LossFamily::KthPower => Ok(kth_power_grad(u, self.tau, self.k)),
            LossFamily::SmoothKthPower => {
                Ok(smooth_kth_power_grad(u, self.tau, self.shape, self.k))
            }
            LossFamily::ConquerGaussian => {
                Ok(conquer_grad(u, self.tau, self.shape, ConquerKernel::Gaussian))
            }
            LossFamily::ConquerLogistic => {
                Ok(conquer_grad(u, self.tau, self.shape, ConquerKernel::Logistic))
            }
        }
    }

    /// Second derivative at residual `u`, where defined.
    #[inline]
    pub fn hess(&self, u: f64) -> Result<f64> {
        let origin_kink = || {
            Err(Error::Domain(
                "second derivative discontinuous at a zero residual".into(),
            ))
        };
        match self.family {
            LossFamily::Check => {
                if u == 0.0 {
                    origin_kink()
                } else {
                    Ok(0.0)
                }
            }
            LossFamily::Gmq => gmq_hess(u, self.tau, self.shape),
            LossFamily::Expectile => {
                if u > 0.0 || self.tau == 0.5 {
                    Ok(2.0 * self.tau)
                } else if u < 0.0 {
                    Ok(2.0 * (1.0 - self.tau))
                } else {
                    origin_kink()
                }
            }
            LossFamily::SmoothExpectile => Ok(smooth_expectile_hess(u, self.tau, self.shape)),
            LossFamily::KthPower | LossFamily::SmoothKthPower => {
                if u == 0.0 {
                    return origin_kink();
                }
                if self.family == LossFamily::KthPower {
                    let w = u.abs().powf(self.k - 2.0);
                    let amp = if u > 0.0 { self.tau } else { 1.0 - self.tau };
                    Ok(self.k * (self.k - 1.0) * amp * w)
                } else {
                    Ok(smooth_kth_power_hess(u, self.tau, self.shape, self.k))
                }
            }
            LossFamily::ConquerGaussian => {
                Ok(conquer_hess(u, self.shape, ConquerKernel::Gaussian))
            }
            LossFamily::ConquerLogistic => {
                Ok(conquer_hess(u, self.shape, ConquerKernel::Logistic))
            }
        }
    }

    /// Vectorized loss over a residual slice.
    ///
    /// Panics if `out` is shorter than `u`.
    pub fn loss_vec(&self, u: &[f64], out: &mut [f64]) {
        assert!(out.len() >= u.len());
        // Specialized hot loops for the families worth benchmarking; the rest
        // go through the scalar dispatch.
        match self.family {
            LossFamily::Gmq => {
                let (t, c) = (self.tau, self.shape);
                for (o, &x) in out.iter_mut().zip(u) {
                    *o = gmq_loss(x, t, c);
                }
            }
            _ => {
                for (o, &x) in out.iter_mut().zip(u) {
                    *o = self.loss(x);
                }
            }
        }
    }

    /// Vectorized first derivative over a residual slice. This is the unit the
    /// derivative benchmarks time.
    ///
    /// Errors if the derivative is undefined at any element (check loss or
    /// `c = 0` GMQ at a zero residual).
    pub fn grad_vec(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        assert!(out.len() >= u.len());
        match self.family {
            LossFamily::Gmq if self.shape > 0.0 => {
                let (t, c) = (self.tau, self.shape);
                let lin = (2.0 * t - 1.0) * 0.5;
                for (o, &x) in out.iter_mut().zip(u) {
                    *o = lin + x / (2.0 * radical(c, x));
                }
                Ok(())
            }
            LossFamily::ConquerGaussian => {
                let (t, h) = (self.tau, self.shape);
                for (o, &x) in out.iter_mut().zip(u) {
                    *o = t - normal_cdf(-x / h);
                }
                Ok(())
            }
            LossFamily::ConquerLogistic => {
                let (t, h) = (self.tau, self.shape);
                for (o, &x) in out.iter_mut().zip(u) {
                    *o = t - 1.0 / (1.0 + (x / h).exp());
                }
                Ok(())
            }
            _ => {
                for (o, &x) in out.iter_mut().zip(u) {
                    *o = self.grad(x)?;
                }
                Ok(())
            }
        }
    }

    /// Vectorized second derivative over a residual slice.
    pub fn hess_vec(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        assert!(out.len() >= u.len());
        if self.family == LossFamily::Gmq {
            if self.shape <= 0.0 {
                return Err(Error::Domain(
                    "second derivative requires a positive shape parameter".into(),
                ));
            }
            let c = self.shape;
            for (o, &x) in out.iter_mut().zip(u) {
                *o = gmq_hess_raw(x, c);
            }
            return Ok(());
        }
        for (o, &x) in out.iter_mut().zip(u) {
            *o = self.hess(x)?;
        }
        Ok(())
    }
}
