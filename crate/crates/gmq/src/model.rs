//! Linear regression pipeline: standardize covariates, minimize the smoothed
//! empirical risk with BB gradient descent, back-transform to the original
//! scale.
//!
//! `fit` wraps the raw optimizer in a shape-continuation ladder: the risk is
//! first minimized at a large shape parameter (where it is nearly quadratic
//! and BB is reliable), then the shape is reduced geometrically toward the
//! requested value with warm starts. Each rung is guarded by a descent check;
//! if raw BB stalls or bounces — which it can on a nearly piecewise-linear
//! risk, where the capped step repeatedly overshoots — the rung is redone
//! with fixed-step vanilla gradient descent at a provably stable step. The
//! reported iterate is always the best point seen for the target shape.

use crate::error::{Error, Result};
use crate::loss::{LossFamily, LossSpec};
use crate::optimize::{bb_minimize, gd_minimize, OptimizeTrace, OptimizerConfig};
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Design matrix and response. `x` is row-major `n × p`; the intercept column,
/// when requested, is implicit and always leads the coefficient vector.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: Vec<f64>,
    n: usize,
    p: usize,
    y: Vec<f64>,
    pub has_intercept: bool,
}

impl Dataset {
    /// Build a dataset from a row-major covariate buffer.
    ///
    /// Requires `x.len() == n·p` with `n ≥ 1`, at least one design column
    /// (`p ≥ 1` or `has_intercept`), and finite entries throughout.
    pub fn new(x: Vec<f64>, p: usize, y: Vec<f64>, has_intercept: bool) -> Result<Self> {
        let n = y.len();
        if n == 0 {
            return Err(Error::Data("empty response vector".into()));
        }
        if p == 0 && !has_intercept {
            return Err(Error::Data(
                "design needs at least one column (p >= 1 or an intercept)".into(),
            ));
        }
        if x.len() != n * p {
            return Err(Error::Data(format!(
                "covariate buffer holds {} entries, expected n*p = {}",
                x.len(),
                n * p
            )));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite entry in dataset".into()));
        }
        Ok(Dataset {
            x,
            n,
            p,
            y,
            has_intercept,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of covariate columns (excluding the implicit intercept).
    pub fn p(&self) -> usize {
        self.p
    }

    /// Length of the coefficient vector: `p`, plus one when an intercept is added.
    pub fn num_coeffs(&self) -> usize {
        self.p + usize::from(self.has_intercept)
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    /// Residual `y_i - x_iᵀβ` with β on the original scale
    /// (`β[0]` is the intercept when present).
    pub fn residual(&self, i: usize, beta: &[f64]) -> f64 {
        let row = self.row(i);
        let (mut acc, slopes) = if self.has_intercept {
            (beta[0], &beta[1..])
        } else {
            (0.0, beta)
        };
        for (xij, bj) in row.iter().zip(slopes) {
            acc += xij * bj;
        }
        self.y[i] - acc
    }

    fn check_beta_len(&self, beta: &[f64]) -> Result<()> {
        if beta.len() != self.num_coeffs() {
            return Err(Error::InvalidParameter(format!(
                "coefficient vector has length {}, design expects {}",
                beta.len(),
                self.num_coeffs()
            )));
        }
        Ok(())
    }
}

/// Column location/scale transform. For a dataset without an intercept the
/// means are held at zero (scale-only), so the fitted model class is unchanged
/// by standardization; with an intercept the mean shift is absorbed by the
/// intercept coefficient on back-transform.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl Standardizer {
    /// Identity transform for `p` columns.
    pub fn identity(p: usize) -> Self {
        Standardizer {
            means: vec![0.0; p],
            sds: vec![1.0; p],
        }
    }

    /// Column means and population standard deviations of the covariates.
    /// Errors with [`Error::Data`] on a zero-variance (constant) column.
    pub fn fit(dataset: &Dataset) -> Result<Self> {
        let (n, p) = (dataset.n, dataset.p);
        let mut means = vec![0.0; p];
        let mut sds = vec![0.0; p];
        for i in 0..n {
            for (j, v) in dataset.row(i).iter().enumerate() {
                means[j] += v;
            }
        }
        for m in &mut means {
            *m /= n as f64;
        }
        for i in 0..n {
            for (j, v) in dataset.row(i).iter().enumerate() {
                let d = v - means[j];
                sds[j] += d * d;
            }
        }
        for (j, s) in sds.iter_mut().enumerate() {
            *s = (*s / n as f64).sqrt();
            if *s == 0.0 {
                return Err(Error::Data(format!(
                    "covariate column {} is constant; only the intercept column may be",
                    j + 1
                )));
            }
        }
        if !dataset.has_intercept {
            // Scale-only: centering would introduce an implicit intercept the
            // model cannot absorb.
            means.iter_mut().for_each(|m| *m = 0.0);
        }
        Ok(Standardizer { means, sds })
    }

    /// Map standardized-scale coefficients to the original scale.
    pub fn back_transform(&self, gamma: &[f64], has_intercept: bool) -> Vec<f64> {
        if has_intercept {
            let mut beta = Vec::with_capacity(gamma.len());
            let mut b0 = gamma[0];
            for (j, g) in gamma[1..].iter().enumerate() {
                let slope = g / self.sds[j];
                b0 -= slope * self.means[j];
                beta.push(slope);
            }
            beta.insert(0, b0);
            beta
        } else {
            gamma
                .iter()
                .enumerate()
                .map(|(j, g)| g / self.sds[j])
                .collect()
        }
    }

    /// Map original-scale coefficients to the standardized scale
    /// (inverse of [`Standardizer::back_transform`]).
    pub fn to_standardized(&self, beta: &[f64], has_intercept: bool) -> Vec<f64> {
        if has_intercept {
            let mut gamma = Vec::with_capacity(beta.len());
            let mut g0 = beta[0];
            for (j, b) in beta[1..].iter().enumerate() {
                gamma.push(b * self.sds[j]);
                g0 += b * self.means[j];
            }
            gamma.insert(0, g0);
            gamma
        } else {
            beta
                .iter()
                .enumerate()
                .map(|(j, b)| b * self.sds[j])
                .collect()
        }
    }
}

/// Fitted coefficients plus the optimizer record.
#[derive(Debug, Clone)]
pub struct FitResult {
    /// Coefficients on the original scale (intercept first when present).
    pub beta_hat: Vec<f64>,
    /// Coefficients on the standardized scale actually optimized over.
    pub beta_std: Vec<f64>,
    pub standardizer: Standardizer,
    pub trace: OptimizeTrace,
    pub loss_spec: LossSpec,
}

/// Flat, JSON-stable summary of a [`FitResult`]; this is the CLI/FFI wire form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub loss: LossSpec,
    pub beta_hat: Vec<f64>,
    pub beta_std: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub final_grad_norm: Option<f64>,
    pub wall_time_seconds: f64,
}

impl From<&FitResult> for FitReport {
    fn from(fit: &FitResult) -> Self {
        FitReport {
            loss: fit.loss_spec,
            beta_hat: fit.beta_hat.clone(),
            beta_std: fit.beta_std.clone(),
            iterations: fit.trace.iterations,
            converged: fit.trace.converged,
            final_grad_norm: fit.trace.grad_norms.last().copied(),
            wall_time_seconds: fit.trace.wall_time,
        }
    }
}

/// Mean loss over the residuals, with β on the original scale.
pub fn empirical_risk(dataset: &Dataset, beta: &[f64], spec: &LossSpec) -> Result<f64> {
    dataset.check_beta_len(beta)?;
    let mut acc = 0.0;
    for i in 0..dataset.n {
        acc += spec.loss(dataset.residual(i, beta));
    }
    Ok(acc / dataset.n as f64)
}

/// Gradient of [`empirical_risk`] with respect to β:
/// `-(1/n) Σ x_i ρ'(y_i - x_iᵀβ)`.
pub fn empirical_grad(dataset: &Dataset, beta: &[f64], spec: &LossSpec) -> Result<Vec<f64>> {
    dataset.check_beta_len(beta)?;
    let m = dataset.num_coeffs();
    let mut g = vec![0.0; m];
    for i in 0..dataset.n {
        let psi = spec.grad(dataset.residual(i, beta))?;
        let row = dataset.row(i);
        if dataset.has_intercept {
            g[0] -= psi;
            for (gj, xij) in g[1..].iter_mut().zip(row) {
                *gj -= xij * psi;
            }
        } else {
            for (gj, xij) in g.iter_mut().zip(row) {
                *gj -= xij * psi;
            }
        }
    }
    let n = dataset.n as f64;
    g.iter_mut().for_each(|v| *v /= n);
    Ok(g)
}

/// Rule-of-thumb multiquadric shape parameter `((p + ln n)/n)^{1/3}`, clamped
/// to `[1e-3, 1]`. Requires `n > p ≥ 1`.
pub fn default_c(n: usize, p: usize) -> f64 {
    let raw = ((p as f64 + (n as f64).ln()) / n as f64).powf(1.0 / 3.0);
    raw.clamp(1e-3, 1.0)
}

/// Convolution-smoothing bandwidth `((p + ln n)/n)^{2/5}`. Requires `n > p ≥ 1`.
pub fn conquer_bandwidth(n: usize, p: usize) -> f64 {
    ((p as f64 + (n as f64).ln()) / n as f64).powf(0.4)
}

// --------------------------------------------------------------------------
// Fitting
// --------------------------------------------------------------------------

/// Standardized design with residual/gradient/risk kernels.
struct Design {
    z: Vec<f64>, // row-major n × m, intercept column first when present
    n: usize,
    m: usize,
    y: Vec<f64>,
}

impl Design {
    fn build(dataset: &Dataset, std: &Standardizer) -> Design {
        let n = dataset.n;
        let m = dataset.num_coeffs();
        let mut z = Vec::with_capacity(n * m);
        for i in 0..n {
            if dataset.has_intercept {
                z.push(1.0);
            }
            for (j, v) in dataset.row(i).iter().enumerate() {
                z.push((v - std.means[j]) / std.sds[j]);
            }
        }
        Design {
            z,
            n,
            m,
            y: dataset.y.clone(),
        }
    }

    fn residuals_into(&self, gamma: &[f64], r: &mut [f64]) {
        let rows = self.z.chunks_exact(self.m);
        for ((ri, yi), row) in r.iter_mut().zip(&self.y).zip(rows) {
            let mut acc = 0.0;
            for (zij, gj) in row.iter().zip(gamma) {
                acc += zij * gj;
            }
            *ri = yi - acc;
        }
    }

    fn risk(&self, gamma: &[f64], spec: &LossSpec, r: &mut [f64]) -> f64 {
        self.residuals_into(gamma, r);
        let mut acc = 0.0;
        for &ri in r.iter() {
            acc += spec.loss(ri);
        }
        acc / self.n as f64
    }

    /// `g = -(1/n) Zᵀ ψ(y - Zγ)`, written into `g`; `r` and `psi` are scratch.
    fn grad(&self, gamma: &[f64], spec: &LossSpec, r: &mut [f64], psi: &mut [f64], g: &mut [f64]) {
        self.residuals_into(gamma, r);
        // Loss gradient is total here: fit() rejects non-smooth specs up front.
        spec.grad_vec(r, psi).expect("smooth loss family");
        g.iter_mut().for_each(|v| *v = 0.0);
        for (w, row) in psi.iter().zip(self.z.chunks_exact(self.m)) {
            for (gj, zij) in g.iter_mut().zip(row) {
                *gj -= zij * w;
            }
        }
        let n = self.n as f64;
        g.iter_mut().for_each(|v| *v /= n);
    }

    /// Row-sum upper bound on the largest eigenvalue of `ZᵀZ/n`.
    fn gram_row_bound(&self) -> f64 {
        let mut gram = vec![0.0; self.m * self.m];
        for i in 0..self.n {
            let row = &self.z[i * self.m..(i + 1) * self.m];
            for a in 0..self.m {
                for b in 0..self.m {
                    gram[a * self.m + b] += row[a] * row[b];
                }
            }
        }
        let n = self.n as f64;
        (0..self.m)
            .map(|a| (0..self.m).map(|b| (gram[a * self.m + b] / n).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Upper bound on the loss curvature `sup_u ρ''(u)` used to size the stable
/// fallback step. For the kth-power families the true supremum is unbounded
/// near the origin; the multiquadric bound at the same shape is used instead.
fn curvature_bound(spec: &LossSpec) -> f64 {
    match spec.family {
        LossFamily::Gmq | LossFamily::SmoothKthPower => 0.5 / spec.shape.max(1e-6),
        LossFamily::ConquerGaussian => 0.398_942_280_401_432_7 / spec.shape,
        LossFamily::ConquerLogistic => 0.25 / spec.shape,
        LossFamily::Expectile | LossFamily::SmoothExpectile | LossFamily::KthPower => {
            2.0 * spec.tau.max(1.0 - spec.tau)
        }
        LossFamily::Check => f64::INFINITY,
    }
}

fn spec_with_shape(spec: &LossSpec, shape: f64) -> LossSpec {
    let mut s = *spec;
    s.shape = shape;
    s
}

/// Geometric continuation ladder from a data-scale shape down to the target.
fn shape_ladder(target: f64, y: &[f64]) -> Vec<f64> {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let sd = (y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
    let start = if sd > 0.0 { sd.max(target) } else { target.max(1.0) };
    let ratio = 10f64.sqrt();
    let mut ladder = Vec::new();
    let mut c = start;
    while c > target * 1.000_000_1 {
        ladder.push(c);
        c /= ratio;
    }
    ladder.push(target);
    ladder
}

/// Fit the linear model under `loss_spec`.
///
/// Covariates are standardized (centering only when an intercept is present),
/// the risk is minimized over standardized coefficients with the BB optimizer
/// under shape continuation, and coefficients are mapped back to the original
/// scale. `config`, when given, supplies the tolerance, iteration budget, step
/// cap and the initial point **in standardized coordinates**; by default the
/// optimization starts from the zero vector.
///
/// A non-converged run is not an error: the result carries
/// `trace.converged = false` and the caller decides.
pub fn fit(
    dataset: &Dataset,
    loss_spec: &LossSpec,
    config: Option<OptimizerConfig>,
) -> Result<FitResult> {
    let started = Instant::now();
    let spec = loss_spec.validate()?;
    if !spec.smooth_everywhere() {
        return Err(Error::InvalidParameter(
            "fit requires a smooth loss (positive shape parameter for the \
             multiquadric and kernel families)"
                .into(),
        ));
    }
    let m = dataset.num_coeffs();
    if dataset.n < m {
        return Err(Error::Data(format!(
            "n = {} observations cannot identify {} coefficients",
            dataset.n, m
        )));
    }
    let std = if dataset.p > 0 {
        Standardizer::fit(dataset)?
    } else {
        Standardizer::identity(0)
    };
    let design = Design::build(dataset, &std);

    let base = match config {
        Some(cfg) => {
            if cfg.beta0.len() != m {
                return Err(Error::InvalidParameter(format!(
                    "initial point has length {}, standardized design expects {}",
                    cfg.beta0.len(),
                    m
                )));
            }
            cfg
        }
        None => OptimizerConfig::new(vec![0.0; m]),
    };
    base.validate()?;

    let ladder = if spec.family.uses_c() || spec.family.uses_h() {
        shape_ladder(spec.shape, &design.y)
    } else {
        vec![spec.shape]
    };

    let mut gamma = base.beta0.clone();
    let mut scratch = vec![0.0; design.n];
    let mut total_norms: Vec<f64> = Vec::new();
    let mut total_steps: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut gram_bound: Option<f64> = None;

    for &shape in &ladder {
        let stage_spec = spec_with_shape(&spec, shape);
        let stage_cfg = OptimizerConfig {
            beta0: gamma.clone(),
            ..base.clone()
        };
        let risk_start = design.risk(&gamma, &stage_spec, &mut scratch);
        let (bb_gamma, bb_trace) = {
            let mut r = vec![0.0; design.n];
            let mut psi = vec![0.0; design.n];
            bb_minimize(
                |b, g| design.grad(b, &stage_spec, &mut r, &mut psi, g),
                &stage_cfg,
            )?
        };
        total_norms.extend_from_slice(&bb_trace.grad_norms);
        total_steps.extend_from_slice(&bb_trace.step_sizes);
        let bb_risk = design.risk(&bb_gamma, &stage_spec, &mut scratch);

        if bb_trace.converged && bb_risk <= risk_start {
            gamma = bb_gamma;
            converged = bb_trace.converged;
            continue;
        }

        // Raw BB stalled or bounced on this rung: vanilla-GD fallback from the
        // rung's starting point at the stable step 1/L.
        let bound = *gram_bound.get_or_insert_with(|| design.gram_row_bound());
        let lipschitz = curvature_bound(&stage_spec) * bound;
        let step = if lipschitz.is_finite() && lipschitz > 0.0 {
            1.0 / lipschitz
        } else {
            1.0
        };
        let gd_cfg = OptimizerConfig {
            beta0: stage_cfg.beta0.clone(),
            max_iter: 2 * base.max_iter,
            ..base.clone()
        };
        let (gd_gamma, gd_trace) = {
            let mut r = vec![0.0; design.n];
            let mut psi = vec![0.0; design.n];
            gd_minimize(
                |b, g| design.grad(b, &stage_spec, &mut r, &mut psi, g),
                &gd_cfg,
                step,
            )?
        };
        total_norms.extend_from_slice(&gd_trace.grad_norms);
        total_steps.extend_from_slice(&gd_trace.step_sizes);
        let gd_risk = design.risk(&gd_gamma, &stage_spec, &mut scratch);
        if bb_risk < gd_risk {
            gamma = bb_gamma;
            converged = bb_trace.converged;
        } else {
            gamma = gd_gamma;
            converged = gd_trace.converged;
        }
    }

    let beta_hat = std.back_transform(&gamma, dataset.has_intercept);
    if beta_hat.iter().any(|b| !b.is_finite()) {
        return Err(Error::Optimization {
            iteration: total_norms.len(),
            message: "non-finite coefficients after back-transform".into(),
        });
    }
    let trace = OptimizeTrace {
        iterations: total_norms.len(),
        converged,
        grad_norms: total_norms,
        step_sizes: total_steps,
        wall_time: started.elapsed().as_secs_f64(),
    };
    Ok(FitResult {
        beta_hat,
        beta_std: gamma,
        standardizer: std,
        trace,
        loss_spec: spec,
    })
}
