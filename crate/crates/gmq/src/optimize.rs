//! Gradient descent with Barzilai-Borwein adaptive step size, plus a
//! fixed-step vanilla variant used as bootstrap and fallback.
//!
//! The BB iteration is deliberately raw: no line search and no non-monotone
//! safeguard, with the step capped at `step_cap` (default 100) and a unit-step
//! fallback whenever the first BB ratio is nonpositive. Robustness for hard
//! shape parameters is layered on top by callers (see `model::fit`), not here.

use crate::error::{Error, Result};
use std::time::Instant;

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 5000;
pub const DEFAULT_STEP_CAP: f64 = 100.0;

/// Denominators below this trigger the unit-step fallback instead of
/// producing an infinite BB ratio.
const DENOM_GUARD: f64 = 1e-30;

/// Starting point and termination policy for a single minimization run.
#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    /// Initial iterate.
    pub beta0: Vec<f64>,
    /// Stop once the gradient 2-norm falls below this threshold.
    pub tol_delta: f64,
    /// Hard iteration budget.
    pub max_iter: usize,
    /// Upper bound on the BB step size.
    pub step_cap: f64,
}

impl OptimizerConfig {
    pub fn new(beta0: Vec<f64>) -> Self {
        OptimizerConfig {
            beta0,
            tol_delta: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            step_cap: DEFAULT_STEP_CAP,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol_delta = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.tol_delta.is_nan() || self.tol_delta <= 0.0 {
            return Err(Error::InvalidParameter(
                "tol_delta must be positive".into(),
            ));
        }
        if self.max_iter < 2 {
            return Err(Error::InvalidParameter("max_iter must be at least 2".into()));
        }
        if self.step_cap.is_nan() || self.step_cap <= 0.0 {
            return Err(Error::InvalidParameter("step_cap must be positive".into()));
        }
        if self.beta0.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidParameter(
                "initial point must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Per-run record: one gradient norm and one applied step per iteration.
#[derive(Debug, Clone)]
pub struct OptimizeTrace {
    /// Number of parameter updates applied.
    pub iterations: usize,
    /// `grad_norms[t-1]` is the gradient norm at the t-th iterate.
    pub grad_norms: Vec<f64>,
    /// `step_sizes[t-1]` is the step that produced the t-th iterate
    /// (1 for the bootstrap step).
    pub step_sizes: Vec<f64>,
    pub converged: bool,
    /// Wall-clock seconds for the run (monotonic clock).
    pub wall_time: f64,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn ensure_finite(g: &[f64], iteration: usize) -> Result<()> {
    if g.iter().any(|x| !x.is_finite()) {
        return Err(Error::Optimization {
            iteration,
            message: "non-finite gradient".into(),
        });
    }
    Ok(())
}

/// Minimize a smooth convex function given its gradient, using BB steps.
///
/// The first update is a plain unit gradient step `β¹ = β⁰ - ∇R(β⁰)`; from
/// then on the step is `min{η₁, η₂, step_cap}` when `η₁ > 0` and 1 otherwise,
/// where `η₁ = ⟨δ,δ⟩/⟨δ,g⟩`, `η₂ = ⟨δ,g⟩/⟨g,g⟩` are built from the last
/// iterate difference `δ` and gradient difference `g`. One gradient
/// evaluation per iteration: the gradient used for the difference is reused
/// for the update.
///
/// Returns the last iterate. If the gradient difference vanishes between two
/// distinct iterates the run stops and is reported converged (the gradient is
/// not changing).
pub fn bb_minimize<G>(mut grad_fn: G, config: &OptimizerConfig) -> Result<(Vec<f64>, OptimizeTrace)>
where
    G: FnMut(&[f64], &mut [f64]),
{
    config.validate()?;
    let start = Instant::now();
    let dim = config.beta0.len();
    let mut beta = config.beta0.clone();
    let mut beta_prev = vec![0.0; dim];
    let mut g = vec![0.0; dim];
    let mut g_prev = vec![0.0; dim];

    grad_fn(&beta, &mut g);
    ensure_finite(&g, 0)?;
    if norm2(&g) < config.tol_delta {
        return Ok((
            beta,
            OptimizeTrace {
                iterations: 0,
                grad_norms: vec![],
                step_sizes: vec![],
                converged: true,
                wall_time: start.elapsed().as_secs_f64(),
            },
        ));
    }

    // Bootstrap: unit gradient step.
    beta_prev.copy_from_slice(&beta);
    g_prev.copy_from_slice(&g);
    for i in 0..dim {
        beta[i] -= g[i];
    }
    let mut grad_norms = Vec::with_capacity(32);
    let mut step_sizes = Vec::with_capacity(32);
    step_sizes.push(1.0);
    let mut t = 1usize;
    let converged;

    loop {
        grad_fn(&beta, &mut g);
        ensure_finite(&g, t)?;
        let norm = norm2(&g);
        grad_norms.push(norm);
        if norm < config.tol_delta {
            converged = true;
            break;
        }
        if t >= config.max_iter {
            converged = false;
            break;
        }

        let mut dd = 0.0;
        let mut dg = 0.0;
        let mut gg = 0.0;
        for i in 0..dim {
            let dv = beta[i] - beta_prev[i];
            let gd = g[i] - g_prev[i];
            dd += dv * dv;
            dg += dv * gd;
            gg += gd * gd;
        }
        if gg == 0.0 {
            // Gradient unchanged between distinct iterates: the BB ratios are
            // undefined and no curvature information is available; stop.
            converged = true;
            break;
        }
        let eta = if dg.abs() < DENOM_GUARD || gg < DENOM_GUARD {
            1.0
        } else {
            let eta1 = dd / dg;
            if eta1 > 0.0 {
                eta1.min(dg / gg).min(config.step_cap)
            } else {
                1.0
            }
        };

        for i in 0..dim {
            let b = beta[i];
            beta_prev[i] = b;
            g_prev[i] = g[i];
            beta[i] = b - eta * g[i];
        }
        step_sizes.push(eta);
        t += 1;
    }

    Ok((
        beta,
        OptimizeTrace {
            iterations: t,
            grad_norms,
            step_sizes,
            converged,
            wall_time: start.elapsed().as_secs_f64(),
        },
    ))
}

/// Fixed-step gradient descent with the same termination contract as
/// [`bb_minimize`].
///
/// `step = 0` is accepted and degenerates to returning `β⁰` unconverged after
/// `max_iter` iterations.
pub fn gd_minimize<G>(
    mut grad_fn: G,
    config: &OptimizerConfig,
    step: f64,
) -> Result<(Vec<f64>, OptimizeTrace)>
where
    G: FnMut(&[f64], &mut [f64]),
{
    config.validate()?;
    if !step.is_finite() || step < 0.0 {
        return Err(Error::InvalidParameter(
            "step size must be a nonnegative real".into(),
        ));
    }
    let start = Instant::now();
    let dim = config.beta0.len();
    let mut beta = config.beta0.clone();
    let mut g = vec![0.0; dim];

    grad_fn(&beta, &mut g);
    ensure_finite(&g, 0)?;
    if norm2(&g) < config.tol_delta {
        return Ok((
            beta,
            OptimizeTrace {
                iterations: 0,
                grad_norms: vec![],
                step_sizes: vec![],
                converged: true,
                wall_time: start.elapsed().as_secs_f64(),
            },
        ));
    }

    let mut grad_norms = Vec::with_capacity(32);
    let mut step_sizes = Vec::with_capacity(32);
    let mut t = 0usize;
    let converged;
    loop {
        for i in 0..dim {
            beta[i] -= step * g[i];
        }
        step_sizes.push(step);
        t += 1;
        grad_fn(&beta, &mut g);
        ensure_finite(&g, t)?;
        let norm = norm2(&g);
        grad_norms.push(norm);
        if norm < config.tol_delta {
            converged = true;
            break;
        }
        if t >= config.max_iter {
            converged = false;
            break;
        }
    }

    Ok((
        beta,
        OptimizeTrace {
            iterations: t,
            grad_norms,
            step_sizes,
            converged,
            wall_time: start.elapsed().as_secs_f64(),
        },
    ))
}
