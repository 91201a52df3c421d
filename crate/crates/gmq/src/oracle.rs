//! Independent ground-truth engines: exact small-instance quantile regression
//! by subset enumeration, finite-difference derivative checking, and Monte
//! Carlo estimation of the smoothing bias.
//!
//! The exact solver relies on the linear-programming fact that some optimal
//! quantile-regression solution interpolates `m` observations (m = number of
//! coefficients): it enumerates every m-subset with an invertible sub-design,
//! solves the interpolation system, and keeps the candidate with the smallest
//! check risk. No LP solver, nothing shared with the gradient-descent path it
//! is used to audit.

use crate::datagen::{derive_seed, SimModel, SimSpec};
use crate::error::{Error, Result};
use crate::loss::LossSpec;
use crate::model::{empirical_risk, fit, Dataset};
use rayon::prelude::*;

/// Combinatorial guards: C(60,4) subsets with 4x4 solves is the cost ceiling.
pub const MAX_ORACLE_N: usize = 60;
pub const MAX_ORACLE_COEFFS: usize = 4;

/// Exact minimizer certificate from [`exact_qr`].
#[derive(Debug, Clone)]
pub struct OracleResult {
    /// Coefficients on the original scale (intercept first when present).
    pub beta_exact: Vec<f64>,
    /// Check empirical risk at `beta_exact`.
    pub objective: f64,
    /// Observation indices whose interpolation produced the minimizer
    /// (lexicographically smallest among risk ties).
    pub basis_indices: Vec<usize>,
}

/// Solve `A β = b` for small dense `A` (row-major m×m) by Gaussian
/// elimination with partial pivoting. Returns `None` when singular.
fn solve_small(a: &mut [f64], b: &mut [f64], m: usize) -> Option<Vec<f64>> {
    let scale = a
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1.0);
    let tol = 1e-12 * scale;
    for col in 0..m {
        let mut pivot_row = col;
        let mut pivot_val = a[col * m + col].abs();
        for r in col + 1..m {
            let v = a[r * m + col].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = r;
            }
        }
        if pivot_val <= tol {
            return None;
        }
        if pivot_row != col {
            for j in 0..m {
                a.swap(col * m + j, pivot_row * m + j);
            }
            b.swap(col, pivot_row);
        }
        let piv = a[col * m + col];
        for r in col + 1..m {
            let factor = a[r * m + col] / piv;
            if factor == 0.0 {
                continue;
            }
            for j in col..m {
                a[r * m + j] -= factor * a[col * m + j];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; m];
    for col in (0..m).rev() {
        let mut acc = b[col];
        for j in col + 1..m {
            acc -= a[col * m + j] * x[j];
        }
        x[col] = acc / a[col * m + col];
    }
    Some(x)
}

/// Advance `idx` to the next m-combination of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let m = idx.len();
    let mut i = m;
    while i > 0 {
        i -= 1;
        if idx[i] != i + n - m {
            idx[i] += 1;
            for j in i + 1..m {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Exact quantile regression on a small instance by enumerating all
/// interpolating bases.
///
/// Guarded to `n ≤ 60` and at most 4 coefficients; errors with
/// [`Error::Guard`] beyond that and with [`Error::Data`] when every
/// sub-design is singular.
pub fn exact_qr(dataset: &Dataset, tau: f64) -> Result<OracleResult> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "quantile level tau must lie in (0, 1), got {tau}"
        )));
    }
    let n = dataset.n();
    let m = dataset.num_coeffs();
    if n > MAX_ORACLE_N || m > MAX_ORACLE_COEFFS {
        return Err(Error::Guard(format!(
            "exact oracle accepts n <= {MAX_ORACLE_N} and at most {MAX_ORACLE_COEFFS} \
             coefficients; got n = {n}, coefficients = {m}"
        )));
    }
    if n < m {
        return Err(Error::Data(format!(
            "need at least {m} observations to interpolate {m} coefficients"
        )));
    }
    let check = LossSpec::check(tau)?;

    let design_row = |i: usize, out: &mut Vec<f64>| {
        out.clear();
        if dataset.has_intercept {
            out.push(1.0);
        }
        out.extend_from_slice(dataset.row(i));
    };

    let mut idx: Vec<usize> = (0..m).collect();
    let mut best: Option<(f64, Vec<f64>, Vec<usize>)> = None;
    let mut sub = vec![0.0; m * m];
    let mut rhs = vec![0.0; m];
    let mut row_buf = Vec::with_capacity(m);
    loop {
        for (r, &i) in idx.iter().enumerate() {
            design_row(i, &mut row_buf);
            sub[r * m..(r + 1) * m].copy_from_slice(&row_buf);
            rhs[r] = dataset.y()[i];
        }
        if let Some(beta) = solve_small(&mut sub, &mut rhs, m) {
            if beta.iter().all(|v| v.is_finite()) {
                let risk = empirical_risk(dataset, &beta, &check)?;
                let better = match &best {
                    None => true,
                    Some((r, _, _)) => risk < *r,
                };
                if better {
                    best = Some((risk, beta, idx.clone()));
                }
            }
        }
        if !next_combination(&mut idx, n) {
            break;
        }
    }
    match best {
        Some((objective, beta_exact, basis_indices)) => Ok(OracleResult {
            beta_exact,
            objective,
            basis_indices,
        }),
        None => Err(Error::Data(
            "every interpolation sub-design is singular; design lacks full column rank".into(),
        )),
    }
}

/// Worst relative disagreement between an analytic gradient and central
/// finite differences of `f` over the given points.
///
/// The step is `1e-6·max(1, ‖β‖₂)`; each component error is scaled by
/// `max(1, |gradient component|)`.
pub fn fd_check<F, G>(f: F, grad: G, points: &[Vec<f64>]) -> f64
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let mut worst = 0.0f64;
    for point in points {
        let norm = point.iter().map(|v| v * v).sum::<f64>().sqrt();
        let h = 1e-6 * norm.max(1.0);
        let g = grad(point);
        let mut probe = point.clone();
        for j in 0..point.len() {
            let orig = probe[j];
            probe[j] = orig + h;
            let fp = f(&probe);
            probe[j] = orig - h;
            let fm = f(&probe);
            probe[j] = orig;
            let fd = (fp - fm) / (2.0 * h);
            let err = (fd - g[j]).abs() / g[j].abs().max(1.0);
            worst = worst.max(err);
        }
    }
    worst
}

/// One row of a [`bias_estimate`] table.
#[derive(Debug, Clone)]
pub struct BiasRow {
    pub c: f64,
    pub mean_error: f64,
    pub sd_error: f64,
}

/// Smoothing-bias table over a shape grid.
#[derive(Debug, Clone)]
pub struct BiasTable {
    pub rows: Vec<BiasRow>,
    /// Least-squares slope of `ln(mean_error - floor)` against `ln(c²|ln c|)`,
    /// with the floor taken as the smallest mean error on the grid. NaN when
    /// fewer than two points rise above the floor.
    pub slope: f64,
}

/// Monte Carlo estimate of the smoothing bias `‖β̂_c - β*‖₂` over a grid of
/// shape parameters at fixed large `n`.
///
/// Requires the homoskedastic design, whose quantile-centered errors make β*
/// the exact conditional-quantile coefficient vector. Each replication draws
/// one dataset and fits it at every `c` (common random numbers), so the grid
/// ordering reflects the deterministic bias rather than sampling noise. Fits
/// include an intercept — its true value is zero by the centering
/// construction, and the smoothing bias concentrates on it when covariates
/// have mean zero — so errors are measured against `(0, β*)`.
pub fn bias_estimate(
    template: &SimSpec,
    c_grid: &[f64],
    n_large: usize,
    replications: usize,
) -> Result<BiasTable> {
    if template.model != SimModel::Homoskedastic {
        return Err(Error::InvalidParameter(
            "bias estimation requires the homoskedastic design".into(),
        ));
    }
    if c_grid.is_empty() || replications == 0 {
        return Err(Error::InvalidParameter(
            "need a nonempty shape grid and at least one replication".into(),
        ));
    }
    for &c in c_grid {
        if c.is_nan() || c <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "shape grid entries must be positive, got {c}"
            )));
        }
    }
    let mut spec = template.clone();
    spec.n = n_large;
    spec.validate()?;

    let errors: Vec<Vec<f64>> = (0..replications)
        .into_par_iter()
        .map(|rep| -> Result<Vec<f64>> {
            let rep_spec = SimSpec {
                seed: derive_seed(spec.seed, rep as u64),
                ..spec.clone()
            };
            let (base, beta_star) = rep_spec.generate()?;
            // Refit with an intercept; truth gains a leading zero.
            let mut x = Vec::with_capacity(base.n() * base.p());
            for i in 0..base.n() {
                x.extend_from_slice(base.row(i));
            }
            let ds = Dataset::new(x, base.p(), base.y().to_vec(), true)?;
            let mut truth = Vec::with_capacity(beta_star.len() + 1);
            truth.push(0.0);
            truth.extend_from_slice(&beta_star);
            let mut errs = Vec::with_capacity(c_grid.len());
            for &c in c_grid {
                let result = fit(&ds, &LossSpec::gmq(rep_spec.tau, c)?, None)?;
                let err = result
                    .beta_hat
                    .iter()
                    .zip(&truth)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                errs.push(err);
            }
            Ok(errs)
        })
        .collect::<Result<Vec<_>>>()?;

    let reps = replications as f64;
    let mut rows = Vec::with_capacity(c_grid.len());
    for (j, &c) in c_grid.iter().enumerate() {
        let mean = errors.iter().map(|e| e[j]).sum::<f64>() / reps;
        let var = errors
            .iter()
            .map(|e| (e[j] - mean) * (e[j] - mean))
            .sum::<f64>()
            / reps;
        rows.push(BiasRow {
            c,
            mean_error: mean,
            sd_error: var.sqrt(),
        });
    }

    let floor = rows
        .iter()
        .map(|r| r.mean_error)
        .fold(f64::INFINITY, f64::min);
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.mean_error > floor)
        .map(|r| {
            let predictor = r.c * r.c * r.c.ln().abs();
            (predictor.ln(), (r.mean_error - floor).ln())
        })
        .collect();
    let slope = if pts.len() >= 2 {
        let nx = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / nx;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / nx;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        sxy / sxx
    } else {
        f64::NAN
    };
    Ok(BiasTable { rows, slope })
}
