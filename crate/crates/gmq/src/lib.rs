//! Smoothed quantile and expectile regression with multiquadric surrogate
//! losses, fitted by gradient descent with Barzilai-Borwein step sizes.
//!
//! The check loss of quantile regression is not differentiable, which rules
//! out plain gradient methods. This crate replaces it with the multiquadric
//! surrogate `(2τ-1)u/2 + √(c²+u²)/2` — the upper branch of a hyperbola whose
//! asymptotes are the check loss's two linear pieces — which is globally
//! convex, infinitely smooth, and collapses back to the check loss at `c = 0`.
//! Because its derivatives involve only algebraic operations, gradient
//! evaluation is cheaper than for convolution-kernel ("conquer") smoothing,
//! whose gradient needs the normal CDF or an exponential per residual; the
//! same geometric construction also smooths expectile and kth-power-expectile
//! losses.
//!
//! Modules:
//! - [`loss`]: loss families and their first/second derivatives, scalar and
//!   vectorized.
//! - [`optimize`]: the BB optimizer and a fixed-step fallback.
//! - [`model`]: datasets, standardization, empirical risk, and [`model::fit`].
//! - [`datagen`]: seeded synthetic data for the simulation designs.
//! - [`oracle`]: exact small-instance quantile regression, finite-difference
//!   checks, and smoothing-bias estimation.
//! - [`cli`]: the `gmq` command-line front end (simulate / fit / benchmarks).
//! - [`special`]: self-contained normal CDF/quantile machinery.
//! - [`io`]: dataset CSV and truth-sidecar JSON formats.

pub mod cli;
pub mod datagen;
pub mod error;
pub mod io;
pub mod loss;
pub mod model;
pub mod optimize;
pub mod oracle;
pub mod special;

pub use error::{Error, Result};
pub use loss::{ConquerKernel, LossFamily, LossSpec};
pub use model::{
    conquer_bandwidth, default_c, empirical_grad, empirical_risk, fit, Dataset, FitReport,
    FitResult, Standardizer,
};
pub use optimize::{bb_minimize, gd_minimize, OptimizeTrace, OptimizerConfig};
