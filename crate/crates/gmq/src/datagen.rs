//! Seeded synthetic data for the three simulation designs (homoskedastic,
//! linear-scale and quadratic-scale heteroskedastic) under N(0,4) or t₂
//! errors, with the error's τ-quantile subtracted so the conditional
//! τ-quantile of the response is exactly the linear predictor.
//!
//! Randomness comes from a self-contained xoshiro256++ generator seeded
//! through SplitMix64, so identical `SimSpec`s produce bit-identical datasets
//! on every platform. Normal deviates use the Marsaglia polar method (plain
//! arithmetic plus `ln`/`sqrt`), and t₂ deviates are built from three
//! independent normals as `Z₀/√((Z₁²+Z₂²)/2)`.

use crate::error::{Error, Result};
use crate::model::Dataset;
use crate::special::normal_quantile;
use serde::{Deserialize, Serialize};

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent stream seed from a base seed and a stream index.
///
/// Used to hand each replication of a Monte Carlo sweep its own generator
/// so replications can run concurrently yet reproducibly.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut s = seed ^ stream.wrapping_mul(0xA24B_AED4_963E_E407);
    splitmix64(&mut s);
    splitmix64(&mut s)
}

/// xoshiro256++ generator (Blackman–Vigna), seeded via SplitMix64.
#[derive(Debug, Clone)]
pub struct Rng {
    s: [u64; 4],
    spare_normal: Option<f64>,
}

impl Rng {
    pub fn seed_from(seed: u64) -> Self {
        let mut st = seed;
        let mut s = [0u64; 4];
        for slot in &mut s {
            *slot = splitmix64(&mut st);
        }
        if s == [0, 0, 0, 0] {
            s[0] = 1; // all-zero state is the one fixed point of xoshiro
        }
        Rng {
            s,
            spare_normal: None,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[0]
            .wrapping_add(self.s[3])
            .rotate_left(23)
            .wrapping_add(self.s[0]);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform deviate in [0, 1) with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal deviate (Marsaglia polar method, spare cached).
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.next_f64() - 1.0;
            let v = 2.0 * self.next_f64() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let m = (-2.0 * s.ln() / s).sqrt();
                self.spare_normal = Some(v * m);
                return u * m;
            }
        }
    }
}

/// Error law of the simulation designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorDist {
    /// Gaussian with mean 0 and variance 4.
    #[serde(rename = "normal-0-4")]
    Normal0_4,
    /// Student t with 2 degrees of freedom (infinite variance).
    #[serde(rename = "student-t2")]
    StudentT2,
}

impl ErrorDist {
    pub fn sample(self, rng: &mut Rng) -> f64 {
        match self {
            ErrorDist::Normal0_4 => 2.0 * rng.next_normal(),
            ErrorDist::StudentT2 => {
                let z0 = rng.next_normal();
                let z1 = rng.next_normal();
                let z2 = rng.next_normal();
                z0 / ((z1 * z1 + z2 * z2) / 2.0).sqrt()
            }
        }
    }

    /// Density, used by tests to size sample-quantile tolerances.
    pub fn pdf(self, x: f64) -> f64 {
        match self {
            ErrorDist::Normal0_4 => crate::special::normal_pdf(x / 2.0) / 2.0,
            ErrorDist::StudentT2 => {
                let b = 1.0 + x * x / 2.0;
                1.0 / (2.0 * std::f64::consts::SQRT_2 * b * b.sqrt())
            }
        }
    }
}

/// Quantile function of the error law: `2·Φ⁻¹(τ)` for N(0,4) and the closed
/// form `(2τ-1)/√(2τ(1-τ))` for t₂.
pub fn error_quantile(dist: ErrorDist, tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "quantile level tau must lie in (0, 1), got {tau}"
        )));
    }
    Ok(match dist {
        ErrorDist::Normal0_4 => 2.0 * normal_quantile(tau),
        ErrorDist::StudentT2 => (2.0 * tau - 1.0) / (2.0 * tau * (1.0 - tau)).sqrt(),
    })
}

/// Generating model for the response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimModel {
    /// `y = xᵀβ* + (ε - F⁻¹(τ))`, no intercept.
    Homoskedastic,
    /// `y = β₀* + xᵀβ* + (0.5·x_p + 1)(ε - F⁻¹(τ))`.
    LinearScale,
    /// `y = β₀* + xᵀβ* + 0.5((x_p + 1)² + 1)(ε - F⁻¹(τ))`.
    QuadraticScale,
}

impl SimModel {
    /// Whether the design carries an intercept term.
    pub fn has_intercept(self) -> bool {
        !matches!(self, SimModel::Homoskedastic)
    }
}

/// One response value given a covariate row and a raw error draw.
///
/// `tau_quantile` is `F⁻¹(τ)` of the error law; subtracting it centers the
/// error's τ-quantile at zero. The heteroskedastic designs multiply the
/// centered error by a factor of the last covariate, so forcing `x_p = -2`
/// under [`SimModel::LinearScale`] returns exactly `β₀* + xᵀβ*`.
pub fn response(
    model: SimModel,
    x_row: &[f64],
    eps: f64,
    tau_quantile: f64,
    beta_star: &[f64],
    beta0_star: f64,
) -> f64 {
    let linear: f64 = x_row.iter().zip(beta_star).map(|(x, b)| x * b).sum();
    let centered = eps - tau_quantile;
    match model {
        SimModel::Homoskedastic => linear + centered,
        SimModel::LinearScale => {
            let xp = *x_row.last().expect("p >= 1");
            beta0_star + linear + (0.5 * xp + 1.0) * centered
        }
        SimModel::QuadraticScale => {
            let xp = *x_row.last().expect("p >= 1");
            let f = xp + 1.0;
            beta0_star + linear + 0.5 * (f * f + 1.0) * centered
        }
    }
}

/// Full description of one synthetic dataset; equal specs generate
/// bit-identical data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub model: SimModel,
    pub n: usize,
    pub p: usize,
    pub tau: f64,
    pub error_dist: ErrorDist,
    /// True slope coefficients (defaults to all ones).
    pub beta_star: Vec<f64>,
    /// True intercept for the heteroskedastic designs.
    pub beta0_star: f64,
    pub seed: u64,
}

impl SimSpec {
    /// Spec with the default truth β* = (1, …, 1), β₀* = 1.
    pub fn new(
        model: SimModel,
        n: usize,
        p: usize,
        tau: f64,
        error_dist: ErrorDist,
        seed: u64,
    ) -> Self {
        SimSpec {
            model,
            n,
            p,
            tau,
            error_dist,
            beta_star: vec![1.0; p],
            beta0_star: 1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if self.p == 0 {
            return Err(Error::InvalidParameter("p must be at least 1".into()));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "quantile level tau must lie in (0, 1), got {}",
                self.tau
            )));
        }
        if self.beta_star.len() != self.p {
            return Err(Error::InvalidParameter(format!(
                "beta_star has length {}, expected p = {}",
                self.beta_star.len(),
                self.p
            )));
        }
        if self.beta_star.iter().any(|b| !b.is_finite()) || !self.beta0_star.is_finite() {
            return Err(Error::InvalidParameter(
                "true coefficients must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Derived spec for one replication of a Monte Carlo sweep.
    pub fn for_replication(&self, rep: u64) -> SimSpec {
        SimSpec {
            seed: derive_seed(self.seed, rep),
            ..self.clone()
        }
    }

    /// Draw the dataset and return it with the true coefficient vector the
    /// estimator is benchmarked against: β* itself for the homoskedastic
    /// design, `(β₀*, β*)` for the heteroskedastic designs (the centered
    /// error keeps the conditional τ-quantile at the linear predictor
    /// wherever the scale factor is positive).
    ///
    /// Covariates are i.i.d. standard normal, drawn row by row with the
    /// error draw following each covariate row.
    pub fn generate(&self) -> Result<(Dataset, Vec<f64>)> {
        self.validate()?;
        let fq = error_quantile(self.error_dist, self.tau)?;
        let mut rng = Rng::seed_from(self.seed);
        let mut x = Vec::with_capacity(self.n * self.p);
        let mut y = Vec::with_capacity(self.n);
        let mut row = vec![0.0; self.p];
        for _ in 0..self.n {
            for slot in &mut row {
                *slot = rng.next_normal();
            }
            x.extend_from_slice(&row);
            let eps = self.error_dist.sample(&mut rng);
            y.push(response(
                self.model,
                &row,
                eps,
                fq,
                &self.beta_star,
                self.beta0_star,
            ));
        }
        let dataset = Dataset::new(x, self.p, y, self.model.has_intercept())?;
        let truth = match self.model {
            SimModel::Homoskedastic => self.beta_star.clone(),
            _ => {
                let mut t = Vec::with_capacity(self.p + 1);
                t.push(self.beta0_star);
                t.extend_from_slice(&self.beta_star);
                t
            }
        };
        Ok((dataset, truth))
    }
}
