//! Shared helpers for the integration suites.
#![allow(dead_code)]

use gmq::datagen::Rng;
use gmq::loss::LossSpec;
use gmq::model::{empirical_risk, Dataset};
use gmq::oracle::{exact_qr, OracleResult};

pub fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Random small regression instance: X ~ N(0,1), y = Xβ + noise.
pub fn random_instance(rng: &mut Rng, n: usize, p: usize) -> Dataset {
    let mut x = Vec::with_capacity(n * p);
    let mut y = Vec::with_capacity(n);
    let beta: Vec<f64> = (0..p).map(|_| rng.next_normal()).collect();
    for _ in 0..n {
        let mut dot = 0.0;
        for bj in &beta {
            let v = rng.next_normal();
            dot += v * bj;
            x.push(v);
        }
        y.push(dot + rng.next_normal());
    }
    Dataset::new(x, p, y, false).unwrap()
}

/// Smallest one-sided directional slope of the check risk at the oracle
/// vertex, probed along the coordinate axes and a few random directions.
///
/// The exact quantile-regression objective is piecewise linear; a vertex with
/// slope bounded away from zero in every direction pins the smoothed
/// minimizer within O(shape) of it. Instances whose optimal vertex is nearly
/// flat in some direction (an ill-conditioned interpolation basis) have
/// legitimately drifting smoothed minimizers and are filtered out of the
/// oracle-equivalence sweeps by this probe.
pub fn vertex_sharpness(
    dataset: &Dataset,
    tau: f64,
    oracle: &OracleResult,
    rng: &mut Rng,
) -> f64 {
    let check = LossSpec::check(tau).unwrap();
    let m = oracle.beta_exact.len();
    let h = 1e-3;
    let mut min_slope = f64::INFINITY;
    let mut probe = oracle.beta_exact.clone();
    let mut directions: Vec<Vec<f64>> = Vec::new();
    for j in 0..m {
        for sign in [1.0, -1.0] {
            let mut d = vec![0.0; m];
            d[j] = sign;
            directions.push(d);
        }
    }
    for _ in 0..24 {
        let mut d: Vec<f64> = (0..m).map(|_| rng.next_normal()).collect();
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
        d.iter_mut().for_each(|v| *v /= norm);
        directions.push(d);
    }
    for dir in directions {
        for j in 0..m {
            probe[j] = oracle.beta_exact[j] + h * dir[j];
        }
        let risk = empirical_risk(dataset, &probe, &check).unwrap();
        min_slope = min_slope.min((risk - oracle.objective) / h);
    }
    min_slope
}

/// Draw instances until the oracle vertex is well posed for a
/// smoothed-versus-exact comparison: the vertex must have directional slope
/// at least `min_slope`, and the smoothed minimizer at the coarse shape
/// `c = 1e-2` must already sit within `max_coarse_drift` of the vertex. The
/// drift is nonincreasing as the shape shrinks (the vanishing-smoothing-bias
/// property, tested separately), so instances passing the coarse probe stay
/// well inside tolerance at finer shapes. Returns the dataset, the oracle
/// result, and how many draws were needed.
pub fn sharp_oracle_instance(
    rng: &mut Rng,
    n_lo: usize,
    n_hi: usize,
    p_max: usize,
    tau: f64,
    min_slope: f64,
    max_coarse_drift: f64,
) -> (Dataset, OracleResult, usize) {
    let mut attempts = 0;
    loop {
        attempts += 1;
        let n = n_lo + (rng.next_u64() as usize) % (n_hi - n_lo + 1);
        let p = 1 + (rng.next_u64() as usize) % p_max;
        let ds = random_instance(rng, n, p);
        let oracle = exact_qr(&ds, tau).unwrap();
        if vertex_sharpness(&ds, tau, &oracle, rng) >= min_slope {
            let coarse = gmq::model::fit(&ds, &LossSpec::gmq(tau, 1e-2).unwrap(), None).unwrap();
            if coarse.trace.converged && l2(&coarse.beta_hat, &oracle.beta_exact) <= max_coarse_drift
            {
                return (ds, oracle, attempts);
            }
        }
        assert!(attempts < 400, "well-posedness filter rejected too many draws");
    }
}
