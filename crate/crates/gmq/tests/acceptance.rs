//! Acceptance suite: one test per release criterion, each printing a
//! `[PASS]`/`[FAIL]` line (visible with `cargo test --test acceptance --
//! --nocapture`) and enforcing both the numeric threshold and its runtime
//! budget.

mod common;

use common::{l2, sharp_oracle_instance};
use gmq::cli::{derivative_bench, regression_bench, rmse_scan, BenchRegressionArgs, DistArg,
    MethodArg, ModelArg};
use gmq::datagen::{ErrorDist, Rng, SimModel, SimSpec};
use gmq::loss::{self, LossSpec};
use gmq::model::{empirical_grad, empirical_risk, fit};
use gmq::oracle::{bias_estimate, fd_check};
use std::time::Instant;

fn criterion<F>(id: u32, name: &str, budget_seconds: f64, body: F)
where
    F: FnOnce() -> Result<String, String>,
{
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed().as_secs_f64();
    match outcome {
        Ok(detail) => {
            println!(
                "[PASS] criterion {id} ({name}): {detail} [{elapsed:.2}s / budget {budget_seconds}s]"
            );
            assert!(
                elapsed < budget_seconds,
                "criterion {id} exceeded its runtime budget: {elapsed:.2}s >= {budget_seconds}s"
            );
        }
        Err(msg) => {
            println!("[FAIL] criterion {id} ({name}): {msg} [{elapsed:.2}s]");
            panic!("criterion {id} failed: {msg}");
        }
    }
}

fn grid_u(points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| -50.0 + 100.0 * i as f64 / (points - 1) as f64)
        .collect()
}

const TAUS: [f64; 3] = [0.1, 0.5, 0.9];
const SHAPES: [f64; 4] = [1e-3, 1e-2, 1e-1, 1.0];

#[test]
fn acceptance_01_smoothing_gap_bound() {
    criterion(1, "smoothing gap bound", 1.0, || {
        let us = grid_u(10_000);
        let mut checked = 0usize;
        for &c in &SHAPES {
            for &tau in &TAUS {
                for &u in &us {
                    let gap = loss::gmq_loss(u, tau, c) - loss::check_loss(u, tau);
                    let bound = loss::smoothing_gap_bound(u, c);
                    if gap < -1e-12 || gap > bound * (1.0 + 1e-12) {
                        return Err(format!(
                            "gap {gap} outside [0, {bound}] at u={u}, tau={tau}, c={c}"
                        ));
                    }
                    checked += 1;
                }
                // equality at the origin
                let gap0 = loss::gmq_loss(0.0, tau, c) - loss::check_loss(0.0, tau);
                if gap0 != loss::smoothing_gap_bound(0.0, c) {
                    return Err(format!("gap at 0 is {gap0}, bound {}", c / 2.0));
                }
            }
        }
        Ok(format!("0 <= gap <= bound on {checked} grid points, equality at u=0"))
    });
}

#[test]
fn acceptance_02_hyperbola_identity() {
    criterion(2, "hyperbola identity", 1.0, || {
        let us = grid_u(10_000);
        let mut worst = 0.0f64;
        for &c in &SHAPES {
            let want = c * c / 4.0;
            for &tau in &TAUS {
                for &u in &us {
                    let (g1, g2) = loss::gmq_asymptote_gaps(u, tau, c);
                    let rel = ((g1 * g2 - want) / want).abs();
                    worst = worst.max(rel);
                    if rel >= 1e-10 {
                        return Err(format!(
                            "product off by rel {rel} at u={u}, tau={tau}, c={c}"
                        ));
                    }
                }
            }
            // The conjugate-form gaps are the asymptote distances of the loss
            // itself: tie them to direct subtraction where that is stable.
            for &tau in &TAUS {
                for &u in &[-2.0, -0.5, 0.0, 0.7, 2.0] {
                    let y = loss::gmq_loss(u, tau, c);
                    let (g1, g2) = loss::gmq_asymptote_gaps(u, tau, c);
                    let d1 = (y - tau * u - g1).abs();
                    let d2 = (y - (tau - 1.0) * u - g2).abs();
                    if d1 > 1e-10 || d2 > 1e-10 {
                        return Err(format!("gap factors disagree with the loss at u={u}"));
                    }
                }
            }
        }
        Ok(format!("max relative defect {worst:.2e} < 1e-10"))
    });
}

#[test]
fn acceptance_03_derivative_oracle() {
    criterion(3, "finite-difference derivative oracle", 5.0, || {
        let points: Vec<Vec<f64>> = [-2.7, -1.1, -0.3, -0.05, 0.05, 0.3, 1.1, 2.7]
            .iter()
            .map(|&u| vec![u])
            .collect();
        let smooth_specs = [
            LossSpec::gmq(0.3, 0.05).unwrap(),
            LossSpec::gmq(0.9, 0.5).unwrap(),
            LossSpec::smooth_expectile(0.7, 0.05).unwrap(),
            LossSpec::smooth_kth_power(0.3, 0.05, 1.5).unwrap(),
            LossSpec::smooth_kth_power(0.9, 0.1, 2.0).unwrap(),
            LossSpec::conquer_gaussian(0.5, 0.2).unwrap(),
            LossSpec::conquer_logistic(0.1, 0.2).unwrap(),
            LossSpec::expectile(0.75).unwrap(),
            LossSpec::kth_power(0.25, 1.5).unwrap(),
        ];
        let mut worst = 0.0f64;
        for spec in &smooth_specs {
            let err = fd_check(
                |b| spec.loss(b[0]),
                |b| vec![spec.grad(b[0]).unwrap()],
                &points,
            );
            worst = worst.max(err);
            if err >= 1e-6 {
                return Err(format!("{spec:?}: loss/grad disagreement {err}"));
            }
            // Second derivative against differences of the first.
            let err2 = fd_check(
                |b| spec.grad(b[0]).unwrap(),
                |b| vec![spec.hess(b[0]).unwrap()],
                &points,
            );
            worst = worst.max(err2);
            if err2 >= 1e-6 {
                return Err(format!("{spec:?}: grad/hess disagreement {err2}"));
            }
        }
        // Empirical gradient on seeded datasets (n=50, p=3).
        let mut rng = Rng::seed_from(99);
        for (tau, risk_spec) in [
            (0.7, LossSpec::gmq(0.7, 0.05).unwrap()),
            (0.3, LossSpec::conquer_gaussian(0.3, 0.2).unwrap()),
            (0.5, LossSpec::smooth_expectile(0.5, 0.1).unwrap()),
        ] {
            let spec = SimSpec::new(SimModel::Homoskedastic, 50, 3, tau, ErrorDist::Normal0_4,
                rng.next_u64());
            let (ds, _) = spec.generate().unwrap();
            let pts: Vec<Vec<f64>> = (0..6)
                .map(|_| (0..3).map(|_| rng.next_normal()).collect())
                .collect();
            let err = fd_check(
                |b| empirical_risk(&ds, b, &risk_spec).unwrap(),
                |b| empirical_grad(&ds, b, &risk_spec).unwrap(),
                &pts,
            );
            worst = worst.max(err);
            if err >= 1e-6 {
                return Err(format!("empirical grad tau={tau}: disagreement {err}"));
            }
        }
        Ok(format!("worst relative disagreement {worst:.2e} < 1e-6"))
    });
}

#[test]
fn acceptance_04_exact_oracle_equivalence() {
    criterion(4, "exact-oracle equivalence at c=1e-3", 30.0, || {
        let mut rng = Rng::seed_from(0x04AC1E);
        let mut worst_d = 0.0f64;
        let mut worst_gap = 0.0f64;
        let mut total_attempts = 0usize;
        for inst in 0..100 {
            let tau = TAUS[inst % 3];
            let (ds, oracle, attempts) =
                sharp_oracle_instance(&mut rng, 20, 40, 3, tau, 0.02, 8e-3);
            total_attempts += attempts;
            let fitres = fit(&ds, &LossSpec::gmq(tau, 1e-3).unwrap(), None)
                .map_err(|e| e.to_string())?;
            if !fitres.trace.converged {
                return Err(format!("instance {inst}: fit did not converge"));
            }
            let d = l2(&fitres.beta_hat, &oracle.beta_exact);
            let check = LossSpec::check(tau).unwrap();
            let gap = empirical_risk(&ds, &fitres.beta_hat, &check).unwrap() - oracle.objective;
            worst_d = worst_d.max(d);
            worst_gap = worst_gap.max(gap);
            if d > 1e-2 {
                return Err(format!("instance {inst}: coefficient distance {d} > 1e-2"));
            }
            if gap > 1e-4 {
                return Err(format!("instance {inst}: check-risk gap {gap} > 1e-4"));
            }
        }
        Ok(format!(
            "100 instances ({total_attempts} draws): worst distance {worst_d:.2e} <= 1e-2, \
             worst risk gap {worst_gap:.2e} <= 1e-4"
        ))
    });
}

#[test]
fn acceptance_05_consistency_rate() {
    criterion(5, "consistency rate over n", 300.0, || {
        let rows = rmse_scan(
            &[1000, 4000, 16000],
            5,
            None, // default_c rule per n
            50,
            0.7,
            ErrorDist::Normal0_4,
            0xA11CE,
        )
        .map_err(|e| e.to_string())?;
        let slope = rows[0].slope_fit;
        if !((-0.65..=-0.35).contains(&slope)) {
            return Err(format!("log-log slope {slope:.3} outside [-0.65, -0.35]"));
        }
        let errs: Vec<String> = rows
            .iter()
            .map(|r| format!("n={}: {:.4}", r.n, r.mean_error))
            .collect();
        Ok(format!("slope {slope:.3} in [-0.65, -0.35] ({})", errs.join(", ")))
    });
}

#[test]
fn acceptance_06_bias_monotonicity() {
    criterion(6, "smoothing-bias monotonicity and growth", 300.0, || {
        let template = SimSpec::new(
            SimModel::Homoskedastic,
            100_000,
            5,
            0.9,
            ErrorDist::StudentT2,
            0xB1A5,
        );
        let table = bias_estimate(&template, &[0.02, 0.1, 0.5], 100_000, 16)
            .map_err(|e| e.to_string())?;
        let m: Vec<f64> = table.rows.iter().map(|r| r.mean_error).collect();
        if !(m[0] <= m[1] && m[1] <= m[2]) {
            return Err(format!("mean errors not nondecreasing in c: {m:?}"));
        }
        let floor = m[0];
        let above_01 = m[1] - floor;
        let above_05 = m[2] - floor;
        if above_05 < 3.0 * above_01 {
            return Err(format!(
                "error above floor at c=0.5 ({above_05:.4}) is below 3x that at c=0.1 \
                 ({above_01:.4})"
            ));
        }
        Ok(format!(
            "means {m:?} nondecreasing; above-floor growth {:.1}x >= 3x",
            above_05 / above_01.max(1e-300)
        ))
    });
}

#[test]
fn acceptance_07_derivative_timing_order() {
    criterion(7, "vectorized derivative timing order", 60.0, || {
        let rows = derivative_bench(&[1_000_000, 10_000_000], 5, 0x71ED).map_err(|e| e.to_string())?;
        let mut detail = Vec::new();
        for &size in &[1_000_000usize, 10_000_000] {
            let time_of = |method: &str| {
                rows.iter()
                    .find(|r| r.size == size && r.method == method)
                    .map(|r| r.median_seconds)
                    .unwrap()
            };
            let mq = time_of("gmq");
            let gauss = time_of("conquer-gaussian");
            if mq >= gauss {
                return Err(format!(
                    "size {size}: gmq median {mq:.4}s not below conquer-gaussian {gauss:.4}s \
                     (absolute times from the original hardware are not reproducible; only \
                     this ordering is asserted)"
                ));
            }
            detail.push(format!("size {size}: {mq:.4}s < {gauss:.4}s"));
        }
        Ok(detail.join("; "))
    });
}

#[test]
fn acceptance_08_error_parity_with_conquer() {
    criterion(8, "estimation-error parity with kernel smoothing", 300.0, || {
        let mut detail = Vec::new();
        for dist in [DistArg::Normal, DistArg::T2] {
            let args = BenchRegressionArgs {
                models: vec![ModelArg::Homoskedastic],
                n_list: vec![2000],
                tau: 0.7,
                dists: vec![dist],
                methods: vec![MethodArg::Gmq, MethodArg::ConquerGaussian],
                reps: 20,
                k: 1.5,
                seed: 0x9A71,
                out: None,
            };
            let rows = regression_bench(&args).map_err(|e| e.to_string())?;
            let mean_of = |method: &str| {
                let errs: Vec<f64> = rows
                    .iter()
                    .filter(|r| r.method == method)
                    .map(|r| r.error_l2)
                    .collect();
                errs.iter().sum::<f64>() / errs.len() as f64
            };
            let mq = mean_of("gmq");
            let gauss = mean_of("conquer-gaussian");
            let diff = (mq - gauss).abs();
            if diff > 0.15 {
                return Err(format!(
                    "{dist:?}: |{mq:.4} - {gauss:.4}| = {diff:.4} > 0.15 at n=2000, p=100"
                ));
            }
            detail.push(format!("{dist:?}: |{mq:.4} - {gauss:.4}| = {diff:.4}"));
        }
        Ok(format!("{} (both <= 0.15)", detail.join("; ")))
    });
}

#[test]
fn acceptance_09_identity_suite() {
    criterion(9, "algebraic identity suite", 1.0, || {
        let us: Vec<f64> = (-60..=60).map(|i| i as f64 * 0.37).collect();
        for &tau in &TAUS {
            for &u in &us {
                // (rho^as)' = 2 rho_{tau,c}
                for &c in &[1e-3, 0.1, 1.0] {
                    let lhs = loss::smooth_expectile_grad(u, tau, c);
                    let rhs = 2.0 * loss::gmq_loss(u, tau, c);
                    if ((lhs - rhs) / rhs.abs().max(1.0)).abs() > 1e-10 {
                        return Err(format!("expectile-gradient identity broke at u={u}"));
                    }
                }
                // rho_{tau,0} = rho_tau
                let a = loss::gmq_loss(u, tau, 0.0);
                let b = loss::check_loss(u, tau);
                if ((a - b) / b.abs().max(1.0)).abs() > 1e-10 {
                    return Err(format!("c=0 reduction broke at u={u}, tau={tau}"));
                }
                // smoothed kth-power -> kth-power as c -> 0
                for &k in &[1.25, 1.5, 2.0] {
                    let exact = loss::kth_power_loss(u, tau, k);
                    let at_zero = loss::smooth_kth_power_loss(u, tau, 0.0, k);
                    if ((at_zero - exact) / exact.abs().max(1.0)).abs() > 1e-12 {
                        return Err(format!("kth-power c=0 reduction broke at u={u}, k={k}"));
                    }
                    let near_zero = loss::smooth_kth_power_loss(u, tau, 1e-10, k);
                    if (near_zero - exact).abs() > 1e-10 * exact.abs().max(1.0) {
                        return Err(format!("kth-power c->0 limit broke at u={u}, k={k}"));
                    }
                }
            }
        }
        Ok("expectile-gradient identity, c=0 reduction, and kth-power limits all within 1e-10"
            .to_string())
    });
}

#[test]
fn acceptance_10_out_of_scope_exclusions() {
    criterion(10, "documented out-of-scope exclusions", 1.0, || {
        Ok("not reproduced by design: absolute wall-clock figures (fixed 2016-era hardware; \
            only orderings are asserted, see criterion 7), the external R package comparison \
            for expectile fits (replaced by the in-crate vanilla-GD baseline), and asymptotic \
            covariance constants that require unknown population density quantities \
            (replaced by the property suites above)"
            .to_string())
    });
}
