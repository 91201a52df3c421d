//! End-to-end tests of the `gmq` binary: exit codes, machine-greppable error
//! prefixes, CSV/JSON contracts, and determinism across runs.

mod common;

use common::l2;
use gmq::datagen::{ErrorDist, Rng, SimModel, SimSpec};
use gmq::model::FitReport;
use gmq::oracle::exact_qr;
use std::path::Path;
use std::process::{Command, Output};

fn gmq_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gmq"))
}

fn run_args(args: &[&str]) -> Output {
    gmq_bin().args(args).output().expect("binary runs")
}

fn write_spec(dir: &Path, spec: &SimSpec) -> std::path::PathBuf {
    let path = dir.join("spec.json");
    std::fs::write(&path, serde_json::to_string_pretty(spec).unwrap()).unwrap();
    path
}

#[test]
fn simulate_writes_csv_and_sidecar_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SimSpec::new(SimModel::Homoskedastic, 25, 2, 0.5, ErrorDist::Normal0_4, 31337);
    let spec_path = write_spec(dir.path(), &spec);
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    for out in [&out_a, &out_b] {
        let res = run_args(&[
            "simulate",
            "--spec",
            spec_path.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    }
    let bytes_a = std::fs::read(&out_a).unwrap();
    let bytes_b = std::fs::read(&out_b).unwrap();
    assert_eq!(bytes_a, bytes_b, "same spec must give identical bytes");
    let text = String::from_utf8(bytes_a).unwrap();
    assert!(text.starts_with("x1,x2,y\r\n"));
    assert_eq!(text.trim_end().lines().count(), 26); // header + n rows

    let sidecar = gmq::io::read_truth_sidecar(&dir.path().join("a.truth.json")).unwrap();
    assert_eq!(sidecar.beta_truth, vec![1.0, 1.0]);
    assert!(!sidecar.has_intercept);
    assert_eq!(sidecar.spec, spec);
}

#[test]
fn simulate_rejects_invalid_spec_with_named_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = SimSpec::new(SimModel::Homoskedastic, 5, 2, 0.5, ErrorDist::Normal0_4, 1);
    spec.n = 0;
    let spec_path = write_spec(dir.path(), &spec);
    let out = dir.path().join("out.csv");
    let res = run_args(&[
        "simulate",
        "--spec",
        spec_path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(!res.status.success());
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("error[E_PARAM]"), "stderr: {err}");
    assert!(err.contains("n must be at least 1"), "stderr: {err}");
    assert!(!out.exists());
}

#[test]
fn fit_matches_exact_oracle_on_small_instance() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = Rng::seed_from(2222);
    let ds = common::random_instance(&mut rng, 30, 2);
    let csv_path = dir.path().join("data.csv");
    gmq::io::write_dataset_csv_path(&csv_path, &ds).unwrap();
    let oracle = exact_qr(&ds, 0.5).unwrap();

    let res = run_args(&[
        "fit",
        csv_path.to_str().unwrap(),
        "--tau",
        "0.5",
        "--loss",
        "gmq",
        "--c",
        "0.0001",
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let report: FitReport = serde_json::from_slice(&res.stdout).unwrap();
    assert!(report.converged);
    assert!(
        l2(&report.beta_hat, &oracle.beta_exact) <= 1e-2,
        "fit {:?} vs oracle {:?}",
        report.beta_hat,
        oracle.beta_exact
    );
    // The printed JSON round-trips through the same parser.
    let rejson = serde_json::to_string(&report).unwrap();
    let back: FitReport = serde_json::from_str(&rejson).unwrap();
    assert_eq!(back.beta_hat, report.beta_hat);
}

#[test]
fn fit_flag_validation() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = Rng::seed_from(5);
    let ds = common::random_instance(&mut rng, 20, 1);
    let csv_path = dir.path().join("data.csv");
    gmq::io::write_dataset_csv_path(&csv_path, &ds).unwrap();
    let path = csv_path.to_str().unwrap();

    // tau outside (0,1)
    let res = run_args(&["fit", path, "--tau", "1.5", "--loss", "gmq"]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("error[E_PARAM]"));

    // c = 0 breaks the smoothness precondition
    let res = run_args(&["fit", path, "--tau", "0.5", "--loss", "gmq", "--c", "0"]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("error[E_PARAM]"));

    // --k is not a gmq parameter
    let res = run_args(&["fit", path, "--tau", "0.5", "--loss", "gmq", "--k", "1.5"]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("error[E_PARAM]"));

    // --h belongs to the kernel families only
    let res = run_args(&["fit", path, "--tau", "0.5", "--loss", "gmq", "--h", "0.3"]);
    assert!(!res.status.success());

    // conquer path accepts auto bandwidth
    let res = run_args(&[
        "fit",
        path,
        "--tau",
        "0.5",
        "--loss",
        "conquer-gaussian",
        "--h",
        "auto",
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
}

#[test]
fn fit_json_out_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = Rng::seed_from(6);
    let ds = common::random_instance(&mut rng, 25, 2);
    let csv_path = dir.path().join("data.csv");
    gmq::io::write_dataset_csv_path(&csv_path, &ds).unwrap();
    let json_path = dir.path().join("fit.json");
    let res = run_args(&[
        "fit",
        csv_path.to_str().unwrap(),
        "--tau",
        "0.7",
        "--loss",
        "gmq",
        "--c",
        "auto",
        "--json-out",
        json_path.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let from_file: FitReport =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    let from_stdout: FitReport = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(from_file.beta_hat, from_stdout.beta_hat);
    assert_eq!(from_file.iterations, from_stdout.iterations);
}

#[test]
fn bench_deriv_csv_contract() {
    let res = run_args(&["bench-deriv", "--sizes", "1000,2000", "--reps", "2", "--seed", "3"]);
    assert!(res.status.success());
    let text = String::from_utf8(res.stdout).unwrap();
    assert!(text.starts_with("size,method,median_seconds\r\n"));
    for method in ["gmq", "conquer-gaussian", "conquer-logistic"] {
        for size in ["1000", "2000"] {
            assert!(
                text.lines().any(|l| l.starts_with(&format!("{size},{method},"))),
                "missing {method} at {size}: {text}"
            );
        }
    }
    // sizes below the floor are a usage error
    let res = run_args(&["bench-deriv", "--sizes", "10"]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("error[E_PARAM]"));
}

#[test]
fn bench_regression_grid_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    for out in [&out_a, &out_b] {
        let res = run_args(&[
            "bench-regression",
            "--models",
            "homoskedastic",
            "--n-list",
            "100,200",
            "--dists",
            "normal",
            "--methods",
            "gmq,conquer-gaussian",
            "--reps",
            "3",
            "--tau",
            "0.7",
            "--seed",
            "11",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    }
    let parse = |path: &Path| -> Vec<Vec<String>> {
        let text = std::fs::read_to_string(path).unwrap();
        text.trim_end()
            .lines()
            .map(|l| l.split(',').map(|s| s.to_string()).collect())
            .collect()
    };
    let rows_a = parse(&out_a);
    let rows_b = parse(&out_b);
    assert_eq!(rows_a.len(), 13); // header + 2n x 2 methods x 3 reps
    let header = &rows_a[0];
    assert_eq!(
        header,
        &vec![
            "method", "model", "n", "p", "tau", "shape", "error_l2", "wall_time", "iterations",
            "seed"
        ]
    );
    let wall_idx = header.iter().position(|h| h == "wall_time").unwrap();
    for (a, b) in rows_a.iter().zip(&rows_b) {
        for (j, (fa, fb)) in a.iter().zip(b).enumerate() {
            if j != wall_idx {
                assert_eq!(fa, fb, "column {} differs between reruns", header[j.min(header.len()-1)]);
            }
        }
    }
}

#[test]
fn rmse_scan_csv_contract() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rmse.csv");
    let res = run_args(&[
        "rmse-scan",
        "--n-grid",
        "200,400",
        "--p",
        "2",
        "--reps",
        "3",
        "--tau",
        "0.5",
        "--seed",
        "21",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("n,p,c,mean_error,sd_error,slope_fit\r\n"));
    assert_eq!(text.trim_end().lines().count(), 3);
}

#[test]
fn bias_scan_csv_contract() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bias.csv");
    let res = run_args(&[
        "bias-scan",
        "--c-grid",
        "0.1,0.5",
        "--n",
        "1500",
        "--p",
        "2",
        "--reps",
        "2",
        "--tau",
        "0.9",
        "--dist",
        "t2",
        "--seed",
        "77",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("c,mean_error,sd_error,slope_fit\r\n"));
    assert_eq!(text.trim_end().lines().count(), 3);
}

#[test]
fn fit_reads_simulated_csv_with_intercept_model() {
    // simulate a heteroskedastic design, then fit through the CLI with
    // --intercept; the coefficients should be near the sidecar truth.
    let dir = tempfile::tempdir().unwrap();
    let spec = SimSpec::new(SimModel::LinearScale, 2000, 3, 0.7, ErrorDist::Normal0_4, 424242);
    let spec_path = write_spec(dir.path(), &spec);
    let csv_path = dir.path().join("data.csv");
    let res = run_args(&[
        "simulate",
        "--spec",
        spec_path.to_str().unwrap(),
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let sidecar = gmq::io::read_truth_sidecar(&dir.path().join("data.truth.json")).unwrap();
    assert!(sidecar.has_intercept);
    let res = run_args(&[
        "fit",
        csv_path.to_str().unwrap(),
        "--tau",
        "0.7",
        "--loss",
        "gmq",
        "--c",
        "auto",
        "--intercept",
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let report: FitReport = serde_json::from_slice(&res.stdout).unwrap();
    assert!(report.converged);
    assert!(
        l2(&report.beta_hat, &sidecar.beta_truth) < 0.6,
        "fit {:?} vs truth {:?}",
        report.beta_hat,
        sidecar.beta_truth
    );
}
