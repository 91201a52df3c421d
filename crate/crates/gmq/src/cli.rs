//! Command-line front end: dataset simulation, fitting, derivative timing,
//! regression benchmarking, and the bias/RMSE scaling scans. All commands are
//! deterministic given their flags and seeds (wall-clock fields aside); CSV
//! goes to `--out` when given and stdout otherwise, errors go to stderr as
//! `error[CODE]: message`.

use crate::datagen::{derive_seed, ErrorDist, SimModel, SimSpec};
use crate::error::{Error, Result};
use crate::loss::LossSpec;
use crate::model::{conquer_bandwidth, default_c, fit, Dataset, FitReport};
use crate::optimize::OptimizerConfig;
use crate::oracle::bias_estimate;
use crate::{io as gio, oracle};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use std::hint::black_box;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Parser)]
#[command(
    name = "gmq",
    version,
    about = "Smoothed quantile/expectile regression via multiquadric surrogate losses"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a dataset CSV (plus truth sidecar JSON) from a SimSpec JSON file.
    Simulate(SimulateArgs),
    /// Fit a linear model to a dataset CSV and print the result as JSON.
    Fit(FitArgs),
    /// Time vectorized first-derivative evaluation across loss families.
    BenchDeriv(BenchDerivArgs),
    /// Estimation error and wall time over a (model, n, dist, method) grid.
    BenchRegression(BenchRegressionArgs),
    /// Mean estimation error as the shape parameter varies at fixed large n.
    BiasScan(BiasScanArgs),
    /// Mean estimation error as n grows, with the shape rule of thumb.
    RmseScan(RmseScanArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Gmq,
    ConquerGaussian,
    ConquerLogistic,
    Expectile,
    SmoothExpectile,
    KthPowerSmooth,
}

impl MethodArg {
    pub fn name(self) -> &'static str {
        match self {
            MethodArg::Gmq => "gmq",
            MethodArg::ConquerGaussian => "conquer-gaussian",
            MethodArg::ConquerLogistic => "conquer-logistic",
            MethodArg::Expectile => "expectile",
            MethodArg::SmoothExpectile => "smooth-expectile",
            MethodArg::KthPowerSmooth => "kth-power-smooth",
        }
    }

    fn uses_c(self) -> bool {
        matches!(
            self,
            MethodArg::Gmq | MethodArg::SmoothExpectile | MethodArg::KthPowerSmooth
        )
    }

    fn uses_h(self) -> bool {
        matches!(self, MethodArg::ConquerGaussian | MethodArg::ConquerLogistic)
    }

    /// Default shape for a given data size: the `n^{-1/3}` rule for the
    /// multiquadric families, the `n^{-2/5}` bandwidth rule for the kernel
    /// families, 0 otherwise.
    pub fn auto_shape(self, n: usize, p: usize) -> f64 {
        let p = p.max(1);
        if self.uses_c() {
            default_c(n, p)
        } else if self.uses_h() {
            conquer_bandwidth(n, p)
        } else {
            0.0
        }
    }

    pub fn build_spec(self, tau: f64, shape: f64, k: f64) -> Result<LossSpec> {
        match self {
            MethodArg::Gmq => LossSpec::gmq(tau, shape),
            MethodArg::ConquerGaussian => LossSpec::conquer_gaussian(tau, shape),
            MethodArg::ConquerLogistic => LossSpec::conquer_logistic(tau, shape),
            MethodArg::Expectile => LossSpec::expectile(tau),
            MethodArg::SmoothExpectile => LossSpec::smooth_expectile(tau, shape),
            MethodArg::KthPowerSmooth => LossSpec::smooth_kth_power(tau, shape, k),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Homoskedastic,
    LinearScale,
    QuadraticScale,
}

impl From<ModelArg> for SimModel {
    fn from(m: ModelArg) -> SimModel {
        match m {
            ModelArg::Homoskedastic => SimModel::Homoskedastic,
            ModelArg::LinearScale => SimModel::LinearScale,
            ModelArg::QuadraticScale => SimModel::QuadraticScale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistArg {
    /// Gaussian N(0,4)
    Normal,
    /// Student t with 2 degrees of freedom
    T2,
}

impl From<DistArg> for ErrorDist {
    fn from(d: DistArg) -> ErrorDist {
        match d {
            DistArg::Normal => ErrorDist::Normal0_4,
            DistArg::T2 => ErrorDist::StudentT2,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Path to a SimSpec JSON file.
    #[arg(long)]
    pub spec: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Truth sidecar path (default: `<out>` with a `.truth.json` suffix).
    #[arg(long)]
    pub truth_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Dataset CSV (header `x1,...,xp,y`).
    pub data: PathBuf,
    /// Quantile / expectile level in (0,1).
    #[arg(long)]
    pub tau: f64,
    #[arg(long, value_enum)]
    pub loss: MethodArg,
    /// Multiquadric shape parameter: a number, or `auto` for the n^{-1/3} rule.
    #[arg(long)]
    pub c: Option<String>,
    /// Kernel bandwidth: a number, or `auto` for the n^{-2/5} rule.
    #[arg(long)]
    pub h: Option<String>,
    /// Power for the kth-power family (in (1,2]).
    #[arg(long)]
    pub k: Option<f64>,
    /// Gradient-norm stopping threshold.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
    /// Prepend a constant column to the design.
    #[arg(long)]
    pub intercept: bool,
    /// Also write the result JSON to this path.
    #[arg(long)]
    pub json_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchDerivArgs {
    /// Residual-vector lengths, each at least 1000.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    /// Timed repetitions per (size, method); a warm-up run is discarded.
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 12345)]
    pub seed: u64,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchRegressionArgs {
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    pub models: Vec<ModelArg>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<usize>,
    #[arg(long, default_value_t = 0.7)]
    pub tau: f64,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [DistArg::Normal])]
    pub dists: Vec<DistArg>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [MethodArg::Gmq, MethodArg::ConquerGaussian])]
    pub methods: Vec<MethodArg>,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    /// Power used when `kth-power-smooth` is among the methods.
    #[arg(long, default_value_t = 1.5)]
    pub k: f64,
    #[arg(long, default_value_t = 12345)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BiasScanArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [0.02, 0.1, 0.5])]
    pub c_grid: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub p: usize,
    #[arg(long, default_value_t = 16)]
    pub reps: usize,
    /// Off-median levels with skewed-through-the-quantile densities make the
    /// smoothing bias visible above the Monte Carlo floor.
    #[arg(long, default_value_t = 0.9)]
    pub tau: f64,
    #[arg(long, value_enum, default_value_t = DistArg::T2)]
    pub dist: DistArg,
    #[arg(long, default_value_t = 12345)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RmseScanArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [1000, 4000, 16000])]
    pub n_grid: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub p: usize,
    /// Shape parameter: a number, or `auto` for the n^{-1/3} rule per n.
    #[arg(long, default_value = "auto")]
    pub c: String,
    #[arg(long, default_value_t = 50)]
    pub reps: usize,
    #[arg(long, default_value_t = 0.7)]
    pub tau: f64,
    #[arg(long, value_enum, default_value_t = DistArg::Normal)]
    pub dist: DistArg,
    #[arg(long, default_value_t = 12345)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// One row of the derivative-timing benchmark.
#[derive(Debug, Clone, Serialize)]
pub struct DerivTimingRow {
    pub size: usize,
    pub method: &'static str,
    pub median_seconds: f64,
}

/// One row of the regression benchmark: a single replication of a single
/// method on a single simulated dataset.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRecord {
    pub method: &'static str,
    pub model: &'static str,
    pub n: usize,
    pub p: usize,
    pub tau: f64,
    pub shape: f64,
    pub error_l2: f64,
    pub wall_time: f64,
    pub iterations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RmseRow {
    pub n: usize,
    pub p: usize,
    pub c: f64,
    pub mean_error: f64,
    pub sd_error: f64,
    pub slope_fit: f64,
}

fn model_name(model: SimModel) -> &'static str {
    match model {
        SimModel::Homoskedastic => "homoskedastic",
        SimModel::LinearScale => "linear-scale",
        SimModel::QuadraticScale => "quadratic-scale",
    }
}

fn parse_shape_arg(label: &str, raw: &str) -> Result<Option<f64>> {
    if raw.eq_ignore_ascii_case("auto") {
        return Ok(None);
    }
    raw.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::Parse(format!("--{label} expects a number or 'auto', got '{raw}'")))
}

fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(w)
}

/// Dispatch a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => run_simulate(&args),
        Command::Fit(args) => run_fit(&args),
        Command::BenchDeriv(args) => {
            let rows = derivative_bench(&args.sizes, args.reps, args.seed)?;
            write_csv_rows(open_out(&args.out)?, &rows)
        }
        Command::BenchRegression(args) => {
            let rows = regression_bench(&args)?;
            write_csv_rows(open_out(&args.out)?, &rows)
        }
        Command::BiasScan(args) => run_bias_scan(&args),
        Command::RmseScan(args) => {
            let rows = rmse_scan(
                &args.n_grid,
                args.p,
                parse_shape_arg("c", &args.c)?,
                args.reps,
                args.tau,
                args.dist.into(),
                args.seed,
            )?;
            write_csv_rows(open_out(&args.out)?, &rows)
        }
    }
}

fn write_csv_rows<W: Write, T: Serialize>(w: W, rows: &[T]) -> Result<()> {
    let mut csv = csv_writer(w);
    for row in rows {
        csv.serialize(row)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn run_simulate(args: &SimulateArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.spec)?;
    let spec: SimSpec = serde_json::from_str(&text)?;
    spec.validate()?;
    let (dataset, beta_truth) = spec.generate()?;
    gio::write_dataset_csv_path(&args.out, &dataset)?;
    let truth_path = match &args.truth_out {
        Some(p) => p.clone(),
        None => sidecar_path(&args.out),
    };
    gio::write_truth_sidecar(
        &truth_path,
        &gio::TruthSidecar {
            has_intercept: spec.model.has_intercept(),
            beta_truth,
            spec,
        },
    )?;
    Ok(())
}

/// `data.csv` -> `data.truth.json`
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("truth.json")
}

pub fn run_fit(args: &FitArgs) -> Result<()> {
    if !(args.tau > 0.0 && args.tau < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "--tau must lie in (0, 1), got {}",
            args.tau
        )));
    }
    if args.c.is_some() && !args.loss.uses_c() {
        return Err(Error::InvalidParameter(format!(
            "--c is not a parameter of loss '{}'",
            args.loss.name()
        )));
    }
    if args.h.is_some() && !args.loss.uses_h() {
        return Err(Error::InvalidParameter(format!(
            "--h is not a parameter of loss '{}'",
            args.loss.name()
        )));
    }
    if args.k.is_some() && args.loss != MethodArg::KthPowerSmooth {
        return Err(Error::InvalidParameter(format!(
            "--k is not a parameter of loss '{}'",
            args.loss.name()
        )));
    }
    let dataset = gio::read_dataset_csv_path(&args.data, args.intercept)?;
    let shape = if args.loss.uses_c() {
        match parse_shape_arg("c", args.c.as_deref().unwrap_or("auto"))? {
            Some(v) => v,
            None => args.loss.auto_shape(dataset.n(), dataset.num_coeffs()),
        }
    } else if args.loss.uses_h() {
        match parse_shape_arg("h", args.h.as_deref().unwrap_or("auto"))? {
            Some(v) => v,
            None => args.loss.auto_shape(dataset.n(), dataset.num_coeffs()),
        }
    } else {
        0.0
    };
    let spec = args.loss.build_spec(args.tau, shape, args.k.unwrap_or(1.5))?;
    let config = OptimizerConfig::new(vec![0.0; dataset.num_coeffs()])
        .with_tol(args.tol)
        .with_max_iter(args.max_iter);
    let result = fit(&dataset, &spec, Some(config))?;
    let report = FitReport::from(&result);
    let json = serde_json::to_string_pretty(&report)?;
    println!("{json}");
    if let Some(path) = &args.json_out {
        std::fs::write(path, json)?;
    }
    Ok(())
}

/// Median wall time of vectorized first-derivative evaluation per method and
/// size, on identical pseudo-random residual vectors. A warm-up pass per
/// (size, method) is discarded; the monotonic clock is used throughout.
pub fn derivative_bench(sizes: &[usize], reps: usize, seed: u64) -> Result<Vec<DerivTimingRow>> {
    if sizes.iter().any(|&s| s < 1000) {
        return Err(Error::InvalidParameter(
            "derivative benchmark sizes must be at least 1000".into(),
        ));
    }
    if reps == 0 {
        return Err(Error::InvalidParameter("reps must be at least 1".into()));
    }
    let tau = 0.5;
    let shape = 0.05;
    let specs: [(&'static str, LossSpec); 3] = [
        ("gmq", LossSpec::gmq(tau, shape)?),
        ("conquer-gaussian", LossSpec::conquer_gaussian(tau, shape)?),
        ("conquer-logistic", LossSpec::conquer_logistic(tau, shape)?),
    ];
    let mut rows = Vec::new();
    for (si, &size) in sizes.iter().enumerate() {
        let mut rng = crate::datagen::Rng::seed_from(derive_seed(seed, si as u64));
        let residuals: Vec<f64> = (0..size).map(|_| rng.next_normal()).collect();
        let mut out = vec![0.0; size];
        for (name, spec) in &specs {
            spec.grad_vec(&residuals, &mut out)?; // warm-up, discarded
            black_box(&mut out);
            let mut times = Vec::with_capacity(reps);
            for _ in 0..reps {
                let start = Instant::now();
                spec.grad_vec(&residuals, &mut out)?;
                black_box(&mut out);
                times.push(start.elapsed().as_secs_f64());
            }
            times.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let median = if reps % 2 == 1 {
                times[reps / 2]
            } else {
                0.5 * (times[reps / 2 - 1] + times[reps / 2])
            };
            rows.push(DerivTimingRow {
                size,
                method: name,
                median_seconds: median,
            });
        }
    }
    Ok(rows)
}

/// Fit every method of the grid on shared per-replication datasets and report
/// the estimation error against the generating truth.
///
/// The covariate dimension follows the `p = n/20` regime. Replications run on
/// a worker pool; every replication derives its own generator stream from
/// `(seed, cell, rep)`, and rows come back in deterministic grid order.
pub fn regression_bench(args: &BenchRegressionArgs) -> Result<Vec<BenchRecord>> {
    if !(args.tau > 0.0 && args.tau < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "--tau must lie in (0, 1), got {}",
            args.tau
        )));
    }
    if args.reps == 0 || args.n_list.is_empty() || args.models.is_empty() {
        return Err(Error::InvalidParameter(
            "need at least one model, one n, and one replication".into(),
        ));
    }
    let mut cells = Vec::new();
    for &model in &args.models {
        for &n in &args.n_list {
            for &dist in &args.dists {
                cells.push((SimModel::from(model), n, ErrorDist::from(dist)));
            }
        }
    }
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..args.reps).map(move |r| (c, r)))
        .collect();

    let nested: Vec<Vec<BenchRecord>> = jobs
        .into_par_iter()
        .map(|(cell_idx, rep)| -> Result<Vec<BenchRecord>> {
            let (model, n, dist) = cells[cell_idx];
            let p = (n / 20).max(1);
            let dataset_seed = derive_seed(derive_seed(args.seed, cell_idx as u64), rep as u64);
            let spec = SimSpec {
                seed: dataset_seed,
                ..SimSpec::new(model, n, p, args.tau, dist, 0)
            };
            let (dataset, truth) = spec.generate()?;
            let mut records = Vec::with_capacity(args.methods.len());
            for &method in &args.methods {
                let shape = method.auto_shape(n, p);
                let loss = method.build_spec(args.tau, shape, args.k)?;
                let result = fit(&dataset, &loss, None)?;
                records.push(BenchRecord {
                    method: method.name(),
                    model: model_name(model),
                    n,
                    p,
                    tau: args.tau,
                    shape,
                    error_l2: l2_distance(&result.beta_hat, &truth),
                    wall_time: result.trace.wall_time.max(1e-9),
                    iterations: result.trace.iterations,
                    seed: dataset_seed,
                });
            }
            Ok(records)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(nested.into_iter().flatten().collect())
}

fn run_bias_scan(args: &BiasScanArgs) -> Result<()> {
    let template = SimSpec::new(
        SimModel::Homoskedastic,
        args.n,
        args.p,
        args.tau,
        args.dist.into(),
        args.seed,
    );
    let table = bias_estimate(&template, &args.c_grid, args.n, args.reps)?;
    #[derive(Serialize)]
    struct Row {
        c: f64,
        mean_error: f64,
        sd_error: f64,
        slope_fit: f64,
    }
    let rows: Vec<Row> = table
        .rows
        .iter()
        .map(|r| Row {
            c: r.c,
            mean_error: r.mean_error,
            sd_error: r.sd_error,
            slope_fit: table.slope,
        })
        .collect();
    write_csv_rows(open_out(&args.out)?, &rows)
}

/// Monte Carlo RMSE-vs-n sweep on the homoskedastic design.
///
/// `c_override = None` applies the `((p + ln n)/n)^{1/3}` rule per n. The
/// fitted log-log slope of mean error against n is repeated on every row.
pub fn rmse_scan(
    n_grid: &[usize],
    p: usize,
    c_override: Option<f64>,
    reps: usize,
    tau: f64,
    dist: ErrorDist,
    seed: u64,
) -> Result<Vec<RmseRow>> {
    if n_grid.is_empty() || reps == 0 {
        return Err(Error::InvalidParameter(
            "need a nonempty n grid and at least one replication".into(),
        ));
    }
    let mut rows = Vec::with_capacity(n_grid.len());
    for (ni, &n) in n_grid.iter().enumerate() {
        let c = c_override.unwrap_or_else(|| default_c(n, p));
        let errs: Vec<f64> = (0..reps)
            .into_par_iter()
            .map(|rep| -> Result<f64> {
                let spec = SimSpec {
                    seed: derive_seed(derive_seed(seed, ni as u64), rep as u64),
                    ..SimSpec::new(SimModel::Homoskedastic, n, p, tau, dist, 0)
                };
                let (dataset, truth) = spec.generate()?;
                let result = fit(&dataset, &LossSpec::gmq(tau, c)?, None)?;
                Ok(l2_distance(&result.beta_hat, &truth))
            })
            .collect::<Result<Vec<_>>>()?;
        let mean = errs.iter().sum::<f64>() / reps as f64;
        let var = errs.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / reps as f64;
        rows.push(RmseRow {
            n,
            p,
            c,
            mean_error: mean,
            sd_error: var.sqrt(),
            slope_fit: f64::NAN,
        });
    }
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let means: Vec<f64> = rows.iter().map(|r| r.mean_error).collect();
    let slope = if rows.len() >= 2 {
        log_log_slope(&ns, &means)
    } else {
        f64::NAN
    };
    for row in &mut rows {
        row.slope_fit = slope;
    }
    Ok(rows)
}

/// Convenience used by the exact-oracle comparisons: fit the multiquadric
/// loss and return the coefficient distance and check-risk gap to the oracle.
pub fn oracle_gap(dataset: &Dataset, tau: f64, c: f64) -> Result<(f64, f64)> {
    let oracle_result = oracle::exact_qr(dataset, tau)?;
    let fit_result = fit(dataset, &LossSpec::gmq(tau, c)?, None)?;
    let check = LossSpec::check(tau)?;
    let risk = crate::model::empirical_risk(dataset, &fit_result.beta_hat, &check)?;
    Ok((
        l2_distance(&fit_result.beta_hat, &oracle_result.beta_exact),
        risk - oracle_result.objective,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_arg_parsing() {
        assert_eq!(parse_shape_arg("c", "auto").unwrap(), None);
        assert_eq!(parse_shape_arg("c", "AUTO").unwrap(), None);
        assert_eq!(parse_shape_arg("c", "0.25").unwrap(), Some(0.25));
        assert!(parse_shape_arg("c", "x").is_err());
    }

    #[test]
    fn derivative_bench_covers_all_methods() {
        let rows = derivative_bench(&[1000], 3, 7).unwrap();
        assert_eq!(rows.len(), 3);
        let methods: Vec<_> = rows.iter().map(|r| r.method).collect();
        assert!(methods.contains(&"gmq"));
        assert!(methods.contains(&"conquer-gaussian"));
        assert!(methods.contains(&"conquer-logistic"));
        for row in &rows {
            assert!(row.median_seconds >= 0.0);
        }
        assert!(derivative_bench(&[999], 3, 7).is_err());
    }

    #[test]
    fn regression_bench_row_cardinality() {
        let args = BenchRegressionArgs {
            models: vec![ModelArg::Homoskedastic],
            n_list: vec![100, 200],
            tau: 0.7,
            dists: vec![DistArg::Normal],
            methods: vec![MethodArg::Gmq, MethodArg::ConquerGaussian],
            reps: 3,
            k: 1.5,
            seed: 99,
            out: None,
        };
        let rows = regression_bench(&args).unwrap();
        assert_eq!(rows.len(), 12);
        // deterministic rerun
        let rows2 = regression_bench(&args).unwrap();
        for (a, b) in rows.iter().zip(&rows2) {
            assert_eq!(a.error_l2, b.error_l2);
            assert_eq!(a.seed, b.seed);
        }
        // p follows the n/20 regime
        assert!(rows.iter().all(|r| r.p == r.n / 20));
        assert!(rows.iter().all(|r| r.wall_time > 0.0 && r.error_l2 >= 0.0));
    }

    #[test]
    fn rmse_scan_smoke() {
        let rows = rmse_scan(&[200, 400], 2, None, 4, 0.5, ErrorDist::Normal0_4, 5).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].mean_error > rows[1].mean_error);
        assert!(rows[0].slope_fit < 0.0);
        assert_eq!(rows[0].slope_fit, rows[1].slope_fit);
    }
}
