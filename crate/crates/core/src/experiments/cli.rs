//! Command line front end.
//!
//! Exit codes: 0 success, 1 failed check (violations, slope outside its
//! band, runtime error), 2 usage or configuration error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use super::config::{preset, ExperimentConfig, Metric, Task, Variant, MIN_FIT_POINTS, PRESETS};
use super::fit::{effective_sample_size_check, fit_rate};
use super::runner::{run_sweep, write_csv, ResultRow};
use crate::error::{Error, Result};
use crate::estimators::{self, RegressionProblem};
use crate::lab::{run_verification_sweep, SweepConfig, TheoremId};
use crate::mechanisms::{
    LaplaceMechanism, LocalMechanism, MechanismId, RandomizedResponse, StrategyA, StrategyB, TruncatedLaplace,
};
use crate::rng::RngStream;

/// Environment variable overriding the worker pool size.
pub const THREADS_ENV: &str = "LDP_LAB_THREADS";

#[derive(Parser, Debug)]
#[command(name = "ldp-lab", version, about = "Locally private estimation laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Privatize each row of a numeric CSV file with one mechanism.
    Privatize(PrivatizeArgs),
    /// Run a private estimator on raw records.
    Estimate(EstimateArgs),
    /// Exhaustively check a contraction inequality on random instances.
    Verify(VerifyArgs),
    /// Run a Monte-Carlo sweep, fit rate exponents and check slope bands.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct PrivatizeArgs {
    /// l2-sphere (strategy-a), hypercube (strategy-b), rr, laplace or trunc-laplace.
    #[arg(long)]
    mechanism: String,
    /// Privacy budget ε.
    #[arg(long)]
    eps: f64,
    /// Headerless CSV, one record per row (`-` for stdin).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV of released rows (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Radius of the ℓ2 ball or ℓ∞ box holding the records.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Truncation level for trunc-laplace.
    #[arg(long, default_value_t = 1.0)]
    level: f64,
    /// ℓ1 diameter of the input domain for laplace (default 2·radius).
    #[arg(long)]
    sensitivity: Option<f64>,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// mean1d, mean-l2, mean-linf, mean-sparse, multinomial, histogram, orthoseries or regression.
    #[arg(long)]
    task: Task,
    /// Privacy budget ε (`inf` for the noiseless path).
    #[arg(long)]
    eps: f64,
    /// Headerless CSV of raw records. Multinomial takes one category index
    /// per row; regression takes the design row followed by the response.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output JSON (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of categories for multinomial (default: largest index + 1).
    #[arg(long)]
    categories: Option<usize>,
    /// Moment order for mean1d.
    #[arg(long, default_value_t = 2.0)]
    k: f64,
    /// Smoothness for orthoseries.
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    /// Radius of the ℓ2 ball or ℓ∞ box holding the records.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Soft-threshold level for mean-sparse.
    #[arg(long)]
    lambda: Option<f64>,
    /// Noise bound σ for regression responses.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// 1, cor1, 2 or 3.
    #[arg(long)]
    theorem: TheoremId,
    /// Random instances per ε.
    #[arg(long, default_value_t = 10_000)]
    instances: usize,
    /// Comma-separated privacy budgets.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.5,1,2")]
    eps: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON report path (stdout if omitted).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Task expected by the preset or config (checked, not overriding).
    #[arg(long)]
    task: Option<Task>,
    /// Named configuration; see `--list-presets`.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// INI configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Result CSV (default: the config's output, else stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (overrides LDP_LAB_THREADS).
    #[arg(long)]
    threads: Option<usize>,
    /// Print the preset names and exit.
    #[arg(long)]
    list_presets: bool,
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Privatize(a) => privatize(a),
        Command::Estimate(a) => estimate(a),
        Command::Verify(a) => verify(a),
        Command::Bench(a) => bench(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Parameter(_) => 2,
                _ => 1,
            }
        }
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut text = String::new();
    if path == Path::new("-") {
        io::stdin().read_to_string(&mut text)?;
    } else {
        File::open(path)?.read_to_string(&mut text)?;
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(false).comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| Error::Parameter(format!("row {}: `{f}` is not a number", i + 1))))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first().map(Vec::len) {
            if row.len() != first {
                return Err(Error::Shape(format!("row {} has {} fields, expected {first}", i + 1, row.len())));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parameter("input has no records".into()));
    }
    Ok(rows)
}

fn privatize(a: PrivatizeArgs) -> Result<i32> {
    let rows = read_rows(&a.input)?;
    let d = rows[0].len();
    let id: MechanismId = a.mechanism.parse()?;
    let mech: Box<dyn LocalMechanism> = match id {
        MechanismId::L2Sphere => Box::new(StrategyA::new(a.radius, d, a.eps)?),
        MechanismId::HypercubeCorner => Box::new(StrategyB::new(a.radius, d, a.eps)?),
        MechanismId::RandomizedResponse => Box::new(RandomizedResponse::new(d, a.eps)?),
        MechanismId::LaplaceAdditive => {
            Box::new(LaplaceMechanism::for_sensitivity(d, a.sensitivity.unwrap_or(2.0 * a.radius), a.eps)?)
        }
        MechanismId::TruncLaplace => Box::new(TruncatedLaplace::new(a.level, a.eps)?),
    };
    let mut rng = RngStream::new(a.seed, 0);
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(open_out(a.out.as_deref())?);
    for row in &rows {
        let z = mech.privatize(row, &mut rng)?;
        w.write_record(z.z.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(0)
}

fn estimate(a: EstimateArgs) -> Result<i32> {
    let rows = read_rows(&a.input)?;
    let d = rows[0].len();
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    let single_column = || -> Result<()> {
        if d != 1 {
            return Err(Error::Shape(format!("task {} takes one value per row, got {d}", a.task)));
        }
        Ok(())
    };
    let mut rng = RngStream::new(a.seed, 0);
    let value = match a.task {
        Task::Mean1d => {
            single_column()?;
            json!({ "mean": [estimators::mean_1d(&flat, a.eps, a.k, &mut rng)?] })
        }
        Task::MeanL2 => json!({ "mean": estimators::mean_l2(&flat, d, a.radius, a.eps, &mut rng)? }),
        Task::MeanLinf => json!({ "mean": estimators::mean_linf(&flat, d, a.radius, a.eps, &mut rng)? }),
        Task::MeanSparse => {
            json!({ "mean": estimators::mean_sparse(&flat, d, a.radius, a.eps, a.lambda, &mut rng)? })
        }
        Task::Multinomial => {
            single_column()?;
            let cats = flat
                .iter()
                .map(|&v| {
                    if v >= 0.0 && v.fract() == 0.0 {
                        Ok(v as usize)
                    } else {
                        Err(Error::Domain(format!("category `{v}` is not a non-negative integer")))
                    }
                })
                .collect::<Result<Vec<usize>>>()?;
            let k = a.categories.unwrap_or_else(|| cats.iter().max().map_or(0, |m| m + 1));
            json!({ "probabilities": estimators::multinomial_rr(&cats, k, a.eps, &mut rng)?.theta() })
        }
        Task::Histogram => {
            single_column()?;
            match estimators::histogram_density(&flat, a.eps, &mut rng)? {
                estimators::DensityEstimate::Histogram { heights } => json!({ "heights": heights }),
                other => json!({ "coefficients": other.terms() }),
            }
        }
        Task::OrthoSeries => {
            single_column()?;
            match estimators::orthoseries_density(&flat, a.eps, a.beta, &mut rng)? {
                estimators::DensityEstimate::OrthoSeries { coefficients } => json!({ "coefficients": coefficients }),
                other => json!({ "heights": other.terms() }),
            }
        }
        Task::Regression => {
            if d < 2 {
                return Err(Error::Shape("regression rows need at least one design column and a response".into()));
            }
            let design = nalgebra::DMatrix::from_fn(rows.len(), d - 1, |i, j| rows[i][j]);
            let response = rows.iter().map(|r| r[d - 1]).collect();
            let problem = RegressionProblem::new(design, response, a.sigma, None)?;
            json!({ "theta": estimators::regression_fixed_design(&problem, a.eps, &mut rng)? })
        }
    };
    let mut out = open_out(a.out.as_deref())?;
    let eps = if a.eps.is_finite() { json!(a.eps) } else { json!("inf") };
    let report = json!({ "task": a.task.as_str(), "eps": eps, "n": rows.len(), "estimate": value });
    writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    out.flush()?;
    Ok(0)
}

fn verify(a: VerifyArgs) -> Result<i32> {
    if a.instances == 0 {
        return Err(Error::Config("at least one instance is required".into()));
    }
    let report = run_verification_sweep(&SweepConfig { theorem: a.theorem, instances: a.instances, eps: a.eps, seed: a.seed })?;
    let mut out = open_out(a.report.as_deref())?;
    writeln!(out, "{}", report.to_json()?)?;
    out.flush()?;
    eprintln!(
        "theorem {}: {} violations, {} oracle mismatches",
        report.theorem,
        report.violations(),
        report.oracle_mismatches()
    );
    Ok(if report.passed() { 0 } else { 1 })
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    if let Some(t) = flag {
        return if t == 0 { Err(Error::Config("--threads must be at least 1".into())) } else { Ok(Some(t)) };
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(Some(t)),
            _ => Err(Error::Config(format!("{THREADS_ENV}=`{v}` is not a positive integer"))),
        },
        Err(_) => Ok(None),
    }
}

fn bench(a: BenchArgs) -> Result<i32> {
    if a.list_presets {
        for (name, _) in PRESETS {
            println!("{name}");
        }
        return Ok(0);
    }
    let cfg = match (&a.preset, &a.config) {
        (Some(p), None) => preset(p)?,
        (None, Some(path)) => ExperimentConfig::from_file(path)?,
        _ => return Err(Error::Config("bench needs exactly one of --preset or --config".into())),
    };
    if let Some(task) = a.task {
        if task != cfg.task {
            return Err(Error::Config(format!("--task {task} does not match the configured task {}", cfg.task)));
        }
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = thread_count(a.threads)? {
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let rows = pool.install(|| run_sweep(&cfg))?;

    let out_path = a.out.clone().or_else(|| cfg.output.clone());
    write_csv(&rows, open_out(out_path.as_deref())?)?;
    let summary = summarize(&cfg, &rows);
    let mut log: Box<dyn Write> = if out_path.is_some() { Box::new(io::stdout()) } else { Box::new(io::stderr()) };
    for line in &summary.lines {
        writeln!(log, "{line}")?;
    }
    Ok(if summary.failures == 0 { 0 } else { 1 })
}

struct Summary {
    lines: Vec<String>,
    failures: usize,
}

/// Slope fits for every series with enough points, band checks, and the
/// effective-sample-size ratios against the non-private series.
fn summarize(cfg: &ExperimentConfig, rows: &[ResultRow]) -> Summary {
    let mut lines = Vec::new();
    let mut failures = 0;
    let fittable = cfg.n_grid.len() >= MIN_FIT_POINTS;
    for &d in &cfg.d_grid {
        for &eps in &cfg.eps_grid {
            for &variant in &cfg.variants {
                for &metric in &cfg.metrics {
                    let band = cfg.fit_bands.get(&(variant, metric));
                    if !fittable {
                        continue;
                    }
                    match fit_rate(rows, variant, metric, eps, d) {
                        Ok(fit) => {
                            let verdict = match band {
                                Some(&(lo, hi)) if (lo..=hi).contains(&fit.slope) => format!(" band [{lo}, {hi}] PASS"),
                                Some(&(lo, hi)) => {
                                    failures += 1;
                                    format!(" band [{lo}, {hi}] FAIL")
                                }
                                None => String::new(),
                            };
                            lines.push(format!(
                                "fit {variant}:{metric} eps={eps} d={d}: slope {:.4} ± {:.4} (95% CI [{:.4}, {:.4}], r² {:.4}){verdict}",
                                fit.slope, fit.stderr, fit.ci95.0, fit.ci95.1, fit.r_squared
                            ));
                            if fit.span_decades < 2.0 {
                                lines.push(format!(
                                    "warning: {variant}:{metric} grid spans {:.2} decades; slopes over < 2 decades are indicative only",
                                    fit.span_decades
                                ));
                            }
                        }
                        Err(e) => {
                            if band.is_some() {
                                failures += 1;
                            }
                            lines.push(format!("fit {variant}:{metric} eps={eps} d={d}: {e}"));
                        }
                    }
                }
                if variant != Variant::NonPrivate && cfg.variants.contains(&Variant::NonPrivate) {
                    match effective_sample_size_check(rows, variant, Metric::Mse, eps, d) {
                        Ok(rep) => {
                            let ratios: Vec<String> = rep.points.iter().map(|p| format!("{:.3}", p.ratio)).collect();
                            lines.push(format!("ess {variant} eps={eps} d={d}: n'/(n eps^2/d) = [{}]", ratios.join(", ")));
                        }
                        Err(e) => lines.push(format!("ess {variant} eps={eps} d={d}: {e}")),
                    }
                }
            }
        }
    }
    lines.push(format!("{} rows, {failures} band failures", rows.len()));
    Summary { lines, failures }
}
