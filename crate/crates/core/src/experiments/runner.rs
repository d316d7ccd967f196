//! Monte-Carlo sweep over `(n, ε, d)` cells.
//!
//! Each trial draws one data set from a stream keyed by `(seed, cell, trial)`
//! and runs every configured variant on it with a second, independent stream
//! for the mechanisms. Trials are scheduled on the current rayon pool and
//! reduced per cell with a fixed pairwise sum, so the output does not depend
//! on the thread count.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Metric, Task, Variant};
use super::distributions::Sample;
use crate::error::{Error, Result};
use crate::estimators::{
    self, histogram_density, histogram_density_with_bins, orthoseries_density, orthoseries_density_laplace,
    orthoseries_with_terms, DensityEstimate, RegressionProblem, SeriesNoise,
};
use crate::numeric::pairwise_mean;
use crate::rng::{mix, RngStream};

/// Version written in the first CSV column.
pub const CSV_SCHEMA_VERSION: u32 = 1;

const DATA_STREAM: u64 = 0x6461_7461;
const MECHANISM_STREAM: u64 = 0x6d65_6368;

/// One `(variant, metric)` series at one cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub schema_version: u32,
    pub task: Task,
    pub variant: Variant,
    pub metric: Metric,
    pub n: usize,
    pub eps: f64,
    pub d: usize,
    pub trials: usize,
    pub mse_mean: f64,
    pub mse_stderr: f64,
    pub wall_ns: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Cell {
    n: usize,
    eps: f64,
    d: usize,
}

impl Cell {
    /// Stream key depending only on the cell's coordinates, so a cell's
    /// results do not change when the rest of the grid does.
    fn key(self) -> u64 {
        mix(mix(self.n as u64, self.eps.to_bits()), self.d as u64)
    }
}

fn cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &d in &cfg.d_grid {
        for &eps in &cfg.eps_grid {
            for &n in &cfg.n_grid {
                out.push(Cell { n, eps, d });
            }
        }
    }
    out
}

/// Losses of every `(variant, metric)` pair in config order, plus the
/// per-variant wall time.
struct TrialOutcome {
    losses: Vec<f64>,
    wall_ns: Vec<u64>,
}

enum Estimate {
    Vector(Vec<f64>),
    Density(DensityEstimate),
}

fn vector_loss(est: &[f64], truth: &[f64], metric: Metric) -> Result<f64> {
    if est.len() != truth.len() {
        return Err(Error::Shape(format!("estimate has length {}, target {}", est.len(), truth.len())));
    }
    let it = est.iter().zip(truth);
    Ok(match metric {
        Metric::Mse => it.map(|(a, b)| (a - b).powi(2)).sum(),
        Metric::L1 => it.map(|(a, b)| (a - b).abs()).sum(),
    })
}

fn unsupported<T>(task: Task, variant: Variant) -> Result<T> {
    Err(Error::Unsupported(format!("task {task} has no variant {variant}")))
}

fn estimate(cfg: &ExperimentConfig, variant: Variant, sample: &Sample, eps: f64, rng: &mut RngStream) -> Result<Estimate> {
    use Variant::*;
    let p = &cfg.params;
    let task = cfg.task;
    Ok(match (task, sample) {
        (Task::Mean1d, Sample::Vectors { values, .. }) => Estimate::Vector(match variant {
            Private => vec![estimators::mean_1d(values, eps, p.moment, rng)?],
            NonPrivate => estimators::mean_nonprivate(values, 1)?,
            _ => return unsupported(task, variant),
        }),
        (Task::MeanL2 | Task::MeanLinf | Task::MeanSparse, Sample::Vectors { values, d }) => {
            Estimate::Vector(match (task, variant) {
                (_, NonPrivate) => estimators::mean_nonprivate(values, *d)?,
                (Task::MeanL2, StrategyA) => estimators::mean_l2(values, *d, p.radius, eps, rng)?,
                (Task::MeanL2, Laplace) => estimators::mean_l2_laplace_baseline(values, *d, eps, rng)?,
                (Task::MeanLinf | Task::MeanSparse, StrategyB) => estimators::mean_linf(values, *d, p.radius, eps, rng)?,
                (Task::MeanSparse, Sparse) => estimators::mean_sparse(values, *d, p.radius, eps, p.lambda, rng)?,
                _ => return unsupported(task, variant),
            })
        }
        (Task::Multinomial, Sample::Categories { values, d }) => Estimate::Vector(match variant {
            RandomizedResponse => estimators::multinomial_rr(values, *d, eps, rng)?.into_vec(),
            Laplace => estimators::multinomial_estimate_laplace(values, *d, eps, rng)?.into_vec(),
            NonPrivate => estimators::multinomial_estimate_laplace(values, *d, f64::INFINITY, rng)?.into_vec(),
            _ => return unsupported(task, variant),
        }),
        (Task::Histogram, Sample::Vectors { values, .. }) => Estimate::Density(match variant {
            Private => histogram_density(values, eps, rng)?,
            NonPrivate => {
                let k = ((values.len() as f64).cbrt().round() as usize).max(1);
                histogram_density_with_bins(values, k, f64::INFINITY, rng)?
            }
            _ => return unsupported(task, variant),
        }),
        (Task::OrthoSeries, Sample::Vectors { values, .. }) => Estimate::Density(match variant {
            Hypercube => orthoseries_density(values, eps, p.beta, rng)?,
            Laplace => orthoseries_density_laplace(values, eps, p.beta, rng)?,
            NonPrivate => {
                let k = ((values.len() as f64).powf(1.0 / (2.0 * p.beta + 1.0)).round() as usize).max(1);
                orthoseries_with_terms(values, k, f64::INFINITY, SeriesNoise::Hypercube, rng)?
            }
            _ => return unsupported(task, variant),
        }),
        (Task::Regression, Sample::Regression { design, response, theta, sigma }) => {
            let problem = RegressionProblem::new(design.clone(), response.clone(), *sigma, Some(theta.clone()))?;
            Estimate::Vector(match variant {
                Private => estimators::regression_fixed_design(&problem, eps, rng)?,
                NonPrivate => estimators::regression_fixed_design(&problem, f64::INFINITY, rng)?,
                _ => return unsupported(task, variant),
            })
        }
        _ => return Err(Error::Unsupported(format!("task {task} cannot consume this sample"))),
    })
}

fn run_trial(cfg: &ExperimentConfig, cell: Cell, trial: u64) -> Result<TrialOutcome> {
    let mut data_rng = RngStream::for_trial(mix(cfg.seed, DATA_STREAM), cell.key(), trial);
    let mut mech_rng = RngStream::for_trial(mix(cfg.seed, MECHANISM_STREAM), cell.key(), trial);
    let sample = cfg.distribution.sample(cell.n, cell.d, &mut data_rng)?;
    let truth = match &sample {
        Sample::Regression { theta, .. } => Some(theta.clone()),
        _ => cfg.distribution.target(cell.d).ok(),
    };
    let mut losses = Vec::with_capacity(cfg.variants.len() * cfg.metrics.len());
    let mut wall_ns = Vec::with_capacity(cfg.variants.len());
    for &variant in &cfg.variants {
        let start = cfg.timing.then(Instant::now);
        let est = estimate(cfg, variant, &sample, cell.eps, &mut mech_rng)?;
        wall_ns.push(start.map_or(0, |s| s.elapsed().as_nanos() as u64));
        for &metric in &cfg.metrics {
            let loss = match (&est, &truth) {
                (Estimate::Vector(v), Some(t)) => vector_loss(v, t, metric)?,
                (Estimate::Vector(_), None) => return Err(Error::Unsupported("law has no vector target".into())),
                (Estimate::Density(f), Some(t)) if matches!(f, DensityEstimate::OrthoSeries { .. }) => f.series_ise(t)?,
                (Estimate::Density(f), _) => {
                    let law = &cfg.distribution;
                    f.ise(&|t| law.density(t).unwrap_or(f64::NAN))
                }
            };
            losses.push(loss);
        }
    }
    Ok(TrialOutcome { losses, wall_ns })
}

/// Runs every cell of `cfg` on the current rayon pool.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let cells = cells(cfg);
    let trials = cfg.trials;
    let jobs: Vec<(usize, u64)> = (0..cells.len()).flat_map(|c| (0..trials as u64).map(move |t| (c, t))).collect();
    let outcomes: Vec<TrialOutcome> =
        jobs.par_iter().map(|&(c, t)| run_trial(cfg, cells[c], t)).collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (c, cell) in cells.iter().enumerate() {
        let block = &outcomes[c * trials..(c + 1) * trials];
        for (vi, &variant) in cfg.variants.iter().enumerate() {
            let wall_ns = block.iter().map(|o| o.wall_ns[vi]).sum();
            for (mi, &metric) in cfg.metrics.iter().enumerate() {
                let idx = vi * cfg.metrics.len() + mi;
                let losses: Vec<f64> = block.iter().map(|o| o.losses[idx]).collect();
                let (mean, stderr) = mean_and_stderr(&losses);
                if !(mean >= 0.0 && stderr.is_finite()) {
                    return Err(Error::Diagnostic(format!(
                        "non-finite loss for {variant}:{metric} at n={}, eps={}, d={}",
                        cell.n, cell.eps, cell.d
                    )));
                }
                rows.push(ResultRow {
                    schema_version: CSV_SCHEMA_VERSION,
                    task: cfg.task,
                    variant,
                    metric,
                    n: cell.n,
                    eps: cell.eps,
                    d: cell.d,
                    trials,
                    mse_mean: mean,
                    mse_stderr: stderr,
                    wall_ns,
                });
            }
        }
    }
    Ok(rows)
}

/// Mean and `SD/√m` with the `m − 1` denominator, both by pairwise sums.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let m = xs.len();
    let mean = pairwise_mean(xs);
    if m < 2 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
    let var = pairwise_mean(&dev) * m as f64 / (m - 1) as f64;
    (mean, (var / m as f64).sqrt())
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record([
            "schema_version", "task", "variant", "metric", "n", "eps", "d", "trials", "mse_mean", "mse_stderr", "wall_ns",
        ])?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<Vec<ResultRow>, _>>()?)
}
