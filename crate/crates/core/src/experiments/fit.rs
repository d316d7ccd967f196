//! Log-log rate fits and effective-sample-size diagnostics.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::config::{Metric, Variant, MIN_FIT_POINTS};
use super::runner::ResultRow;
use crate::error::{Error, Result};

/// Ordinary least squares of `ln mse` on `ln n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the residuals.
    pub stderr: f64,
    pub r_squared: f64,
    pub points: usize,
    /// Two-sided 95% Student-t interval for the slope.
    pub ci95: (f64, f64),
    /// `log10(n_max / n_min)`.
    pub span_decades: f64,
}

impl RateFit {
    pub fn ci_contains(&self, x: f64) -> bool {
        self.ci95.0 <= x && x <= self.ci95.1
    }
}

/// Fits `y ≈ c n^slope` through positive `(n, y)` pairs.
pub fn fit_power_law(ns: &[f64], ys: &[f64]) -> Result<RateFit> {
    let m = ns.len();
    if m != ys.len() {
        return Err(Error::Shape(format!("{m} abscissae for {} ordinates", ys.len())));
    }
    if m < 3 {
        return Err(Error::Config(format!("a rate fit needs at least 3 points, got {m}")));
    }
    if ns.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Diagnostic("log-log fit needs positive finite values".into()));
    }
    let x: Vec<f64> = ns.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mf = m as f64;
    let (xbar, ybar) = (x.iter().sum::<f64>() / mf, y.iter().sum::<f64>() / mf);
    let sxx: f64 = x.iter().map(|a| (a - xbar).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Diagnostic("all n values coincide".into()));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - xbar) * (b - ybar)).sum();
    let syy: f64 = y.iter().map(|b| (b - ybar).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let sse: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let stderr = (sse / (mf - 2.0) / sxx).sqrt();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let t = StudentsT::new(0.0, 1.0, mf - 2.0)
        .map_err(|e| Error::Diagnostic(format!("t distribution: {e}")))?
        .inverse_cdf(0.975);
    let (lo, hi) = ns.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    Ok(RateFit {
        slope,
        intercept,
        stderr,
        r_squared,
        points: m,
        ci95: (slope - t * stderr, slope + t * stderr),
        span_decades: (hi / lo).log10(),
    })
}

fn series(rows: &[ResultRow], variant: Variant, metric: Metric, eps: f64, d: usize) -> Vec<&ResultRow> {
    let mut out: Vec<&ResultRow> = rows
        .iter()
        .filter(|r| r.variant == variant && r.metric == metric && r.eps.to_bits() == eps.to_bits() && r.d == d)
        .collect();
    out.sort_by_key(|r| r.n);
    out
}

/// Slope of `log mse_mean` against `log n` for one series at fixed `(ε, d)`.
pub fn fit_rate(rows: &[ResultRow], variant: Variant, metric: Metric, eps: f64, d: usize) -> Result<RateFit> {
    let s = series(rows, variant, metric, eps, d);
    if s.len() < MIN_FIT_POINTS {
        return Err(Error::Config(format!(
            "{variant}:{metric} at eps={eps}, d={d} has {} grid points; a fit needs {MIN_FIT_POINTS}",
            s.len()
        )));
    }
    let ns: Vec<f64> = s.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = s.iter().map(|r| r.mse_mean).collect();
    fit_power_law(&ns, &ys)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EssPoint {
    pub n: usize,
    /// Non-private sample size with the same error as the private run at `n`.
    pub n_equivalent: f64,
    /// `n_equivalent / (nε²/d)`, or `d · n_equivalent / n` when `ε = ∞`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EssReport {
    pub variant: Variant,
    pub metric: Metric,
    pub eps: f64,
    pub d: usize,
    pub points: Vec<EssPoint>,
}

impl EssReport {
    pub fn within(&self, lo: f64, hi: f64) -> bool {
        self.points.iter().all(|p| lo <= p.ratio && p.ratio <= hi)
    }
}

/// Inverts the non-private error curve (piecewise linear in log-log,
/// extended linearly past its ends) at each private error level.
pub fn effective_sample_size_check(
    rows: &[ResultRow],
    private: Variant,
    metric: Metric,
    eps: f64,
    d: usize,
) -> Result<EssReport> {
    let base = series(rows, Variant::NonPrivate, metric, eps, d);
    let priv_rows = series(rows, private, metric, eps, d);
    if base.len() < 2 || priv_rows.is_empty() {
        return Err(Error::Config("effective sample size needs a non-private series with at least two points".into()));
    }
    let curve: Vec<(f64, f64)> = base.iter().map(|r| ((r.n as f64).ln(), r.mse_mean.ln())).collect();
    if curve.iter().any(|(_, y)| !y.is_finite()) || curve.windows(2).any(|w| w[1].1 >= w[0].1) {
        return Err(Error::Diagnostic("non-private error is not strictly decreasing in n".into()));
    }
    let invert = |y: f64| -> f64 {
        let last = curve.len() - 2;
        let seg = (0..=last).find(|&i| y >= curve[i + 1].1).unwrap_or(last);
        let ((x0, y0), (x1, y1)) = (curve[seg], curve[seg + 1]);
        (x0 + (y - y0) * (x1 - x0) / (y1 - y0)).exp()
    };
    let mut points = Vec::with_capacity(priv_rows.len());
    for r in priv_rows {
        if !(r.mse_mean > 0.0) {
            return Err(Error::Diagnostic(format!("zero private error at n={}", r.n)));
        }
        let n_equivalent = invert(r.mse_mean.ln());
        let scale = if eps.is_finite() { r.n as f64 * eps * eps / d as f64 } else { r.n as f64 / d as f64 };
        points.push(EssPoint { n: r.n, n_equivalent, ratio: n_equivalent / scale });
    }
    Ok(EssReport { variant: private, metric, eps, d, points })
}
