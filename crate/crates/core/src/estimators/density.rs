//! Private density estimation on `[0, 1]`: a projected histogram and a
//! trigonometric series privatized by the hypercube sampler (or, for
//! comparison, by Laplace noise).

use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use rand_distr::Distribution;

use super::budget;
use super::simplex::project_simplex;
use crate::error::{param, Error, Result};
use crate::mechanisms::StrategyB;
use crate::numeric::{adaptive_simpson, CompensatedSum};
use crate::sampling::Laplace;

/// Trigonometric basis of `L²([0, 1])`: `φ₀ = 1`, `φ_{2m−1}(t) = √2 sin(2πmt)`
/// and `φ_{2m}(t) = √2 cos(2πmt)` for `m ≥ 1`.
pub fn trig_basis(j: usize, t: f64) -> f64 {
    if j == 0 {
        return 1.0;
    }
    let m = j.div_ceil(2) as f64;
    let arg = 2.0 * PI * m * t;
    if j % 2 == 1 {
        SQRT_2 * arg.sin()
    } else {
        SQRT_2 * arg.cos()
    }
}

/// `out[j] = φ_j(t)` for `j < out.len()`.
pub(crate) fn fill_trig_basis(t: f64, out: &mut [f64]) {
    let Some((first, rest)) = out.split_first_mut() else {
        return;
    };
    *first = 1.0;
    // Angle addition from (sin 2πt, cos 2πt); the rounding error grows
    // linearly in m and stays near 1e-14 for the term counts used here.
    let (s1, c1) = (2.0 * PI * t).sin_cos();
    let (mut s, mut c) = (s1, c1);
    for pair in rest.chunks_mut(2) {
        pair[0] = SQRT_2 * s;
        if let Some(slot) = pair.get_mut(1) {
            *slot = SQRT_2 * c;
        }
        (s, c) = (s * c1 + c * s1, c * c1 - s * s1);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DensityEstimate {
    /// Bin heights on the partition `[(j−1)/k, j/k)` with the last bin
    /// closed; the heights sum to `k`.
    Histogram { heights: Vec<f64> },
    /// Coefficients on `φ₀, …, φ_{k−1}`.
    OrthoSeries { coefficients: Vec<f64> },
}

impl DensityEstimate {
    /// Number of bins or series terms.
    pub fn terms(&self) -> usize {
        match self {
            DensityEstimate::Histogram { heights } => heights.len(),
            DensityEstimate::OrthoSeries { coefficients } => coefficients.len(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            DensityEstimate::Histogram { heights } => {
                let k = heights.len();
                heights[bin_index(t, k)]
            }
            DensityEstimate::OrthoSeries { coefficients } => {
                coefficients.iter().enumerate().map(|(j, a)| a * trig_basis(j, t)).sum()
            }
        }
    }

    /// `∫₀¹ f̂`.
    pub fn mass(&self) -> f64 {
        match self {
            DensityEstimate::Histogram { heights } => heights.iter().sum::<f64>() / heights.len() as f64,
            DensityEstimate::OrthoSeries { coefficients } => coefficients.first().copied().unwrap_or(0.0),
        }
    }

    /// `∫₀¹ (f̂ − f)²` by adaptive quadrature on panels where `f̂` is smooth.
    pub fn ise<F: Fn(f64) -> f64>(&self, f: &F) -> f64 {
        let panels = match self {
            DensityEstimate::Histogram { heights } => heights.len(),
            DensityEstimate::OrthoSeries { coefficients } => 4 * coefficients.len().max(16),
        };
        let mut total = CompensatedSum::default();
        for p in 0..panels {
            let (a, b) = (p as f64 / panels as f64, (p + 1) as f64 / panels as f64);
            let g = |t: f64| {
                let value = match self {
                    // The bin is fixed on the panel; avoid the boundary lookup.
                    DensityEstimate::Histogram { heights } => heights[p],
                    DensityEstimate::OrthoSeries { .. } => self.eval(t),
                };
                (value - f(t)).powi(2)
            };
            total.add(adaptive_simpson(&g, a, b, 1e-13));
        }
        total.value()
    }

    /// `∫₀¹ (f̂ − f)²` by Parseval when `f = Σ_j c_j φ_j` (finitely many terms).
    pub fn series_ise(&self, truth: &[f64]) -> Result<f64> {
        let DensityEstimate::OrthoSeries { coefficients } = self else {
            return Err(Error::Unsupported("Parseval error needs a series estimate".into()));
        };
        let len = coefficients.len().max(truth.len());
        let at = |v: &[f64], j: usize| v.get(j).copied().unwrap_or(0.0);
        Ok((0..len).map(|j| (at(coefficients, j) - at(truth, j)).powi(2)).collect::<CompensatedSum>().value())
    }
}

fn bin_index(t: f64, k: usize) -> usize {
    ((t * k as f64) as usize).min(k - 1)
}

fn check_unit_interval(samples: &[f64]) -> Result<()> {
    if samples.is_empty() {
        return param("no samples");
    }
    if let Some(x) = samples.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::Domain(format!("sample {x} outside [0, 1]")));
    }
    Ok(())
}

fn sample_size_rule(n: usize, eps: f64, exponent: f64) -> Result<usize> {
    if !(eps > 0.0 && eps.is_finite()) {
        return param(format!("the size rule needs a finite positive ε, got {eps}"));
    }
    Ok(((n as f64 * eps * eps).powf(exponent).round() as usize).max(1))
}

/// `k = max(1, round((nε²)^{1/4}))`.
pub fn histogram_bins(n: usize, eps: f64) -> Result<usize> {
    sample_size_rule(n, eps, 0.25)
}

/// `k = max(1, round((nε²)^{1/(2β+2)}))`.
pub fn orthoseries_terms(n: usize, eps: f64, beta: f64) -> Result<usize> {
    check_beta(beta)?;
    sample_size_rule(n, eps, 1.0 / (2.0 * beta + 2.0))
}

/// `k = max(1, round((nε²)^{1/(2β+3)}))`, the balance point of the Laplace
/// series estimator.
pub fn orthoseries_laplace_terms(n: usize, eps: f64, beta: f64) -> Result<usize> {
    check_beta(beta)?;
    sample_size_rule(n, eps, 1.0 / (2.0 * beta + 3.0))
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 1.0 && beta.is_finite()) {
        return param(format!("smoothness must be at least 1, got {beta}"));
    }
    Ok(())
}

/// Histogram with [`histogram_bins`] bins.
pub fn histogram_density<R: Rng + ?Sized>(samples: &[f64], eps: f64, rng: &mut R) -> Result<DensityEstimate> {
    histogram_density_with_bins(samples, histogram_bins(samples.len(), eps)?, eps, rng)
}

/// Each sample releases its one-hot bin vector plus iid Laplace noise of
/// rate `ε/2`; the scaled mean `(k/n) Σ Z_i` is projected onto `kΔ_k`.
pub fn histogram_density_with_bins<R: Rng + ?Sized>(
    samples: &[f64],
    k: usize,
    eps: f64,
    rng: &mut R,
) -> Result<DensityEstimate> {
    check_unit_interval(samples)?;
    if k == 0 {
        return param("at least one bin is required");
    }
    let mut sums = vec![0.0; k];
    for &x in samples {
        sums[bin_index(x, k)] += 1.0;
    }
    if let Some(eps) = budget(eps)? {
        let noise = Laplace::new(0.5 * eps)?;
        for _ in samples {
            for s in sums.iter_mut() {
                *s += noise.sample(rng);
            }
        }
    }
    let scale = k as f64 / samples.len() as f64;
    let raw: Vec<f64> = sums.iter().map(|s| s * scale).collect();
    Ok(DensityEstimate::Histogram { heights: project_simplex(&raw, k as f64)? })
}

/// Channel used by the series estimator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesNoise {
    /// Hypercube sampler with `r = √2` on `(φ_j(X))_{j<k}`.
    Hypercube,
    /// `(φ_j(X))_{j<k}` plus iid Laplace noise of rate `ε/(2√2 k)`.
    Laplace,
}

/// Series estimator with [`orthoseries_terms`] terms and the hypercube
/// sampler.
pub fn orthoseries_density<R: Rng + ?Sized>(samples: &[f64], eps: f64, beta: f64, rng: &mut R) -> Result<DensityEstimate> {
    let k = orthoseries_terms(samples.len(), eps, beta)?;
    orthoseries_with_terms(samples, k, eps, SeriesNoise::Hypercube, rng)
}

/// Series estimator with [`orthoseries_laplace_terms`] terms and Laplace
/// noise.
pub fn orthoseries_density_laplace<R: Rng + ?Sized>(
    samples: &[f64],
    eps: f64,
    beta: f64,
    rng: &mut R,
) -> Result<DensityEstimate> {
    let k = orthoseries_laplace_terms(samples.len(), eps, beta)?;
    orthoseries_with_terms(samples, k, eps, SeriesNoise::Laplace, rng)
}

/// `f̂ = (1/n) Σ_i Σ_{j<k} Z_{ij} φ_j` with `E[Z_{ij} | X_i] = φ_j(X_i)`.
pub fn orthoseries_with_terms<R: Rng + ?Sized>(
    samples: &[f64],
    k: usize,
    eps: f64,
    noise: SeriesNoise,
    rng: &mut R,
) -> Result<DensityEstimate> {
    check_unit_interval(samples)?;
    if k == 0 {
        return param("at least one series term is required");
    }
    let mut sums = vec![0.0; k];
    let mut v = vec![0.0; k];
    let mut z = vec![0.0; k];
    let eps = budget(eps)?;
    let hypercube = match (noise, eps) {
        (SeriesNoise::Hypercube, Some(e)) => Some(StrategyB::new(SQRT_2, k, e)?),
        _ => None,
    };
    let laplace = match (noise, eps) {
        (SeriesNoise::Laplace, Some(e)) => Some(Laplace::new(e / (2.0 * SQRT_2 * k as f64))?),
        _ => None,
    };
    for &x in samples {
        fill_trig_basis(x, &mut v);
        if let Some(mech) = &hypercube {
            mech.privatize_into(&v, rng, &mut z)?;
        } else if let Some(lap) = &laplace {
            for (zj, vj) in z.iter_mut().zip(&v) {
                *zj = vj + lap.sample(rng);
            }
        } else {
            z.copy_from_slice(&v);
        }
        for (s, zj) in sums.iter_mut().zip(&z) {
            *s += zj;
        }
    }
    let inv = 1.0 / samples.len() as f64;
    Ok(DensityEstimate::OrthoSeries { coefficients: sums.into_iter().map(|s| s * inv).collect() })
}
