//! Private mean estimation: truncated Laplace in one dimension, the sphere
//! and hypercube samplers in `d` dimensions, soft-thresholding for sparse
//! means, and the coordinatewise Laplace baseline.

use rand::Rng;
use rand_distr::Distribution;

use super::{budget, rows};
use crate::error::{param, Error, Result};
use crate::mechanisms::{StrategyA, StrategyB, TruncatedLaplace};
use crate::numeric::pairwise_mean;
use crate::sampling::Laplace;

/// `T = (5(k−1))^{−1/(2k)} (nε²)^{1/(2k)}`, the truncation level balancing
/// the clipping bias against the Laplace variance for laws with `E|X|^k ≤ 1`.
pub fn default_truncation(n: usize, eps: f64, k: f64) -> Result<f64> {
    if !(k > 1.0) {
        return param(format!("moment order must exceed 1, got {k}"));
    }
    if n == 0 {
        return param("no samples");
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return param(format!("privacy budget must be positive and finite, got {eps}"));
    }
    let m = n as f64 * eps * eps;
    Ok((5.0 * (k - 1.0)).powf(-0.5 / k) * m.powf(0.5 / k))
}

/// Truncate at the default level for moment order `k`, add Laplace noise
/// and average.
pub fn mean_1d<R: Rng + ?Sized>(samples: &[f64], eps: f64, k: f64, rng: &mut R) -> Result<f64> {
    if !(k > 1.0) {
        return param(format!("moment order must exceed 1, got {k}"));
    }
    match budget(eps)? {
        None => Ok(mean_nonprivate(samples, 1)?[0]),
        Some(e) => mean_1d_truncated(samples, e, default_truncation(samples.len(), e, k)?, rng),
    }
}

/// [`mean_1d`] with an explicit truncation level.
pub fn mean_1d_truncated<R: Rng + ?Sized>(samples: &[f64], eps: f64, level: f64, rng: &mut R) -> Result<f64> {
    if samples.is_empty() {
        return param("no samples");
    }
    let mech = TruncatedLaplace::new(level, eps)?;
    let z: Vec<f64> = samples.iter().map(|&x| mech.privatize_scalar(x, rng)).collect();
    Ok(pairwise_mean(&z))
}

/// Coordinatewise sample mean of flat row-major samples.
pub fn mean_nonprivate(samples: &[f64], d: usize) -> Result<Vec<f64>> {
    let n = rows(samples, d)?;
    let mut sum = vec![0.0; d];
    for row in samples.chunks_exact(d) {
        for (s, x) in sum.iter_mut().zip(row) {
            *s += x;
        }
    }
    let inv = 1.0 / n as f64;
    Ok(sum.into_iter().map(|s| s * inv).collect())
}

fn privatized_mean<R, F>(samples: &[f64], d: usize, rng: &mut R, mut privatize: F) -> Result<Vec<f64>>
where
    R: Rng + ?Sized,
    F: FnMut(&[f64], &mut R, &mut [f64]) -> Result<()>,
{
    let n = rows(samples, d)?;
    let mut sum = vec![0.0; d];
    let mut z = vec![0.0; d];
    for row in samples.chunks_exact(d) {
        privatize(row, rng, &mut z)?;
        for (s, v) in sum.iter_mut().zip(&z) {
            *s += v;
        }
    }
    let inv = 1.0 / n as f64;
    Ok(sum.into_iter().map(|s| s * inv).collect())
}

/// Sphere-sampler privatization of samples with `‖x‖₂ ≤ r`, then the mean.
/// Samples from an ℓp ball with `p ≤ 2` lie in the ℓ2 ball of the same
/// radius.
pub fn mean_l2<R: Rng + ?Sized>(samples: &[f64], d: usize, r: f64, eps: f64, rng: &mut R) -> Result<Vec<f64>> {
    let Some(eps) = budget(eps)? else {
        return mean_nonprivate(samples, d);
    };
    let mech = StrategyA::new(r, d, eps)?;
    privatized_mean(samples, d, rng, |x, rng, z| mech.privatize_into(x, rng, z))
}

/// Hypercube-sampler privatization of samples with `‖x‖_∞ ≤ r`, then the
/// mean.
pub fn mean_linf<R: Rng + ?Sized>(samples: &[f64], d: usize, r: f64, eps: f64, rng: &mut R) -> Result<Vec<f64>> {
    let Some(eps) = budget(eps)? else {
        return mean_nonprivate(samples, d);
    };
    let mech = StrategyB::new(r, d, eps)?;
    privatized_mean(samples, d, rng, |x, rng, z| mech.privatize_into(x, rng, z))
}

/// `λ = √(d log d / (nε²))`.
pub fn default_sparse_lambda(n: usize, d: usize, eps: f64) -> f64 {
    let d = d as f64;
    (d * d.ln().max(0.0) / (n as f64 * eps * eps)).sqrt()
}

/// `sign(z) max(|z| − λ, 0)`, the minimiser of `½‖θ − z‖² + λ‖θ‖₁`.
pub fn soft_threshold(z: &[f64], lambda: f64) -> Vec<f64> {
    z.iter().map(|&v| v.signum() * (v.abs() - lambda).max(0.0)).collect()
}

/// Hypercube-sampler mean followed by soft-thresholding at `lambda`
/// (default [`default_sparse_lambda`]).
pub fn mean_sparse<R: Rng + ?Sized>(
    samples: &[f64],
    d: usize,
    r: f64,
    eps: f64,
    lambda: Option<f64>,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let n = rows(samples, d)?;
    let lambda = match lambda {
        Some(l) if l >= 0.0 && l.is_finite() => l,
        Some(l) => return param(format!("λ must be non-negative, got {l}")),
        None if eps.is_finite() => default_sparse_lambda(n, d, eps),
        None => 0.0,
    };
    let zbar = mean_linf(samples, d, r, eps, rng)?;
    Ok(soft_threshold(&zbar, lambda))
}

/// Coordinatewise Laplace noise of rate `ε/√d` on samples from the unit ℓ2
/// ball, then the mean.
pub fn mean_l2_laplace_baseline<R: Rng + ?Sized>(samples: &[f64], d: usize, eps: f64, rng: &mut R) -> Result<Vec<f64>> {
    let Some(eps) = budget(eps)? else {
        return mean_nonprivate(samples, d);
    };
    for row in samples.chunks(d) {
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1.0 + 1e-9 {
            return Err(Error::Domain(format!("‖x‖₂ = {norm} exceeds 1")));
        }
    }
    let noise = Laplace::new(eps / (d as f64).sqrt())?;
    privatized_mean(samples, d, rng, |x, rng, z| {
        for (zi, xi) in z.iter_mut().zip(x) {
            *zi = xi + noise.sample(rng);
        }
        Ok(())
    })
}
