//! Multinomial estimation from randomized response or Laplace-perturbed
//! one-hot vectors.

use rand::Rng;
use rand_distr::Distribution;

use super::budget;
use super::simplex::SimplexVector;
use crate::error::{param, Error, Result};
use crate::mechanisms::{MechanismId, PrivatizedSample, RandomizedResponse};
use crate::sampling::Laplace;

fn check_categories(categories: &[usize], d: usize) -> Result<()> {
    if d == 0 {
        return param("number of categories must be at least 1");
    }
    if categories.is_empty() {
        return param("no samples");
    }
    if let Some(c) = categories.iter().find(|&&c| c >= d) {
        return Err(Error::Domain(format!("category {c} out of range for d = {d}")));
    }
    Ok(())
}

/// Unbiased (unprojected) estimate from the column sums of `n` reports:
/// `(S/n − 1/(1+e^{ε/2})) (e^{ε/2}+1)/(e^{ε/2}−1)`.
pub fn multinomial_debias(column_sums: &[f64], n: usize, eps: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return param("no samples");
    }
    let inv_n = 1.0 / n as f64;
    Ok(match budget(eps)? {
        None => column_sums.iter().map(|s| s * inv_n).collect(),
        Some(eps) => {
            let h = (0.5 * eps).exp();
            let offset = 1.0 / (1.0 + h);
            let factor = (h + 1.0) / (h - 1.0);
            column_sums.iter().map(|s| (s * inv_n - offset) * factor).collect()
        }
    })
}

/// Debias and project a batch of randomized-response reports released at
/// budget `eps`.
pub fn multinomial_estimate(reports: &[PrivatizedSample], eps: f64) -> Result<SimplexVector> {
    let first = reports.first().ok_or_else(|| Error::Parameter("no reports".into()))?;
    let d = first.z.len();
    let mut sums = vec![0.0; d];
    for r in reports {
        if r.mechanism != MechanismId::RandomizedResponse {
            return Err(Error::Unsupported(format!("report from mechanism {}", r.mechanism)));
        }
        if r.eps != eps {
            return Err(Error::Parameter(format!("mixed budgets in batch: {} vs {eps}", r.eps)));
        }
        if r.z.len() != d {
            return Err(Error::Shape("reports of different lengths".into()));
        }
        for (s, z) in sums.iter_mut().zip(&r.z) {
            *s += z;
        }
    }
    SimplexVector::project(&multinomial_debias(&sums, reports.len(), eps)?)
}

/// Privatize each category by randomized response and estimate.
pub fn multinomial_rr<R: Rng + ?Sized>(categories: &[usize], d: usize, eps: f64, rng: &mut R) -> Result<SimplexVector> {
    check_categories(categories, d)?;
    let mut sums = vec![0.0; d];
    match budget(eps)? {
        None => categories.iter().for_each(|&c| sums[c] += 1.0),
        Some(eps) => {
            let mech = RandomizedResponse::new(d, eps)?;
            let mut z = vec![0.0; d];
            for &c in categories {
                mech.privatize_category_into(c, rng, &mut z)?;
                for (s, v) in sums.iter_mut().zip(&z) {
                    *s += v;
                }
            }
        }
    }
    SimplexVector::project(&multinomial_debias(&sums, categories.len(), eps)?)
}

/// One-hot vectors plus iid Laplace noise of rate `ε/2` (the ℓ1 diameter of
/// the simplex is 2), averaged and projected.
pub fn multinomial_estimate_laplace<R: Rng + ?Sized>(
    categories: &[usize],
    d: usize,
    eps: f64,
    rng: &mut R,
) -> Result<SimplexVector> {
    check_categories(categories, d)?;
    let mut sums = vec![0.0; d];
    categories.iter().for_each(|&c| sums[c] += 1.0);
    if let Some(eps) = budget(eps)? {
        let noise = Laplace::new(0.5 * eps)?;
        for _ in categories {
            for s in sums.iter_mut() {
                *s += noise.sample(rng);
            }
        }
    }
    let inv_n = 1.0 / categories.len() as f64;
    let mean: Vec<f64> = sums.iter().map(|s| s * inv_n).collect();
    SimplexVector::project(&mean)
}

#[cfg(test)]
/// Empirical frequencies of `categories`.
pub(crate) fn frequencies(categories: &[usize], d: usize) -> Vec<f64> {
    let mut f = vec![0.0; d];
    categories.iter().for_each(|&c| f[c] += 1.0);
    let inv = 1.0 / categories.len() as f64;
    f.iter_mut().for_each(|x| *x *= inv);
    f
}
