//! Euclidean projection onto the scaled probability simplex.

use crate::error::{param, Error, Result};

/// A probability vector.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexVector {
    theta: Vec<f64>,
}

impl SimplexVector {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return param("simplex vector must be non-empty");
        }
        if theta.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::Domain("simplex entries must be finite and non-negative".into()));
        }
        let total: f64 = theta.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("simplex entries sum to {total}")));
        }
        Ok(Self { theta })
    }

    /// Projection of an arbitrary vector.
    pub fn project(v: &[f64]) -> Result<Self> {
        Ok(Self { theta: project_simplex(v, 1.0)? })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.theta
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }
}

/// Projection of `v` onto `{θ ≥ 0 : Σθ = scale}` in O(d log d).
///
/// The projection is `max(v − τ, 0)` for the unique threshold `τ` at which
/// the positive parts sum to `scale`; `τ` is read off the sorted prefix sums.
pub fn project_simplex(v: &[f64], scale: f64) -> Result<Vec<f64>> {
    if !(scale > 0.0 && scale.is_finite()) {
        return param(format!("simplex scale must be positive, got {scale}"));
    }
    if v.is_empty() {
        return param("cannot project an empty vector");
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("cannot project a vector with non-finite entries".into()));
    }
    let mut sorted = v.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut prefix = 0.0;
    let mut tau = 0.0;
    for (j, u) in sorted.iter().enumerate() {
        prefix += u;
        let candidate = (prefix - scale) / (j + 1) as f64;
        if u - candidate > 0.0 {
            tau = candidate;
        } else {
            break;
        }
    }
    let mut out: Vec<f64> = v.iter().map(|x| (x - tau).max(0.0)).collect();
    // Absorb the rounding residual in the largest entry.
    let total: f64 = out.iter().sum();
    let top = (0..out.len()).max_by(|&a, &b| out[a].total_cmp(&out[b])).unwrap_or(0);
    out[top] = (out[top] + scale - total).max(0.0);
    Ok(out)
}
