//! Strategy A: unbiased privatization on the ℓ2-sphere of radius `B`.
//!
//! Given `‖v‖₂ ≤ r`, pick `ṽ = ±r v/‖v‖` with probabilities
//! `½ ± ‖v‖/(2r)`, then draw `Z` uniformly from the half of the radius-`B`
//! sphere agreeing with `ṽ` (probability `π_ε`) or from the other half.
//! For `v = 0` the direction is the first basis vector, taken with either
//! sign with probability ½.

use rand::{Rng, RngCore};

use super::{check_len, l2_norm, l2_calibration, BernoulliBias, LocalMechanism, MechanismId, PrivatizedSample, DOMAIN_SLACK};
use crate::error::{param, Error, Result};
use crate::sampling::{fill_uniform_sphere, PrivacyBudget};

#[derive(Clone, Debug)]
pub struct StrategyA {
    radius: f64,
    dim: usize,
    eps: f64,
    bound: f64,
    pi: f64,
}

impl StrategyA {
    pub fn new(radius: f64, dim: usize, eps: f64) -> Result<Self> {
        let bound = l2_calibration(radius, dim, eps)?;
        let pi = BernoulliBias::new(PrivacyBudget::new(eps)?).pi_eps();
        Ok(Self { radius, dim, eps, bound, pi })
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn check(&self, v: &[f64]) -> Result<f64> {
        check_len(v, self.dim)?;
        let norm = l2_norm(v);
        if !norm.is_finite() || norm > self.radius * (1.0 + DOMAIN_SLACK) {
            return Err(Error::Domain(format!("‖v‖₂ = {norm} exceeds radius {}", self.radius)));
        }
        Ok(norm)
    }

    /// Probability that `ṽ` points along `+v/‖v‖` (along `+e₁` for `v = 0`).
    fn forward_probability(&self, norm: f64) -> f64 {
        (0.5 + norm / (2.0 * self.radius)).min(1.0)
    }

    pub fn privatize_into<R: Rng + ?Sized>(&self, v: &[f64], rng: &mut R, out: &mut [f64]) -> Result<()> {
        let norm = self.check(v)?;
        check_len(out, self.dim)?;
        let forward = rng.gen::<f64>() < self.forward_probability(norm);
        let agree = rng.gen::<f64>() < self.pi;
        fill_uniform_sphere(out, rng);
        let along = if norm > 0.0 {
            out.iter().zip(v).map(|(z, x)| z * x).sum::<f64>()
        } else {
            out[0]
        };
        // Sign of <z, ṽ>; reflecting z through the origin swaps hemispheres
        // and preserves the uniform law.
        let positive = if forward { along > 0.0 } else { along < 0.0 };
        let scale = if positive == agree { self.bound } else { -self.bound };
        out.iter_mut().for_each(|z| *z *= scale);
        Ok(())
    }

    /// Density of `Z` (up to the common factor `1/area`) on the half-sphere
    /// with the given sign of `<z, u>`, `u` the canonical direction of `v`.
    fn half_density(&self, norm: f64, positive: bool) -> f64 {
        let q = self.forward_probability(norm);
        if positive {
            q * self.pi + (1.0 - q) * (1.0 - self.pi)
        } else {
            q * (1.0 - self.pi) + (1.0 - q) * self.pi
        }
    }
}

impl LocalMechanism for StrategyA {
    fn id(&self) -> MechanismId {
        MechanismId::L2Sphere
    }

    fn eps(&self) -> f64 {
        self.eps
    }

    fn privatize(&self, x: &[f64], rng: &mut dyn RngCore) -> Result<PrivatizedSample> {
        let mut z = vec![0.0; self.dim];
        self.privatize_into(x, rng, &mut z)?;
        Ok(PrivatizedSample { z, mechanism: MechanismId::L2Sphere, bound: Some(self.bound), eps: self.eps })
    }

    /// The output density takes one value on each half-sphere cut by the
    /// direction of the input, so the ratio is a maximum over the sign
    /// patterns `(sign<z,u>, sign<z,u'>)` that occur on a set of positive
    /// measure: all four when `u` and `u'` are not parallel.
    fn privacy_ratio(&self, x: &[f64], x_prime: &[f64]) -> Result<f64> {
        let n1 = self.check(x)?;
        let n2 = self.check(x_prime)?;
        let dir = |v: &[f64], n: f64| -> Vec<f64> {
            if n > 0.0 {
                v.iter().map(|c| c / n).collect()
            } else {
                let mut e = vec![0.0; v.len()];
                e[0] = 1.0;
                e
            }
        };
        let (u1, u2) = (dir(x, n1), dir(x_prime, n2));
        let cos: f64 = u1.iter().zip(&u2).map(|(a, b)| a * b).sum();
        let parallel = self.dim == 1 || cos.abs() >= 1.0 - 1e-14;
        let mut worst: f64 = 0.0;
        for s1 in [true, false] {
            for s2 in [true, false] {
                if parallel && ((cos > 0.0) != (s1 == s2)) {
                    continue;
                }
                worst = worst.max(self.half_density(n1, s1) / self.half_density(n2, s2));
            }
        }
        Ok(worst)
    }
}

/// One-shot form of [`StrategyA`].
pub fn strategy_a<R: Rng + ?Sized>(v: &[f64], r: f64, eps: f64, rng: &mut R) -> Result<PrivatizedSample> {
    if v.is_empty() {
        return param("vector must be non-empty");
    }
    let mech = StrategyA::new(r, v.len(), eps)?;
    let mut z = vec![0.0; v.len()];
    mech.privatize_into(v, rng, &mut z)?;
    Ok(PrivatizedSample { z, mechanism: MechanismId::L2Sphere, bound: Some(mech.bound), eps })
}
