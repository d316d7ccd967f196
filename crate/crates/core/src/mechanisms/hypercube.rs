//! Strategy B: unbiased privatization on the corners `{-B, B}^d`.
//!
//! Given `‖v‖_∞ ≤ r`, draw `ṽ_j = ±r` independently with probabilities
//! `½ ± v_j/(2r)`, then release a uniform corner of the set agreeing with
//! `ṽ` (`<z, ṽ> > 0`) or of its complement (`<z, ṽ> ≤ 0`). Ties go to the
//! complement. The agreeing branch is taken with the probability that makes
//! every corner of the agreeing set exactly `e^ε` times as likely as every
//! corner of the complement; for odd `d` that is `e^ε/(e^ε + 1)`.

use rand::{Rng, RngCore};

use super::{check_len, BernoulliBias, HypercubeMargin, LocalMechanism, MechanismId, PrivatizedSample, DOMAIN_SLACK};
use crate::error::{param, Error, Result};
use crate::sampling::PrivacyBudget;

/// Largest dimension for which [`StrategyB::privacy_ratio`] enumerates the
/// output corners.
pub const RATIO_ENUMERATION_LIMIT: usize = 16;

#[derive(Clone, Debug)]
pub struct StrategyB {
    radius: f64,
    dim: usize,
    eps: f64,
    bound: f64,
    agree_probability: f64,
}

impl StrategyB {
    pub fn new(radius: f64, dim: usize, eps: f64) -> Result<Self> {
        let budget = PrivacyBudget::new(eps)?;
        let bound = super::hypercube_calibration(radius, dim, eps)?;
        let margin = HypercubeMargin::new(dim)?;
        let agree_probability = if dim % 2 == 1 {
            BernoulliBias::new(budget).pi_eps()
        } else {
            margin.agreeing_branch_probability(eps)
        };
        Ok(Self { radius, dim, eps, bound, agree_probability })
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

    /// Probability of releasing from the agreeing corner set.
    pub fn agree_probability(&self) -> f64 {
        self.agree_probability
    }

    fn check(&self, v: &[f64]) -> Result<()> {
        check_len(v, self.dim)?;
        let limit = self.radius * (1.0 + DOMAIN_SLACK);
        if let Some(x) = v.iter().find(|x| !(x.abs() <= limit)) {
            return Err(Error::Domain(format!("|v_j| = {} exceeds radius {}", x.abs(), self.radius)));
        }
        Ok(())
    }

    pub fn privatize_into<R: Rng + ?Sized>(&self, v: &[f64], rng: &mut R, out: &mut [f64]) -> Result<()> {
        self.check(v)?;
        check_len(out, self.dim)?;
        let words = self.dim.div_ceil(64);
        if words <= 4 {
            let mut target = [0u64; 4];
            let mut corner = [0u64; 4];
            self.sample_corner(v, rng, &mut target[..words], &mut corner[..words]);
            self.write_corner(&corner[..words], out);
        } else {
            let mut target = vec![0u64; words];
            let mut corner = vec![0u64; words];
            self.sample_corner(v, rng, &mut target, &mut corner);
            self.write_corner(&corner, out);
        }
        Ok(())
    }

    fn sample_corner<R: Rng + ?Sized>(&self, v: &[f64], rng: &mut R, target: &mut [u64], corner: &mut [u64]) {
        let d = self.dim;
        let half_inv_r = 0.5 / self.radius;
        target.iter_mut().for_each(|w| *w = 0);
        for (j, x) in v.iter().enumerate() {
            if rng.gen::<f64>() < 0.5 + x * half_inv_r {
                target[j / 64] |= 1 << (j % 64);
            }
        }
        let agree = rng.gen::<f64>() < self.agree_probability;
        let tail_mask = if d.is_multiple_of(64) { u64::MAX } else { (1u64 << (d % 64)) - 1 };
        let last = corner.len() - 1;
        loop {
            for (i, w) in corner.iter_mut().enumerate() {
                *w = rng.next_u64();
                if i == last {
                    *w &= tail_mask;
                }
            }
            let matches: u32 = corner
                .iter()
                .zip(target.iter())
                .enumerate()
                .map(|(i, (c, t))| {
                    let m = !(c ^ t);
                    (if i == last { m & tail_mask } else { m }).count_ones()
                })
                .sum();
            let inner = 2 * matches as i64 - d as i64;
            if agree {
                if inner == 0 {
                    continue;
                }
                if inner < 0 {
                    // Negating a corner maps the disagreeing set onto the
                    // agreeing one bijectively.
                    for (i, w) in corner.iter_mut().enumerate() {
                        *w = !*w;
                        if i == last {
                            *w &= tail_mask;
                        }
                    }
                }
                return;
            } else if inner <= 0 {
                return;
            }
        }
    }

    fn write_corner(&self, corner: &[u64], out: &mut [f64]) {
        for (j, z) in out.iter_mut().enumerate() {
            *z = if corner[j / 64] >> (j % 64) & 1 == 1 { self.bound } else { -self.bound };
        }
    }

    /// Output pmf of corner `signs` (±1 entries) given `v`, relative to the
    /// pmf value of the complement set.
    fn relative_pmf(&self, v: &[f64], signs: &[f64]) -> f64 {
        // K = #{j : sign ṽ_j = signs_j} is Poisson-binomial.
        let d = self.dim;
        let mut dist = vec![0.0; d + 1];
        dist[0] = 1.0;
        for (j, (x, s)) in v.iter().zip(signs).enumerate() {
            let p = (0.5 + s * x / (2.0 * self.radius)).clamp(0.0, 1.0);
            for k in (0..=j + 1).rev() {
                let stay = dist[k] * (1.0 - p);
                let up = if k > 0 { dist[k - 1] * p } else { 0.0 };
                dist[k] = stay + up;
            }
        }
        let agreeing: f64 = dist.iter().enumerate().filter(|(k, _)| 2 * k > d).map(|(_, p)| p).sum();
        1.0 + (self.eps.exp() - 1.0) * agreeing
    }
}

impl LocalMechanism for StrategyB {
    fn id(&self) -> MechanismId {
        MechanismId::HypercubeCorner
    }

    fn eps(&self) -> f64 {
        self.eps
    }

    fn privatize(&self, x: &[f64], rng: &mut dyn RngCore) -> Result<PrivatizedSample> {
        let mut z = vec![0.0; self.dim];
        self.privatize_into(x, rng, &mut z)?;
        Ok(PrivatizedSample { z, mechanism: MechanismId::HypercubeCorner, bound: Some(self.bound), eps: self.eps })
    }

    /// Exact maximum over all `2^d` corners; each corner's pmf is
    /// `p_lo + (p_hi − p_lo) P(<z, ṽ> > 0 | v)` with `p_hi = e^ε p_lo`.
    fn privacy_ratio(&self, x: &[f64], x_prime: &[f64]) -> Result<f64> {
        self.check(x)?;
        self.check(x_prime)?;
        if self.dim > RATIO_ENUMERATION_LIMIT {
            return Err(Error::Unsupported(format!(
                "exact hypercube privacy ratio is limited to d <= {RATIO_ENUMERATION_LIMIT}"
            )));
        }
        let d = self.dim;
        let mut signs = vec![0.0; d];
        let mut worst: f64 = 0.0;
        for bits in 0u32..(1u32 << d) {
            for (j, s) in signs.iter_mut().enumerate() {
                *s = if bits >> j & 1 == 1 { 1.0 } else { -1.0 };
            }
            worst = worst.max(self.relative_pmf(x, &signs) / self.relative_pmf(x_prime, &signs));
        }
        Ok(worst)
    }
}

/// One-shot form of [`StrategyB`].
pub fn strategy_b<R: Rng + ?Sized>(v: &[f64], r: f64, eps: f64, rng: &mut R) -> Result<PrivatizedSample> {
    if v.is_empty() {
        return param("vector must be non-empty");
    }
    let mech = StrategyB::new(r, v.len(), eps)?;
    let mut z = vec![0.0; v.len()];
    mech.privatize_into(v, rng, &mut z)?;
    Ok(PrivatizedSample { z, mechanism: MechanismId::HypercubeCorner, bound: Some(mech.bound), eps })
}
