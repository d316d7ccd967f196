//! Divergences between distributions on a finite set of atoms.
//!
//! All logarithms are natural. `0 · log(0/q) = 0`; `p · log(p/0) = +∞` for
//! `p > 0`, so KL is a total function on valid inputs.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

const MASS_TOL: f64 = 1e-12;

/// Probability vector over `len()` atoms.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DiscreteDistribution {
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Shape("distribution needs at least one atom".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::Parameter(format!("probability {p} is not a finite non-negative number")));
        }
        let total: CompensatedSum = probs.iter().copied().collect();
        if (total.value() - 1.0).abs() > MASS_TOL {
            return Err(Error::Parameter(format!("probabilities sum to {}, not 1", total.value())));
        }
        Ok(Self { probs })
    }

    /// Normalise non-negative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::Parameter("weights must be non-negative with positive total".into()));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Shape("distribution needs at least one atom".into()));
        }
        Ok(Self { probs: vec![1.0 / n as f64; n] })
    }

    pub fn point_mass(n: usize, atom: usize) -> Result<Self> {
        if atom >= n {
            return Err(Error::Shape(format!("atom {atom} out of range for {n} atoms")));
        }
        let mut probs = vec![0.0; n];
        probs[atom] = 1.0;
        Ok(Self { probs })
    }

    /// Weighted mixture `Σ w_i P_i`.
    pub fn mixture(weights: &[f64], parts: &[DiscreteDistribution]) -> Result<Self> {
        if weights.len() != parts.len() || parts.is_empty() {
            return Err(Error::Shape("mixture weights and components differ in length".into()));
        }
        let n = parts[0].len();
        if parts.iter().any(|p| p.len() != n) {
            return Err(Error::Shape("mixture components have different atom counts".into()));
        }
        let mut probs = vec![0.0; n];
        for (w, p) in weights.iter().zip(parts) {
            for (acc, q) in probs.iter_mut().zip(p.probs()) {
                *acc += w * q;
            }
        }
        Self::from_weights(&probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

fn check_shapes(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::Shape(format!("atom counts differ: {} vs {}", p.len(), q.len())));
    }
    Ok(())
}

/// `D(p‖q) = Σ p log(p/q)`.
pub fn kl_divergence(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    check_shapes(p, q)?;
    let mut acc = CompensatedSum::default();
    for (&pi, &qi) in p.probs().iter().zip(q.probs()) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Ok(f64::INFINITY);
        }
        acc.add(pi * (pi / qi).ln());
    }
    // Rounding can leave a tiny negative residue for p ≈ q.
    Ok(acc.value().max(0.0))
}

/// `D(p‖q) + D(q‖p)`.
pub fn symmetrized_kl(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    Ok(kl_divergence(p, q)? + kl_divergence(q, p)?)
}

/// `½ Σ |p_i − q_i|`.
pub fn tv_distance(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    check_shapes(p, q)?;
    let s: CompensatedSum = p.probs().iter().zip(q.probs()).map(|(a, b)| (a - b).abs()).collect();
    Ok((0.5 * s.value()).min(1.0))
}

/// `I(Z; V) = Σ_ν prior(ν) D(M_ν ‖ M̄)` with `M̄ = Σ_ν prior(ν) M_ν`.
pub fn mutual_information(prior: &DiscreteDistribution, marginals: &[DiscreteDistribution]) -> Result<f64> {
    if prior.len() != marginals.len() {
        return Err(Error::Shape(format!(
            "prior has {} atoms but {} channel marginals were given",
            prior.len(),
            marginals.len()
        )));
    }
    let mixture = DiscreteDistribution::mixture(prior.probs(), marginals)?;
    let mut acc = CompensatedSum::default();
    for (w, m) in prior.probs().iter().zip(marginals) {
        if *w > 0.0 {
            acc.add(w * kl_divergence(m, &mixture)?);
        }
    }
    Ok(acc.value().max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dd(p: &[f64]) -> DiscreteDistribution {
        DiscreteDistribution::new(p.to_vec()).unwrap()
    }

    #[test]
    fn rejects_bad_vectors() {
        assert!(DiscreteDistribution::new(vec![]).is_err());
        assert!(DiscreteDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(DiscreteDistribution::new(vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn kl_examples() {
        let u = dd(&[0.5, 0.5]);
        assert_eq!(kl_divergence(&u, &u).unwrap(), 0.0);
        let v = kl_divergence(&dd(&[1.0, 0.0]), &u).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-15);
        assert_eq!(kl_divergence(&u, &dd(&[0.0, 1.0])).unwrap(), f64::INFINITY);
        assert!(matches!(kl_divergence(&u, &dd(&[1.0])), Err(Error::Shape(_))));
    }

    #[test]
    fn tv_examples() {
        let p = dd(&[0.7, 0.3]);
        assert_eq!(tv_distance(&p, &p).unwrap(), 0.0);
        assert_eq!(tv_distance(&dd(&[1.0, 0.0]), &dd(&[0.0, 1.0])).unwrap(), 1.0);
        assert!((tv_distance(&p, &dd(&[0.4, 0.6])).unwrap() - 0.3).abs() < 1e-15);
        assert!(tv_distance(&p, &dd(&[1.0])).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        let u = DiscreteDistribution::uniform(2).unwrap();
        let same = vec![dd(&[0.3, 0.7]), dd(&[0.3, 0.7])];
        assert_eq!(mutual_information(&u, &same).unwrap(), 0.0);

        let split = vec![dd(&[1.0, 0.0]), dd(&[0.0, 1.0])];
        assert!((mutual_information(&u, &split).unwrap() - 2f64.ln()).abs() < 1e-15);

        let degenerate = dd(&[1.0, 0.0]);
        assert_eq!(mutual_information(&degenerate, &split).unwrap(), 0.0);

        assert!(mutual_information(&DiscreteDistribution::uniform(3).unwrap(), &split).is_err());
    }

    fn arb_pair() -> impl Strategy<Value = (DiscreteDistribution, DiscreteDistribution)> {
        (1usize..8).prop_flat_map(|n| {
            (
                prop::collection::vec(0.0f64..1.0, n),
                prop::collection::vec(0.0f64..1.0, n),
            )
                .prop_filter_map("zero mass", |(a, b)| {
                    Some((
                        DiscreteDistribution::from_weights(&a).ok()?,
                        DiscreteDistribution::from_weights(&b).ok()?,
                    ))
                })
        })
    }

    proptest! {
        #[test]
        fn pinsker_holds((p, q) in arb_pair()) {
            let tv = tv_distance(&p, &q).unwrap();
            let kl = kl_divergence(&p, &q).unwrap();
            prop_assert!(tv * tv <= kl / 2.0 + 1e-12);
        }

        #[test]
        fn tv_is_symmetric_and_bounded((p, q) in arb_pair()) {
            let a = tv_distance(&p, &q).unwrap();
            prop_assert!((a - tv_distance(&q, &p).unwrap()).abs() < 1e-15);
            prop_assert!((0.0..=1.0).contains(&a));
        }

        #[test]
        fn tv_triangle((p, q) in arb_pair(), w in prop::collection::vec(0.01f64..1.0, 8)) {
            let r = DiscreteDistribution::from_weights(&w[..p.len()]).unwrap();
            let lhs = tv_distance(&p, &q).unwrap();
            let rhs = tv_distance(&p, &r).unwrap() + tv_distance(&r, &q).unwrap();
            prop_assert!(lhs <= rhs + 1e-12);
        }
    }
}
