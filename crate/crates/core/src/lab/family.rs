//! Indexed families `{P_ν}` of distributions on a common finite space.

use serde::Serialize;

use crate::divergence::DiscreteDistribution;
use crate::error::{param, Error, Result};

/// Members share one atom space. A hypercube family has `2^d` members; the
/// member at index `i` carries the sign vector with `ν_j = +1` iff bit `j`
/// of `i` is set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PackingFamily {
    members: Vec<DiscreteDistribution>,
    dim: Option<usize>,
}

impl PackingFamily {
    pub fn new(members: Vec<DiscreteDistribution>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::Shape("family needs at least one member".into()));
        };
        let atoms = first.len();
        if members.iter().any(|m| m.len() != atoms) {
            return Err(Error::Shape("family members live on different atom spaces".into()));
        }
        Ok(Self { members, dim: None })
    }

    /// Family indexed by `{−1,+1}^d` in bit order.
    pub fn hypercube(members: Vec<DiscreteDistribution>, d: usize) -> Result<Self> {
        if d == 0 || d > 16 {
            return param(format!("hypercube dimension must be in 1..=16, got {d}"));
        }
        if members.len() != 1 << d {
            return Err(Error::Shape(format!("{} members for a {d}-dimensional hypercube", members.len())));
        }
        Ok(Self { dim: Some(d), ..Self::new(members)? })
    }

    /// Multinomial packing on `d` categories (`d` even):
    /// `θ_ν = 1/d + (δ/d)[ν; −ν]` for `ν ∈ {−1,+1}^{d/2}`.
    pub fn multinomial(d: usize, delta: f64) -> Result<Self> {
        if d < 2 || !d.is_multiple_of(2) {
            return param(format!("multinomial packing needs an even d ≥ 2, got {d}"));
        }
        if !(0.0..=1.0).contains(&delta) {
            return param(format!("separation must lie in [0, 1], got {delta}"));
        }
        let half = d / 2;
        let base = 1.0 / d as f64;
        let step = delta / d as f64;
        let members = (0..1usize << half)
            .map(|i| {
                let mut theta = vec![0.0; d];
                for j in 0..half {
                    let s = if (i >> j) & 1 == 1 { 1.0 } else { -1.0 };
                    theta[j] = base + step * s;
                    theta[j + half] = base - step * s;
                }
                DiscreteDistribution::from_weights(&theta)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::hypercube(members, half)
    }

    pub fn members(&self) -> &[DiscreteDistribution] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn atoms(&self) -> usize {
        self.members[0].len()
    }

    /// Hypercube dimension, if the family carries a sign structure.
    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    /// `ν_j` of member `i`.
    pub fn sign(&self, i: usize, j: usize) -> Result<f64> {
        match self.dim {
            Some(d) if j < d && i < self.len() => Ok(if (i >> j) & 1 == 1 { 1.0 } else { -1.0 }),
            Some(d) => Err(Error::Shape(format!("sign ({i}, {j}) out of range for d = {d}"))),
            None => Err(Error::Unsupported("family has no sign structure".into())),
        }
    }

    /// Uniform mixture `P̄`.
    pub fn mean(&self) -> Result<DiscreteDistribution> {
        let w = vec![1.0 / self.len() as f64; self.len()];
        DiscreteDistribution::mixture(&w, &self.members)
    }

    /// `(P_{+j}, P_{−j})`: averages over the members with `ν_j = ±1`.
    pub fn paired_mixtures(&self, j: usize) -> Result<(DiscreteDistribution, DiscreteDistribution)> {
        let d = self.dim.ok_or_else(|| Error::Unsupported("family has no sign structure".into()))?;
        if j >= d {
            return Err(Error::Shape(format!("coordinate {j} out of range for d = {d}")));
        }
        let half = 2.0 / self.len() as f64;
        let plus: Vec<f64> = (0..self.len()).map(|i| if (i >> j) & 1 == 1 { half } else { 0.0 }).collect();
        let minus: Vec<f64> = plus.iter().map(|w| half - w).collect();
        Ok((DiscreteDistribution::mixture(&plus, &self.members)?, DiscreteDistribution::mixture(&minus, &self.members)?))
    }
}
