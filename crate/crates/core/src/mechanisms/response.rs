//! Randomized response on one-hot vectors: each of the `d` coordinates is
//! reported truthfully with probability `e^{ε/2}/(1 + e^{ε/2})` and flipped
//! otherwise, independently.

use rand::{Rng, RngCore};

use super::{check_len, LocalMechanism, MechanismId, PrivatizedSample};
use crate::error::{param, Error, Result};
use crate::sampling::PrivacyBudget;

#[derive(Clone, Debug)]
pub struct RandomizedResponse {
    dim: usize,
    eps: f64,
    keep: f64,
}

impl RandomizedResponse {
    pub fn new(dim: usize, eps: f64) -> Result<Self> {
        if dim == 0 {
            return param("dimension must be at least 1");
        }
        let eps = PrivacyBudget::new(eps)?.eps();
        Ok(Self { dim, eps, keep: keep_probability(eps) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn keep_probability(&self) -> f64 {
        self.keep
    }

    /// Index of the hot coordinate of a standard basis vector.
    pub fn category_of(&self, x: &[f64]) -> Result<usize> {
        check_len(x, self.dim)?;
        let mut hot = None;
        for (j, v) in x.iter().enumerate() {
            match *v {
                1.0 if hot.is_none() => hot = Some(j),
                0.0 => {}
                _ => return Err(Error::Domain("input is not a standard basis vector".into())),
            }
        }
        hot.ok_or_else(|| Error::Domain("input is not a standard basis vector".into()))
    }

    /// Privatize category `j` (the basis vector `e_j`) into a 0/1 buffer.
    pub fn privatize_category_into<R: Rng + ?Sized>(&self, j: usize, rng: &mut R, out: &mut [f64]) -> Result<()> {
        if j >= self.dim {
            return Err(Error::Domain(format!("category {j} out of range for dimension {}", self.dim)));
        }
        check_len(out, self.dim)?;
        for (i, z) in out.iter_mut().enumerate() {
            let truth = i == j;
            let report = if rng.gen::<f64>() < self.keep { truth } else { !truth };
            *z = if report { 1.0 } else { 0.0 };
        }
        Ok(())
    }
}

/// `e^{ε/2}/(1 + e^{ε/2})`; equals ½ at ε = 0.
pub fn keep_probability(eps: f64) -> f64 {
    1.0 / (1.0 + (-0.5 * eps).exp())
}

impl LocalMechanism for RandomizedResponse {
    fn id(&self) -> MechanismId {
        MechanismId::RandomizedResponse
    }

    fn eps(&self) -> f64 {
        self.eps
    }

    fn privatize(&self, x: &[f64], rng: &mut dyn RngCore) -> Result<PrivatizedSample> {
        let j = self.category_of(x)?;
        let mut z = vec![0.0; self.dim];
        self.privatize_category_into(j, rng, &mut z)?;
        Ok(PrivatizedSample { z, mechanism: MechanismId::RandomizedResponse, bound: None, eps: self.eps })
    }

    /// The pmf factorises over coordinates; each coordinate where the inputs
    /// differ contributes at most `keep/(1 − keep) = e^{ε/2}`.
    fn privacy_ratio(&self, x: &[f64], x_prime: &[f64]) -> Result<f64> {
        let a = self.category_of(x)?;
        let b = self.category_of(x_prime)?;
        Ok(if a == b { 1.0 } else { self.eps.exp() })
    }
}

/// One-shot randomized response of a basis vector.
pub fn randomized_response<R: Rng + ?Sized>(x: &[f64], eps: f64, rng: &mut R) -> Result<PrivatizedSample> {
    let mech = RandomizedResponse::new(x.len().max(1), eps)?;
    let j = mech.category_of(x)?;
    let mut z = vec![0.0; mech.dim];
    mech.privatize_category_into(j, rng, &mut z)?;
    Ok(PrivatizedSample { z, mechanism: MechanismId::RandomizedResponse, bound: None, eps: mech.eps })
}
