//! Privacy budget and elementary samplers.
//!
//! Laplace laws are parametrised by their *rate* α: the density is
//! `(α/2) exp(-α|y|)`, the variance `2/α²`. A mechanism with ℓ1 sensitivity
//! Δ is ε-private with rate `α = ε/Δ`.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{param, Result};

/// The ε of ε-local differential privacy.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct PrivacyBudget(f64);

impl PrivacyBudget {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return param(format!("privacy budget must be positive and finite, got {eps}"));
        }
        Ok(Self(eps))
    }

    pub fn eps(self) -> f64 {
        self.0
    }

    /// `e^ε / (e^ε + 1)`, computed without overflow for large ε.
    pub fn bernoulli_bias(self) -> f64 {
        1.0 / (1.0 + (-self.0).exp())
    }
}

/// Laplace law with rate `alpha`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Laplace {
    rate: f64,
}

impl Laplace {
    pub fn new(rate: f64) -> Result<Self> {
        if !(rate > 0.0) || rate.is_nan() {
            return param(format!("Laplace rate must be positive, got {rate}"));
        }
        Ok(Self { rate })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn variance(&self) -> f64 {
        2.0 / (self.rate * self.rate)
    }

    pub fn cdf(&self, y: f64) -> f64 {
        if y < 0.0 {
            0.5 * (self.rate * y).exp()
        } else {
            1.0 - 0.5 * (-self.rate * y).exp()
        }
    }
}

impl Distribution<f64> for Laplace {
    #[inline]
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // |Y| ~ Exp(rate), sign independent.
        let magnitude: f64 = Exp1.sample(rng);
        let m = magnitude / self.rate;
        if rng.gen::<bool>() {
            m
        } else {
            -m
        }
    }
}

pub fn sample_laplace<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> Result<f64> {
    Ok(Laplace::new(alpha)?.sample(rng))
}

/// Uniform draw from the unit sphere in R^d, by normalising a standard
/// Gaussian vector.
pub fn sample_uniform_sphere<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Vec<f64>> {
    if d == 0 {
        return param("sphere dimension must be at least 1");
    }
    let mut out = vec![0.0; d];
    fill_uniform_sphere(&mut out, rng);
    Ok(out)
}

pub(crate) fn fill_uniform_sphere<R: Rng + ?Sized>(out: &mut [f64], rng: &mut R) {
    if let [x] = out {
        *x = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        return;
    }
    loop {
        let mut norm2 = 0.0;
        for x in out.iter_mut() {
            let g: f64 = StandardNormal.sample(rng);
            *x = g;
            norm2 += g * g;
        }
        if norm2 > 0.0 {
            let inv = 1.0 / norm2.sqrt();
            out.iter_mut().for_each(|x| *x *= inv);
            return;
        }
    }
}
