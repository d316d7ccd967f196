//! Additive Laplace perturbation.
//!
//! [`LaplaceMechanism`] adds iid Laplace noise of a given *rate* to every
//! coordinate; its privacy level depends on the ℓ1 diameter of the input
//! domain, so the caller chooses the rate. [`TruncatedLaplace`] clamps a
//! scalar to `[-T, T]` and adds noise of rate `ε/(2T)`.

use rand::{Rng, RngCore};
use rand_distr::Distribution;

use super::{check_len, LocalMechanism, MechanismId, PrivatizedSample};
use crate::error::{param, Result};
use crate::sampling::{Laplace, PrivacyBudget};

#[derive(Clone, Debug)]
pub struct LaplaceMechanism {
    dim: usize,
    noise: Laplace,
    eps: f64,
}

impl LaplaceMechanism {
    /// `eps` is the nominal budget recorded on outputs; the actual privacy
    /// level is `rate × (ℓ1 diameter of the inputs)`.
    pub fn new(dim: usize, rate: f64, eps: f64) -> Result<Self> {
        if dim == 0 {
            return param("dimension must be at least 1");
        }
        Ok(Self { dim, noise: Laplace::new(rate)?, eps: PrivacyBudget::new(eps)?.eps() })
    }

    /// Rate `ε/Δ` for inputs of ℓ1 diameter `Δ`.
    pub fn for_sensitivity(dim: usize, sensitivity: f64, eps: f64) -> Result<Self> {
        if !(sensitivity > 0.0 && sensitivity.is_finite()) {
            return param(format!("sensitivity must be positive, got {sensitivity}"));
        }
        Self::new(dim, eps / sensitivity, eps)
    }

    pub fn rate(&self) -> f64 {
        self.noise.rate()
    }

    pub fn privatize_into<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R, out: &mut [f64]) -> Result<()> {
        check_len(x, self.dim)?;
        check_len(out, self.dim)?;
        for (z, v) in out.iter_mut().zip(x) {
            *z = v + self.noise.sample(rng);
        }
        Ok(())
    }
}

impl LocalMechanism for LaplaceMechanism {
    fn id(&self) -> MechanismId {
        MechanismId::LaplaceAdditive
    }

    fn eps(&self) -> f64 {
        self.eps
    }

    fn privatize(&self, x: &[f64], rng: &mut dyn RngCore) -> Result<PrivatizedSample> {
        let mut z = vec![0.0; self.dim];
        self.privatize_into(x, rng, &mut z)?;
        Ok(PrivatizedSample { z, mechanism: MechanismId::LaplaceAdditive, bound: None, eps: self.eps })
    }

    /// `exp(α‖x − x′‖₁)`, attained for outputs beyond both inputs in every
    /// coordinate.
    fn privacy_ratio(&self, x: &[f64], x_prime: &[f64]) -> Result<f64> {
        check_len(x, self.dim)?;
        check_len(x_prime, self.dim)?;
        let l1: f64 = x.iter().zip(x_prime).map(|(a, b)| (a - b).abs()).sum();
        Ok((self.rate() * l1).exp())
    }
}

#[derive(Clone, Debug)]
pub struct TruncatedLaplace {
    level: f64,
    noise: Laplace,
    eps: f64,
}

impl TruncatedLaplace {
    pub fn new(level: f64, eps: f64) -> Result<Self> {
        if !(level > 0.0 && level.is_finite()) {
            return param(format!("truncation level must be positive, got {level}"));
        }
        let eps = PrivacyBudget::new(eps)?.eps();
        Ok(Self { level, noise: Laplace::new(eps / (2.0 * level))?, eps })
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn rate(&self) -> f64 {
        self.noise.rate()
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(-self.level, self.level)
    }

    #[inline]
    pub fn privatize_scalar<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> f64 {
        self.clamp(x) + self.noise.sample(rng)
    }
}

impl LocalMechanism for TruncatedLaplace {
    fn id(&self) -> MechanismId {
        MechanismId::TruncLaplace
    }

    fn eps(&self) -> f64 {
        self.eps
    }

    fn privatize(&self, x: &[f64], rng: &mut dyn RngCore) -> Result<PrivatizedSample> {
        check_len(x, 1)?;
        let z = vec![self.privatize_scalar(x[0], rng)];
        Ok(PrivatizedSample { z, mechanism: MechanismId::TruncLaplace, bound: Some(self.level), eps: self.eps })
    }

    fn privacy_ratio(&self, x: &[f64], x_prime: &[f64]) -> Result<f64> {
        check_len(x, 1)?;
        check_len(x_prime, 1)?;
        Ok((self.rate() * (self.clamp(x[0]) - self.clamp(x_prime[0])).abs()).exp())
    }
}

/// `z = x + W` with `W_j` iid Laplace of rate `alpha`.
pub fn laplace_mechanism<R: Rng + ?Sized>(x: &[f64], alpha: f64, rng: &mut R) -> Result<PrivatizedSample> {
    let noise = Laplace::new(alpha)?;
    let z = x.iter().map(|v| v + noise.sample(rng)).collect();
    // Nominal budget for the unit ℓ1 diameter.
    Ok(PrivatizedSample { z, mechanism: MechanismId::LaplaceAdditive, bound: None, eps: alpha })
}

/// `clamp(x, ±T)` plus Laplace noise of rate `ε/(2T)`.
pub fn trunc_laplace<R: Rng + ?Sized>(x: f64, level: f64, eps: f64, rng: &mut R) -> Result<f64> {
    Ok(TruncatedLaplace::new(level, eps)?.privatize_scalar(x, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn rejects_bad_parameters() {
        let mut rng = RngStream::new(0, 0);
        assert!(laplace_mechanism(&[0.0], 0.0, &mut rng).is_err());
        assert!(laplace_mechanism(&[0.0], -1.0, &mut rng).is_err());
        assert!(trunc_laplace(0.0, 0.0, 1.0, &mut rng).is_err());
        assert!(trunc_laplace(0.0, -2.0, 1.0, &mut rng).is_err());
        assert!(trunc_laplace(0.0, 1.0, 0.0, &mut rng).is_err());
    }

    #[test]
    fn truncation_clamps_before_noise() {
        let mech = TruncatedLaplace::new(1.0, 1.0).unwrap();
        assert_eq!(mech.rate(), 0.5);
        let mut rng = RngStream::new(4, 0);
        let n = 400_000;
        let mean = (0..n).map(|_| mech.privatize_scalar(10.0, &mut rng)).sum::<f64>() / n as f64;
        let se = (2.0 / 0.25 / n as f64).sqrt();
        assert!((mean - 1.0).abs() < 4.0 * se);
    }

    #[test]
    fn truncation_bias_obeys_moment_bound() {
        // X = h w.p. p and -l w.p. 1-p with p h = (1-p) l and E|X|^k = 1.
        for k in [2.0f64, 3.0, 4.0] {
            for p in [0.01f64, 0.1, 0.3] {
                let l_unit = p / (1.0 - p);
                let scale = (p + (1.0 - p) * l_unit.powf(k)).powf(-1.0 / k);
                let (hi, lo) = (scale, -l_unit * scale);
                for t in [0.5, 1.0, 2.0] {
                    let mech = TruncatedLaplace::new(t, 1.0).unwrap();
                    let bias = p * mech.clamp(hi) + (1.0 - p) * mech.clamp(lo);
                    assert!(bias.abs() <= 1.0 / ((k - 1.0) * t.powf(k - 1.0)) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn ratios() {
        let mech = TruncatedLaplace::new(2.0, 0.8).unwrap();
        let r = mech.privacy_ratio(&[-5.0], &[7.0]).unwrap();
        assert!((r - 0.8f64.exp()).abs() < 1e-12);
        assert_eq!(mech.privacy_ratio(&[0.3], &[0.3]).unwrap(), 1.0);
        let lap = LaplaceMechanism::for_sensitivity(3, 2.0, 1.0).unwrap();
        let r = lap.privacy_ratio(&[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]).unwrap();
        assert!((r - 1f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn additive_noise_is_unbiased() {
        let mut rng = RngStream::new(5, 0);
        let x = [0.25, -1.5];
        let n = 200_000;
        let mut sum = [0.0; 2];
        for _ in 0..n {
            let z = laplace_mechanism(&x, 2.0, &mut rng).unwrap().z;
            sum[0] += z[0];
            sum[1] += z[1];
        }
        let se = (0.5 / n as f64).sqrt();
        for (s, v) in sum.iter().zip(x) {
            assert!((s / n as f64 - v).abs() < 4.0 * se);
        }
    }
}
