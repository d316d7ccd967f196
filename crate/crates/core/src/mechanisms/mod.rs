//! ε-locally private channels.
//!
//! Every mechanism implements [`LocalMechanism`]: it privatizes one record
//! and reports the exact worst-case likelihood ratio between the output laws
//! of two inputs. Hot loops use the inherent `privatize_into` methods, which
//! write into a caller-owned buffer and are generic over the RNG.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::PrivacyBudget;

pub mod calibration;
mod hypercube;
mod laplace;
mod response;
mod sphere;

pub use calibration::{half_sphere_mean, hypercube_calibration, l2_calibration, HypercubeMargin};
pub use hypercube::{strategy_b, StrategyB};
pub use laplace::{laplace_mechanism, trunc_laplace, LaplaceMechanism, TruncatedLaplace};
pub use response::{keep_probability, randomized_response, RandomizedResponse};
pub use sphere::{strategy_a, StrategyA};

/// Relative slack on input-domain checks.
pub(crate) const DOMAIN_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MechanismId {
    L2Sphere,
    HypercubeCorner,
    RandomizedResponse,
    LaplaceAdditive,
    TruncLaplace,
}

impl MechanismId {
    pub const ALL: [MechanismId; 5] = [
        MechanismId::L2Sphere,
        MechanismId::HypercubeCorner,
        MechanismId::RandomizedResponse,
        MechanismId::LaplaceAdditive,
        MechanismId::TruncLaplace,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MechanismId::L2Sphere => "l2-sphere",
            MechanismId::HypercubeCorner => "hypercube",
            MechanismId::RandomizedResponse => "randomized-response",
            MechanismId::LaplaceAdditive => "laplace",
            MechanismId::TruncLaplace => "trunc-laplace",
        }
    }
}

impl fmt::Display for MechanismId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MechanismId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "l2-sphere" | "l2sphere" | "strategy-a" => MechanismId::L2Sphere,
            "hypercube" | "hypercube-corner" | "strategy-b" => MechanismId::HypercubeCorner,
            "randomized-response" | "rr" => MechanismId::RandomizedResponse,
            "laplace" => MechanismId::LaplaceAdditive,
            "trunc-laplace" => MechanismId::TruncLaplace,
            other => return Err(Error::Config(format!("unknown mechanism id `{other}`"))),
        })
    }
}

/// One released record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivatizedSample {
    pub z: Vec<f64>,
    pub mechanism: MechanismId,
    /// Output magnitude `B` for the sphere and hypercube samplers.
    pub bound: Option<f64>,
    pub eps: f64,
}

/// `T ~ Bernoulli(π_ε)` with `π_ε = e^ε/(e^ε + 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BernoulliBias {
    pi_eps: f64,
}

impl BernoulliBias {
    pub fn new(budget: PrivacyBudget) -> Self {
        Self { pi_eps: budget.bernoulli_bias() }
    }

    pub fn pi_eps(self) -> f64 {
        self.pi_eps
    }
}

pub trait LocalMechanism: Send + Sync {
    fn id(&self) -> MechanismId;

    fn eps(&self) -> f64;

    fn privatize(&self, x: &[f64], rng: &mut dyn RngCore) -> Result<PrivatizedSample>;

    /// `sup_z q(z | x) / q(z | x')` over the output space (densities for the
    /// continuous mechanisms, pmfs for the discrete ones).
    fn privacy_ratio(&self, x: &[f64], x_prime: &[f64]) -> Result<f64>;
}

pub(crate) fn check_len(x: &[f64], d: usize) -> Result<()> {
    if x.len() != d {
        return Err(Error::Shape(format!("expected a vector of length {d}, got {}", x.len())));
    }
    Ok(())
}

pub(crate) fn l2_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
