//! Locally differentially private estimation laboratory.
//!
//! The crate is organised in five layers:
//!
//! - [`rng`], [`sampling`], [`divergence`]: reproducible random streams,
//!   elementary samplers and finite-space divergences.
//! - [`mechanisms`]: ε-locally private channels (sphere and hypercube
//!   samplers, randomized response, Laplace perturbation), each with an
//!   exact privacy-ratio computation.
//! - [`estimators`]: minimax-optimal estimators built on the mechanisms,
//!   plus the deliberately suboptimal Laplace baselines.
//! - [`lab`]: exact finite-space checks of the information-contraction
//!   inequalities and the private testing lower bounds.
//! - [`experiments`]: declarative Monte-Carlo sweeps, log-log rate fits and
//!   the command line front end.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod divergence;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod lab;
pub mod mechanisms;
pub mod numeric;
pub mod rng;
pub mod sampling;

pub use divergence::{kl_divergence, mutual_information, symmetrized_kl, tv_distance, DiscreteDistribution};
pub use error::{Error, Result};
pub use rng::RngStream;
pub use sampling::{sample_laplace, sample_uniform_sphere, PrivacyBudget};
