//! Exact finite-space checks of the information-contraction inequalities,
//! the private testing lower bounds, and randomized sweeps over both.
//!
//! Interactive channels are exercised only through products of
//! per-step channels; the non-interactive restriction of the mixture bound
//! is respected.

pub mod bounds;
pub mod channel;
pub mod family;
pub mod sweep;
pub mod theorems;

pub use bounds::{assouad_bound, fano_private_bound, lecam_private_bound, moment_mean_lecam_bound, MomentPair};
pub use channel::{
    effective_epsilon, marginalize, product_distribution, random_distribution, random_private_channel, FiniteChannel,
};
pub use family::PackingFamily;
pub use sweep::{run_verification_sweep, Counterexample, EpsSummary, SweepConfig, SweepReport, TheoremId};
pub use theorems::{
    paired_differences, sup_by_coordinate_ascent, sup_over_sign_vectors, verify_corollary1, verify_theorem1,
    verify_theorem2, verify_theorem3, Corollary1Report, Theorem1Report, Theorem2Report, Theorem3Report,
};
