//! Estimators consuming privatized samples.
//!
//! Every estimator takes the raw records, privatizes them with its channel
//! and folds the outputs; nothing but the released `Z_i` reaches the fold.
//! Vector-valued records are passed as a flat row-major slice with an
//! explicit dimension.
//!
//! `eps = f64::INFINITY` selects the noiseless limit of each pipeline (the
//! channel is skipped and the debiasing constants tend to their limits).

pub mod density;
pub mod mean;
pub mod multinomial;
pub mod regression;
pub mod simplex;

pub use density::{
    histogram_bins, histogram_density, histogram_density_with_bins, orthoseries_density, orthoseries_density_laplace,
    orthoseries_laplace_terms, orthoseries_terms, orthoseries_with_terms, trig_basis, DensityEstimate, SeriesNoise,
};
pub use mean::{
    default_sparse_lambda, default_truncation, mean_1d, mean_1d_truncated, mean_l2, mean_l2_laplace_baseline, mean_linf,
    mean_nonprivate, mean_sparse, soft_threshold,
};
pub use multinomial::{multinomial_debias, multinomial_estimate, multinomial_estimate_laplace, multinomial_rr};
pub use regression::{regression_fixed_design, RegressionProblem};
pub use simplex::{project_simplex, SimplexVector};

use crate::error::{param, Error, Result};

/// `None` for the noiseless limit, the validated budget otherwise.
pub(crate) fn budget(eps: f64) -> Result<Option<f64>> {
    if eps == f64::INFINITY {
        Ok(None)
    } else if eps > 0.0 && eps.is_finite() {
        Ok(Some(eps))
    } else {
        param(format!("privacy budget must be positive, got {eps}"))
    }
}

/// Number of rows in a flat row-major sample matrix.
pub(crate) fn rows(samples: &[f64], d: usize) -> Result<usize> {
    if d == 0 {
        return param("dimension must be at least 1");
    }
    if samples.is_empty() || !samples.len().is_multiple_of(d) {
        return Err(Error::Shape(format!("{} values do not form rows of length {d}", samples.len())));
    }
    Ok(samples.len() / d)
}
