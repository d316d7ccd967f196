//! Fixed-design linear regression with Laplace-perturbed responses.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::Distribution;

use super::budget;
use crate::error::{param, Error, Result};
use crate::sampling::Laplace;

/// `Y = Xθ* + noise` with `|noise_i| ≤ σ` and a full-rank design.
#[derive(Clone, Debug)]
pub struct RegressionProblem {
    design: DMatrix<f64>,
    response: DVector<f64>,
    sigma: f64,
    theta_star: Option<DVector<f64>>,
    gram: Cholesky<f64, Dyn>,
}

impl RegressionProblem {
    pub fn new(design: DMatrix<f64>, response: Vec<f64>, sigma: f64, theta_star: Option<Vec<f64>>) -> Result<Self> {
        let (n, d) = design.shape();
        if n == 0 || d == 0 {
            return param("design must be non-empty");
        }
        if response.len() != n {
            return Err(Error::Shape(format!("{} responses for {n} design rows", response.len())));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return param(format!("noise bound must be positive, got {sigma}"));
        }
        let response = DVector::from_vec(response);
        let theta_star = match theta_star {
            None => None,
            Some(t) if t.len() != d => {
                return Err(Error::Shape(format!("θ* has length {}, design has {d} columns", t.len())))
            }
            Some(t) => {
                let t = DVector::from_vec(t);
                let residual = &response - &design * &t;
                let worst = residual.amax();
                if worst > sigma * (1.0 + 1e-9) {
                    return Err(Error::Domain(format!("residual {worst} exceeds the noise bound {sigma}")));
                }
                Some(t)
            }
        };
        let gram = Cholesky::new(design.transpose() * &design)
            .ok_or_else(|| Error::LinearAlgebra("design matrix is rank deficient".into()))?;
        let pivots = gram.l_dirty().diagonal();
        if pivots.min() <= 1e-8 * pivots.max() {
            return Err(Error::LinearAlgebra("design matrix is numerically rank deficient".into()));
        }
        Ok(Self { design, response, sigma, theta_star, gram })
    }

    pub fn n(&self) -> usize {
        self.design.nrows()
    }

    pub fn d(&self) -> usize {
        self.design.ncols()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    pub fn theta_star(&self) -> Option<&[f64]> {
        self.theta_star.as_ref().map(|t| t.as_slice())
    }

    /// `(XᵀX)^{−1} Xᵀ z`.
    pub fn least_squares(&self, z: &DVector<f64>) -> Vec<f64> {
        self.gram.solve(&(self.design.transpose() * z)).as_slice().to_vec()
    }

    /// `tr((XᵀX)^{−1})`.
    pub fn trace_inverse_gram(&self) -> f64 {
        self.gram.inverse().trace()
    }
}

/// Add Laplace noise of rate `ε/(2σ)` to each response and solve least
/// squares on the perturbed responses.
pub fn regression_fixed_design<R: Rng + ?Sized>(problem: &RegressionProblem, eps: f64, rng: &mut R) -> Result<Vec<f64>> {
    let Some(eps) = budget(eps)? else {
        return Ok(problem.least_squares(&problem.response));
    };
    let noise = Laplace::new(eps / (2.0 * problem.sigma))?;
    let z = problem.response.map(|y| y + noise.sample(rng));
    Ok(problem.least_squares(&z))
}
