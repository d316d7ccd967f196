//! Named synthetic data laws for the sweeps.
//!
//! Each law knows its target parameter exactly, so the per-trial loss needs
//! no Monte-Carlo estimate of the truth.

use std::f64::consts::SQRT_2;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution as _, StandardNormal};

use crate::error::{Error, Result};
use crate::estimators::trig_basis;
use crate::sampling::sample_uniform_sphere;

fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

#[derive(Clone, Debug, PartialEq)]
pub enum DataLaw {
    /// `X = δ^{−1/k}` with probability `δ`, else 0; `E|X|^k = 1`.
    MomentTwoPoint { delta: f64, k: f64 },
    /// With probability `mass` the first basis vector, else uniform on the
    /// unit sphere.
    SphereMixture { mass: f64 },
    /// Independent signs with `E X_j = level` for `j < support`, else 0.
    CubeSigns { level: f64, support: usize },
    /// Categories with `θ_j ∝ ratio^j`.
    Geometric { ratio: f64 },
    /// Density `1 + slope (t − 1/2)` on `[0, 1]`, `|slope| ≤ 2`.
    Sloped { slope: f64 },
    /// Density `1 + amplitude φ_index` on `[0, 1]`.
    Sobolev { amplitude: f64, index: usize },
    /// Fixed design plus responses with uniform noise on `[−σ, σ]`.
    Regression { design: Design, sigma: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Design {
    /// Walsh sign columns `(−1)^{bit_j(i)}`, orthogonal when `2^d` divides `n`.
    OrthogonalSigns,
    /// Iid standard normal entries.
    Gaussian,
}

/// One draw of a sample of size `n`.
#[derive(Clone, Debug)]
pub enum Sample {
    /// Flat row-major values with their dimension.
    Vectors { values: Vec<f64>, d: usize },
    Categories { values: Vec<usize>, d: usize },
    Regression { design: DMatrix<f64>, response: Vec<f64>, theta: Vec<f64>, sigma: f64 },
}

impl DataLaw {
    pub fn name(&self) -> &'static str {
        match self {
            Self::MomentTwoPoint { .. } => "moment-two-point",
            Self::SphereMixture { .. } => "sphere-mixture",
            Self::CubeSigns { .. } => "cube-signs",
            Self::Geometric { .. } => "geometric",
            Self::Sloped { .. } => "sloped",
            Self::Sobolev { .. } => "sobolev",
            Self::Regression { .. } => "regression",
        }
    }

    /// Build a law from its name and `key = value` parameters; missing keys
    /// take the listed defaults.
    pub fn from_params(name: &str, get: &dyn Fn(&str) -> Option<String>) -> Result<Self> {
        let num = |key: &str, default: f64| -> Result<f64> {
            match get(key) {
                None => Ok(default),
                Some(v) => v.trim().parse().map_err(|_| Error::Config(format!("{name}.{key}: `{v}` is not a number"))),
            }
        };
        let law = match name {
            "moment-two-point" => Self::MomentTwoPoint { delta: num("delta", 0.25)?, k: num("k", 2.0)? },
            "sphere-mixture" => Self::SphereMixture { mass: num("mass", 0.5)? },
            "cube-signs" => Self::CubeSigns { level: num("level", 0.5)?, support: num("support", 1.0)? as usize },
            "geometric" => Self::Geometric { ratio: num("ratio", 0.8)? },
            "sloped" => Self::Sloped { slope: num("slope", 1.0)? },
            "sobolev" => {
                let beta = num("beta", 2.0)?;
                Self::Sobolev { amplitude: num("amplitude", 2f64.powf(-beta))?, index: num("index", 2.0)? as usize }
            }
            "regression" => {
                let design = match get("design").as_deref().map(str::trim) {
                    None | Some("orthogonal") => Design::OrthogonalSigns,
                    Some("gaussian") => Design::Gaussian,
                    Some(other) => return config(format!("unknown design `{other}`")),
                };
                Self::Regression { design, sigma: num("sigma", 1.0)? }
            }
            other => return config(format!("unknown distribution `{other}`")),
        };
        law.validate()?;
        Ok(law)
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::MomentTwoPoint { delta, k } => delta > 0.0 && delta <= 1.0 && k > 1.0,
            Self::SphereMixture { mass } => (0.0..=1.0).contains(&mass),
            Self::CubeSigns { level, .. } => (-1.0..=1.0).contains(&level),
            Self::Geometric { ratio } => ratio > 0.0 && ratio.is_finite(),
            Self::Sloped { slope } => slope.abs() <= 2.0,
            Self::Sobolev { amplitude, index } => index > 0 && amplitude.abs() * SQRT_2 <= 1.0,
            Self::Regression { sigma, .. } => sigma > 0.0 && sigma.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            config(format!("parameters out of range for {self:?}"))
        }
    }

    /// The estimand: mean vector, category probabilities or regression
    /// coefficients. Densities return their basis coefficients when they
    /// have finitely many.
    pub fn target(&self, d: usize) -> Result<Vec<f64>> {
        Ok(match *self {
            Self::MomentTwoPoint { delta, k } => vec![delta.powf((k - 1.0) / k)],
            Self::SphereMixture { mass } => {
                let mut t = vec![0.0; d];
                t[0] = mass;
                t
            }
            Self::CubeSigns { level, support } => (0..d).map(|j| if j < support { level } else { 0.0 }).collect(),
            Self::Geometric { ratio } => {
                let w: Vec<f64> = (0..d).map(|j| ratio.powi(j as i32)).collect();
                let s: f64 = w.iter().sum();
                w.iter().map(|x| x / s).collect()
            }
            Self::Sloped { slope: 0.0 } => vec![1.0],
            Self::Sloped { .. } => return Err(Error::Unsupported("sloped density has infinitely many coefficients".into())),
            Self::Sobolev { amplitude, index } => {
                let mut c = vec![0.0; index + 1];
                c[0] = 1.0;
                c[index] = amplitude;
                c
            }
            Self::Regression { .. } => (0..d).map(|j| if j % 2 == 0 { 0.5 } else { -0.5 }).collect(),
        })
    }

    /// Density at `t` for the laws on `[0, 1]`.
    pub fn density(&self, t: f64) -> Option<f64> {
        match *self {
            Self::Sloped { slope } => Some(1.0 + slope * (t - 0.5)),
            Self::Sobolev { amplitude, index } => Some(1.0 + amplitude * trig_basis(index, t)),
            _ => None,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, d: usize, rng: &mut R) -> Result<Sample> {
        if n == 0 || d == 0 {
            return Err(Error::Parameter("sample size and dimension must be positive".into()));
        }
        Ok(match *self {
            Self::MomentTwoPoint { delta, k } => {
                let a = delta.powf(-1.0 / k);
                let values = (0..n).map(|_| if rng.gen_bool(delta) { a } else { 0.0 }).collect();
                Sample::Vectors { values, d: 1 }
            }
            Self::SphereMixture { mass } => {
                let mut values = Vec::with_capacity(n * d);
                for _ in 0..n {
                    if rng.gen_bool(mass) {
                        values.push(1.0);
                        values.extend(std::iter::repeat_n(0.0, d - 1));
                    } else {
                        values.extend(sample_uniform_sphere(d, rng)?);
                    }
                }
                Sample::Vectors { values, d }
            }
            Self::CubeSigns { level, support } => {
                let up = 0.5 * (1.0 + level);
                let mut values = Vec::with_capacity(n * d);
                for _ in 0..n {
                    for j in 0..d {
                        let p = if j < support { up } else { 0.5 };
                        values.push(if rng.gen_bool(p) { 1.0 } else { -1.0 });
                    }
                }
                Sample::Vectors { values, d }
            }
            Self::Geometric { .. } => {
                let theta = self.target(d)?;
                let dist = rand::distributions::WeightedIndex::new(&theta)
                    .map_err(|e| Error::Parameter(format!("category weights: {e}")))?;
                Sample::Categories { values: (0..n).map(|_| dist.sample(rng)).collect(), d }
            }
            Self::Sloped { slope } => {
                // Inverse CDF of 1 + s(t − 1/2): (s/2)t² + (1 − s/2)t = u.
                let values = (0..n)
                    .map(|_| {
                        let u: f64 = rng.gen();
                        if slope.abs() < 1e-12 {
                            u
                        } else {
                            let b = 1.0 - 0.5 * slope;
                            ((2.0 * u) / (b + (b * b + 2.0 * slope * u).sqrt())).clamp(0.0, 1.0)
                        }
                    })
                    .collect();
                Sample::Vectors { values, d: 1 }
            }
            Self::Sobolev { amplitude, index } => {
                let ceiling = 1.0 + amplitude.abs() * SQRT_2;
                let mut values = Vec::with_capacity(n);
                while values.len() < n {
                    let t: f64 = rng.gen();
                    if rng.gen::<f64>() * ceiling <= 1.0 + amplitude * trig_basis(index, t) {
                        values.push(t);
                    }
                }
                Sample::Vectors { values, d: 1 }
            }
            Self::Regression { design, sigma } => {
                let theta = self.target(d)?;
                let x = match design {
                    Design::OrthogonalSigns => {
                        DMatrix::from_fn(n, d, |i, j| if (i >> j) & 1 == 1 { -1.0 } else { 1.0 })
                    }
                    Design::Gaussian => DMatrix::from_fn(n, d, |_, _| rng.sample(StandardNormal)),
                };
                let fitted = &x * nalgebra::DVector::from_column_slice(&theta);
                let response = fitted.iter().map(|f| f + sigma * rng.gen_range(-1.0..=1.0)).collect();
                Sample::Regression { design: x, response, theta, sigma }
            }
        })
    }
}
