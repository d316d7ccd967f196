//! Output radii that make the sphere and hypercube samplers unbiased.

use statrs::function::factorial::ln_binomial;

use crate::error::{param, Result};
use crate::numeric::adaptive_simpson;
use crate::sampling::PrivacyBudget;

/// Dimension at which [`HypercubeMargin::new`] switches from enumerating
/// `{-1, 1}^d` to the central-binomial closed form.
pub const HYPERCUBE_ENUMERATION_LIMIT: usize = 15;

fn check_common(r: f64, d: usize) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return param(format!("radius must be positive and finite, got {r}"));
    }
    if d == 0 {
        return param("dimension must be at least 1");
    }
    Ok(())
}

/// `E[W₁ | W₁ > 0]` for `W` uniform on the unit sphere of R^d.
///
/// In the angle φ measured from the equatorial hyperplane the hemisphere
/// has surface density `∝ cos^{d-2} φ` and first coordinate `sin φ`, so the
/// conditional mean is the ratio of the two quadratures below. `d = 1` is the
/// two-point sphere, where the mean is exactly 1.
pub fn half_sphere_mean(d: usize) -> f64 {
    if d <= 1 {
        return 1.0;
    }
    let k = (d - 2) as i32;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let moment = adaptive_simpson(&|phi: f64| phi.sin() * phi.cos().powi(k), 0.0, half_pi, 1e-15);
    let area = adaptive_simpson(&|phi: f64| phi.cos().powi(k), 0.0, half_pi, 1e-15);
    moment / area
}

/// Radius `B` for the ℓ2-sphere sampler: `B = r / (c_d · tanh(ε/2))`, where
/// `tanh(ε/2) = (e^ε − 1)/(e^ε + 1)` and `c_d` is [`half_sphere_mean`].
pub fn l2_calibration(r: f64, d: usize, eps: f64) -> Result<f64> {
    check_common(r, d)?;
    let budget = PrivacyBudget::new(eps)?;
    Ok(r / (half_sphere_mean(d) * (0.5 * budget.eps()).tanh()))
}

/// Sign-agreement statistics of the uniform law on `{-1, 1}^d`, all as
/// fractions of `2^d`.
///
/// With `S₊ = {s ∈ {-1,1}^d : Σ s_j > 0}`: `agree = Σ_{s ∈ S₊} s₁ / 2^d`,
/// `positive = |S₊| / 2^d` and `nonpositive = 1 − positive`. Ties
/// (`Σ s_j = 0`, even `d` only) belong to the non-positive side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HypercubeMargin {
    pub dim: usize,
    pub agree: f64,
    pub positive: f64,
    pub nonpositive: f64,
}

impl HypercubeMargin {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return param("dimension must be at least 1");
        }
        if d <= HYPERCUBE_ENUMERATION_LIMIT {
            Ok(Self::enumerated(d))
        } else {
            Ok(Self::closed_form(d))
        }
    }

    /// Exhaustive enumeration of the `2^d` corners.
    pub fn enumerated(d: usize) -> Self {
        assert!((1..=24).contains(&d), "enumeration is limited to d <= 24");
        let mut agree: i64 = 0;
        let mut positive: u64 = 0;
        for bits in 0u64..(1u64 << d) {
            let plus = bits.count_ones() as i64;
            let sum = 2 * plus - d as i64;
            if sum > 0 {
                positive += 1;
                agree += if bits & 1 == 1 { 1 } else { -1 };
            }
        }
        let total = (1u64 << d) as f64;
        Self {
            dim: d,
            agree: agree as f64 / total,
            positive: positive as f64 / total,
            nonpositive: (total - positive as f64) / total,
        }
    }

    /// `Σ_{S₊} s₁ = C(d−1, ⌊d/2⌋)` (the per-weight differences telescope);
    /// `|S₊| = (2^d − [d even] C(d, d/2)) / 2`.
    pub fn closed_form(d: usize) -> Self {
        assert!(d >= 1);
        let ln2 = std::f64::consts::LN_2;
        let agree = (ln_binomial((d - 1) as u64, (d / 2) as u64) - d as f64 * ln2).exp();
        let tie = if d.is_multiple_of(2) {
            (ln_binomial(d as u64, (d / 2) as u64) - d as f64 * ln2).exp()
        } else {
            0.0
        };
        let positive = 0.5 * (1.0 - tie);
        Self { dim: d, agree, positive, nonpositive: 1.0 - positive }
    }

    /// Probability of the agreeing branch (`T = 1`) that gives the output
    /// pmf a likelihood ratio of exactly `e^ε` between the two corner sets.
    /// Equals `e^ε/(e^ε+1)` for odd `d`.
    pub fn agreeing_branch_probability(&self, eps: f64) -> f64 {
        let damp = (-eps).exp();
        self.positive / (self.positive + self.nonpositive * damp)
    }

    /// `E[Z | v] = B · gain · v / r` for the hypercube sampler.
    pub fn gain(&self, eps: f64) -> f64 {
        let damp = (-eps).exp();
        self.agree * (1.0 - damp) / (self.positive + self.nonpositive * damp)
    }

    /// The margin coefficient `m_d` in `B = r / (m_d (2π_ε − 1))`.
    pub fn margin_coefficient(&self, eps: f64) -> f64 {
        self.gain(eps) / (0.5 * eps).tanh()
    }
}

/// Radius `B` making the hypercube sampler unbiased: `B = r / gain_d(ε)`.
pub fn hypercube_calibration(r: f64, d: usize, eps: f64) -> Result<f64> {
    check_common(r, d)?;
    let budget = PrivacyBudget::new(eps)?;
    Ok(r / HypercubeMargin::new(d)?.gain(budget.eps()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::ln_gamma;
    use std::f64::consts::{E, PI};

    // Closed form of E[W1 | W1 > 0] = Γ(d/2) / (√π Γ((d+1)/2)).
    fn gamma_half_sphere_mean(d: usize) -> f64 {
        let d = d as f64;
        (ln_gamma(d / 2.0) - ln_gamma((d + 1.0) / 2.0)).exp() / PI.sqrt()
    }

    #[test]
    fn half_sphere_mean_matches_gamma_ratio() {
        for d in 2..=200 {
            let q = half_sphere_mean(d);
            let g = gamma_half_sphere_mean(d);
            assert!((q - g).abs() < 1e-12, "d={d}: {q} vs {g}");
        }
        assert!((half_sphere_mean(2) - 2.0 / PI).abs() < 1e-14);
        assert!((half_sphere_mean(3) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn l2_calibration_examples() {
        for eps in [0.1, 0.5, 1.0, 3.0] {
            let b = l2_calibration(2.0, 1, eps).unwrap();
            let expected = 2.0 * (eps.exp() + 1.0) / (eps.exp() - 1.0);
            assert!((b - expected).abs() < 1e-12 * expected);
        }
        let b2 = l2_calibration(1.0, 2, 1.0).unwrap();
        let expected = PI / 2.0 * (E + 1.0) / (E - 1.0);
        assert!((b2 - expected).abs() < 1e-12);
        assert!((b2 - 3.40).abs() < 5e-3);
        // ε → ∞: B → r / c_d.
        let big = l2_calibration(1.0, 5, 60.0).unwrap();
        assert!((big - 1.0 / half_sphere_mean(5)).abs() < 1e-12);
    }

    #[test]
    fn l2_calibration_rejects_degenerate_inputs() {
        assert!(l2_calibration(0.0, 2, 1.0).is_err());
        assert!(l2_calibration(1.0, 0, 1.0).is_err());
        assert!(l2_calibration(1.0, 2, 0.0).is_err());
        assert!(hypercube_calibration(-1.0, 2, 1.0).is_err());
    }

    #[test]
    fn l2_bound_scales_like_sqrt_d_over_eps() {
        for d in [1, 2, 5, 10, 50, 200] {
            for eps in [0.05, 0.25, 0.5, 1.0] {
                let b = l2_calibration(1.0, d, eps).unwrap();
                assert!(b <= 8.0 * (d as f64).sqrt() / eps, "d={d} eps={eps} B={b}");
            }
        }
    }

    #[test]
    fn hypercube_d1_is_two_point() {
        let m = HypercubeMargin::new(1).unwrap();
        assert_eq!(m.margin_coefficient(1.0), 1.0);
        let b = hypercube_calibration(1.5, 1, 0.7).unwrap();
        let expected = 1.5 * (0.7f64.exp() + 1.0) / (0.7f64.exp() - 1.0);
        assert!((b - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn hypercube_enumeration_agrees_with_closed_form() {
        for d in 1..=20 {
            let a = HypercubeMargin::enumerated(d);
            let b = HypercubeMargin::closed_form(d);
            assert!((a.agree - b.agree).abs() < 1e-13, "d={d}");
            assert!((a.positive - b.positive).abs() < 1e-13, "d={d}");
        }
    }

    #[test]
    fn hypercube_d3_by_corner_enumeration() {
        // S+ for d=3: the 4 corners with at least two +1's. Sum of s1 over
        // them: (+1,+1,+1), (+1,+1,-1), (+1,-1,+1), (-1,+1,+1) -> 2.
        let m = HypercubeMargin::new(3).unwrap();
        assert_eq!(m.agree, 2.0 / 8.0);
        assert_eq!(m.positive, 0.5);
        let eps: f64 = 1.0;
        let pi = eps.exp() / (eps.exp() + 1.0);
        assert!((m.agreeing_branch_probability(eps) - pi).abs() < 1e-15);
        assert!((m.margin_coefficient(eps) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn hypercube_scaling_constant_is_bounded() {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for d in 1..=15 {
            for eps in [0.25, 0.5, 1.0] {
                let c = hypercube_calibration(1.0, d, eps).unwrap() * eps / (d as f64).sqrt();
                lo = lo.min(c);
                hi = hi.max(c);
            }
        }
        assert!(lo > 1.0 && hi < 3.0, "constant range [{lo}, {hi}]");
    }

    #[test]
    fn hypercube_radius_dips_at_even_d() {
        let b3 = hypercube_calibration(1.0, 3, 2.0).unwrap();
        let b4 = hypercube_calibration(1.0, 4, 2.0).unwrap();
        assert!(b4 < b3);
        let b3 = hypercube_calibration(1.0, 3, 0.2).unwrap();
        let b4 = hypercube_calibration(1.0, 4, 0.2).unwrap();
        assert!(b4 > b3);
    }

    #[test]
    fn calibrations_are_monotone() {
        for d in 1..40 {
            for eps in [0.2, 0.5, 1.0, 2.0] {
                let l2 = l2_calibration(1.0, d, eps).unwrap();
                let hc = hypercube_calibration(1.0, d, eps).unwrap();
                assert!(l2_calibration(1.0, d + 1, eps).unwrap() > l2);
                // Ties make the even-d hypercube radius smaller than its odd
                // predecessor at large ε, so growth in d holds per parity and
                // from even d to d + 1.
                assert!(hypercube_calibration(1.0, d + 2, eps).unwrap() > hc, "d={d} eps={eps}");
                if d % 2 == 0 {
                    assert!(hypercube_calibration(1.0, d + 1, eps).unwrap() > hc, "d={d} eps={eps}");
                }
                assert!(l2_calibration(1.0, d, eps * 1.1).unwrap() < l2);
                assert!(hypercube_calibration(1.0, d, eps * 1.1).unwrap() < hc);
                assert!(l2_calibration(1.5, d, eps).unwrap() > l2);
                assert!(hypercube_calibration(1.5, d, eps).unwrap() > hc);
            }
        }
    }
}
