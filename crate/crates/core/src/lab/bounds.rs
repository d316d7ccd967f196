//! Private forms of the Le Cam, local Fano and Assouad lower bounds, with
//! loss `Φ(δ) = δ²` where a loss enters. Negative interiors are clamped to
//! zero (a vacuous bound).

use crate::divergence::{tv_distance, DiscreteDistribution};
use crate::error::{param, Result};

fn check_common(delta: f64, n: usize, eps: f64) -> Result<()> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return param(format!("separation must be finite and non-negative, got {delta}"));
    }
    if n == 0 {
        return param("sample size must be at least 1");
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return param(format!("privacy budget must be finite and non-negative, got {eps}"));
    }
    Ok(())
}

/// `δ² {1/2 − √(8nε² tv²)/(2√2)}`.
pub fn lecam_private_bound(delta: f64, n: usize, eps: f64, tv: f64) -> Result<f64> {
    check_common(delta, n, eps)?;
    if !(0.0..=1.0).contains(&tv) {
        return param(format!("total variation must lie in [0, 1], got {tv}"));
    }
    let inner = 0.5 - (8.0 * n as f64 * eps * eps * tv * tv).sqrt() / (2.0 * std::f64::consts::SQRT_2);
    Ok(delta * delta * inner.max(0.0))
}

/// `δ² {1 − (4nε²κ²δ² + log 2)/log|V|}`.
pub fn fano_private_bound(delta: f64, n: usize, eps: f64, kappa: f64, card: usize) -> Result<f64> {
    check_common(delta, n, eps)?;
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return param(format!("κ must be finite and non-negative, got {kappa}"));
    }
    if card < 2 {
        return param(format!("packing needs at least two members, got {card}"));
    }
    let info = 4.0 * n as f64 * eps * eps * kappa * kappa * delta * delta;
    let inner = 1.0 - (info + 2f64.ln()) / (card as f64).ln();
    Ok(delta * delta * inner.max(0.0))
}

/// `dδ [1 − (Σ_j D_sym(M_{+j}, M_{−j}) / (4d))^{1/2}]`.
pub fn assouad_bound(delta: f64, d: usize, per_j_symmetrized_kls: &[f64]) -> Result<f64> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return param(format!("separation must be finite and non-negative, got {delta}"));
    }
    if d == 0 || per_j_symmetrized_kls.len() != d {
        return param(format!("need one divergence per coordinate: d = {d}, got {}", per_j_symmetrized_kls.len()));
    }
    if per_j_symmetrized_kls.iter().any(|k| !(*k >= 0.0)) {
        return param("divergences must be non-negative");
    }
    let total: f64 = per_j_symmetrized_kls.iter().sum();
    let inner = 1.0 - (total / (4.0 * d as f64)).sqrt();
    Ok(d as f64 * delta * inner.max(0.0))
}

/// Two-point family for the `k`th-moment mean problem: atoms
/// `{−δ^{−1/k}, 0, δ^{−1/k}}` with `P_ν(±δ^{−1/k}) = δ(1 ± ν)/2` and
/// `P_ν(0) = 1 − δ`, so `E|X|^k = 1` and `θ_ν = δ^{(k−1)/k} ν`.
#[derive(Clone, Debug)]
pub struct MomentPair {
    pub support: [f64; 3],
    pub plus: DiscreteDistribution,
    pub minus: DiscreteDistribution,
}

impl MomentPair {
    pub fn new(delta: f64, k: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return param(format!("δ must lie in (0, 1], got {delta}"));
        }
        if !(k > 1.0 && k.is_finite()) {
            return param(format!("moment order must exceed 1, got {k}"));
        }
        let a = delta.powf(-1.0 / k);
        Ok(Self {
            support: [-a, 0.0, a],
            plus: DiscreteDistribution::new(vec![0.0, 1.0 - delta, delta])?,
            minus: DiscreteDistribution::new(vec![delta, 1.0 - delta, 0.0])?,
        })
    }

    pub fn means(&self) -> (f64, f64) {
        let m = |p: &DiscreteDistribution| p.probs().iter().zip(&self.support).map(|(w, x)| w * x).sum();
        (m(&self.plus), m(&self.minus))
    }

    pub fn tv(&self) -> Result<f64> {
        tv_distance(&self.plus, &self.minus)
    }
}

/// Le Cam bound for the one-dimensional mean under a `k`th-moment bound,
/// with `δ = min{1, (32nε²)^{−1/2}}` and the separation `δ^{(k−1)/k}`.
pub fn moment_mean_lecam_bound(n: usize, eps: f64, k: f64) -> Result<f64> {
    check_common(0.0, n, eps)?;
    let delta = (32.0 * n as f64 * eps * eps).sqrt().recip().min(1.0);
    let pair = MomentPair::new(delta, k)?;
    let (hi, lo) = pair.means();
    lecam_private_bound(0.5 * (hi - lo), n, eps, pair.tv()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lecam_examples() {
        assert_eq!(lecam_private_bound(0.3, 10, 1.0, 0.0).unwrap(), 0.09 / 2.0);
        assert_eq!(lecam_private_bound(0.3, 1000, 1.0, 0.5).unwrap(), 0.0);
        // tv² · 8nε² = 1/4 makes the interior 1/2 − 1/(4√2).
        let v = lecam_private_bound(1.0, 2, 0.25, 0.5).unwrap();
        assert!((v - (0.5 - 0.25 / 2f64.sqrt())).abs() < 1e-15);
        assert!(lecam_private_bound(1.0, 1, 1.0, 1.5).is_err());
        assert!(lecam_private_bound(1.0, 0, 1.0, 0.5).is_err());
    }

    #[test]
    fn fano_examples() {
        // No information: δ²(1 − log 2/log|V|).
        let v = fano_private_bound(0.5, 10, 0.0, 1.0, 4).unwrap();
        assert!((v - 0.25 * 0.5).abs() < 1e-15);
        assert_eq!(fano_private_bound(0.5, 10, 0.0, 1.0, 2).unwrap(), 0.0);
        assert_eq!(fano_private_bound(1.0, 1000, 1.0, 1.0, 16).unwrap(), 0.0);
        assert!(fano_private_bound(0.5, 10, 1.0, 1.0, 1).is_err());
    }

    #[test]
    fn assouad_examples() {
        assert_eq!(assouad_bound(0.1, 3, &[0.0; 3]).unwrap(), 0.1 * 3.0);
        // Σ/(4d) = 1/4, so the bracket is 1/2.
        let v = assouad_bound(0.1, 2, &[1.0, 1.0]).unwrap();
        assert!((v - 0.1).abs() < 1e-15);
        assert_eq!(assouad_bound(0.1, 1, &[10.0]).unwrap(), 0.0);
        assert!(assouad_bound(0.1, 2, &[1.0]).is_err());
    }

    #[test]
    fn moment_pair_construction() {
        let (delta, k) = (0.04, 2.0);
        let p = MomentPair::new(delta, k).unwrap();
        let (hi, lo) = p.means();
        assert!((hi - delta.powf((k - 1.0) / k)).abs() < 1e-15);
        assert!((lo + hi).abs() < 1e-15);
        assert!((p.tv().unwrap() - delta).abs() < 1e-15);
        let kth: f64 = p.plus.probs().iter().zip(&p.support).map(|(w, x)| w * x.abs().powf(k)).sum();
        assert!((kth - 1.0).abs() < 1e-12);
    }

    #[test]
    fn moment_lecam_bound_has_the_minimax_exponent() {
        // δ²-loss bound ∝ (nε²)^{−(k−1)/k}: slope over a decade grid.
        for k in [2.0, 3.0, 5.0] {
            let eps = 0.5;
            let ns = [1_000usize, 10_000, 100_000, 1_000_000];
            let vals: Vec<f64> = ns.iter().map(|&n| moment_mean_lecam_bound(n, eps, k).unwrap()).collect();
            for w in vals.windows(2) {
                let slope = (w[1] / w[0]).log10();
                assert!((slope + (k - 1.0) / k).abs() < 1e-12, "k={k} slope={slope}");
            }
            // The interior is the constant 1/2 − 1/√32.
            let n = 1000;
            let delta = (32.0 * n as f64 * eps * eps).sqrt().recip();
            let expect = delta.powf(2.0 * (k - 1.0) / k) * (0.5 - 1.0 / 32f64.sqrt());
            assert!((vals[0] - expect).abs() < 1e-15 * expect.max(1.0) + 1e-15);
        }
    }
}
