//! Exact checks of the contraction inequalities on finite spaces.
//!
//! Every report carries both sides of the inequality and `holds = lhs ≤
//! rhs + 1e−9`. The privacy level entering a right-hand side is the
//! channel's effective ε, the smallest level it actually satisfies.

use rand::Rng;
use serde::Serialize;

use super::channel::{product_distribution, FiniteChannel};
use super::family::PackingFamily;
use crate::divergence::{kl_divergence, symmetrized_kl, tv_distance, DiscreteDistribution};
use crate::error::{param, Error, Result};
use crate::numeric::CompensatedSum;

/// Absolute slack on every inequality check.
pub const TOLERANCE: f64 = 1e-9;
/// Largest input space for the vertex enumeration.
pub const MAX_VERTEX_ATOMS: usize = 20;
/// Largest number of product steps.
pub const MAX_STEPS: usize = 4;
/// Largest enumerated product space.
const MAX_STATES: usize = 1_000_000;

/// `c · (e^ε − 1)² · s`, reading `0 · ∞` as 0.
fn scaled(c: f64, eps: f64, s: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        c * eps.exp_m1().powi(2) * s
    }
}

fn holds(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + TOLERANCE
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakBound {
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem1Report {
    pub eps: f64,
    pub tv: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// Symmetrized KL of the inputs, which the marginals can never exceed.
    pub input_sym_kl: f64,
    pub dpi_holds: bool,
    /// `lhs ≤ 4ε² min{D(P₁‖P₂), D(P₂‖P₁)}`, checked when `ε ≤ 23/35`.
    pub weak: Option<WeakBound>,
}

/// `D(M₁‖M₂) + D(M₂‖M₁) ≤ min{4, e^{2ε}} (e^ε − 1)² ‖P₁ − P₂‖²_TV`.
pub fn verify_theorem1(
    ch: &FiniteChannel,
    p1: &DiscreteDistribution,
    p2: &DiscreteDistribution,
) -> Result<Theorem1Report> {
    let eps = ch.effective_epsilon();
    let (m1, m2) = (ch.marginalize(p1)?, ch.marginalize(p2)?);
    let lhs = symmetrized_kl(&m1, &m2)?;
    let tv = tv_distance(p1, p2)?;
    let rhs = scaled(4f64.min((2.0 * eps).exp()), eps, tv * tv);
    let input_sym_kl = symmetrized_kl(p1, p2)?;
    let weak = if eps <= 23.0 / 35.0 {
        let min_kl = kl_divergence(p1, p2)?.min(kl_divergence(p2, p1)?);
        let rhs = if min_kl == 0.0 || eps == 0.0 { 0.0 } else { 4.0 * eps * eps * min_kl };
        Some(WeakBound { rhs, holds: holds(lhs, rhs) })
    } else {
        None
    };
    Ok(Theorem1Report {
        eps,
        tv,
        lhs,
        rhs,
        holds: holds(lhs, rhs),
        input_sym_kl,
        dpi_holds: holds(lhs, input_sym_kl),
        weak,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Corollary1Report {
    pub eps: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `D(M^n_ν‖M^n_ω) + D(M^n_ω‖M^n_ν) ≤ 4(e^ε − 1)² Σ_i ‖P_{ν,i} − P_{ω,i}‖²_TV`
/// for the product of the per-step channels, enumerated exactly.
pub fn verify_corollary1(
    channels: &[FiniteChannel],
    pairs: &[(DiscreteDistribution, DiscreteDistribution)],
) -> Result<Corollary1Report> {
    if channels.is_empty() || channels.len() != pairs.len() {
        return Err(Error::Shape(format!("{} channels for {} distribution pairs", channels.len(), pairs.len())));
    }
    if channels.len() > MAX_STEPS {
        return param(format!("at most {MAX_STEPS} steps are enumerated, got {}", channels.len()));
    }
    let states: usize = channels.iter().map(|c| c.nx() * c.nz()).product();
    if states > MAX_STATES {
        return Err(Error::Unsupported(format!("{states} product states exceed the enumeration cap")));
    }
    let mut joint = channels[0].clone();
    let (mut a, mut b) = pairs[0].clone();
    for (ch, (p, q)) in channels.iter().zip(pairs).skip(1) {
        joint = joint.product(ch)?;
        a = product_distribution(&a, p)?;
        b = product_distribution(&b, q)?;
    }
    let lhs = symmetrized_kl(&joint.marginalize(&a)?, &joint.marginalize(&b)?)?;
    let eps = channels.iter().map(FiniteChannel::effective_epsilon).fold(0.0, f64::max);
    let mut tv2 = CompensatedSum::default();
    for (p, q) in pairs {
        tv2.add(tv_distance(p, q)?.powi(2));
    }
    let rhs = scaled(4.0, eps, tv2.value());
    Ok(Corollary1Report { eps, lhs, rhs, holds: holds(lhs, rhs) })
}

/// `Σ_k (a_k · γ)²`.
fn quadratic(directions: &[Vec<f64>], gamma: &[f64]) -> f64 {
    let mut total = CompensatedSum::default();
    for a in directions {
        let s: CompensatedSum = a.iter().zip(gamma).map(|(x, g)| x * g).collect();
        total.add(s.value().powi(2));
    }
    total.value()
}

fn check_directions(directions: &[Vec<f64>]) -> Result<usize> {
    let m = directions.first().map_or(0, Vec::len);
    if m == 0 {
        return Err(Error::Shape("need at least one non-empty direction".into()));
    }
    if directions.iter().any(|a| a.len() != m) {
        return Err(Error::Shape("directions have different lengths".into()));
    }
    Ok(m)
}

/// `sup_{‖γ‖_∞ ≤ 1} Σ_k (a_k · γ)²` with its maximizing sign pattern.
///
/// The objective is a convex quadratic, so the supremum is attained at a
/// vertex of the cube. Vertices are visited in Gray-code order with `γ₀ = +1`
/// (the objective is even), updating the projections by one flip per step.
pub fn sup_over_sign_vectors(directions: &[Vec<f64>]) -> Result<(f64, Vec<i8>)> {
    let m = check_directions(directions)?;
    if m > MAX_VERTEX_ATOMS {
        return Err(Error::Unsupported(format!(
            "{m} atoms exceed the vertex-enumeration cap of {MAX_VERTEX_ATOMS}"
        )));
    }
    let mut proj: Vec<f64> = directions.iter().map(|a| a.iter().sum()).collect();
    let mut gamma = vec![1.0f64; m];
    let (mut best, mut best_code) = (proj.iter().map(|s| s * s).sum::<f64>(), 0u32);
    for t in 1u32..1 << (m - 1) {
        let i = t.trailing_zeros() as usize + 1;
        let old = gamma[i];
        gamma[i] = -old;
        for (s, a) in proj.iter_mut().zip(directions) {
            *s -= 2.0 * old * a[i];
        }
        let value: f64 = proj.iter().map(|s| s * s).sum();
        if value > best {
            best = value;
            best_code = t ^ (t >> 1);
        }
    }
    let signs: Vec<i8> = (0..m).map(|i| if i > 0 && (best_code >> (i - 1)) & 1 == 1 { -1 } else { 1 }).collect();
    let gamma: Vec<f64> = signs.iter().map(|&s| f64::from(s)).collect();
    Ok((quadratic(directions, &gamma), signs))
}

/// Projected block-coordinate ascent for the same supremum from `starts`
/// random points of the cube. Along one coordinate the objective is a convex
/// parabola, so each update moves to the better endpoint; once no single
/// coordinate improves, blocks of two and three coordinates are maximized
/// jointly over their corners.
pub fn sup_by_coordinate_ascent<R: Rng + ?Sized>(directions: &[Vec<f64>], starts: usize, rng: &mut R) -> Result<f64> {
    let m = check_directions(directions)?;
    let value = |proj: &[f64]| proj.iter().map(|s| s * s).sum::<f64>();
    let mut best = 0.0f64;
    for _ in 0..starts.max(1) {
        let mut gamma: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let mut proj: Vec<f64> = directions.iter().map(|a| a.iter().zip(&gamma).map(|(x, g)| x * g).sum()).collect();
        for _ in 0..10_000 {
            let mut moved = false;
            for i in 0..m {
                // Slope of the parabola at the other coordinates' values.
                let slope: f64 = proj.iter().zip(directions).map(|(s, a)| (s - a[i] * gamma[i]) * a[i]).sum();
                let target = if slope >= 0.0 { 1.0 } else { -1.0 };
                if target != gamma[i] {
                    for (s, a) in proj.iter_mut().zip(directions) {
                        *s += (target - gamma[i]) * a[i];
                    }
                    gamma[i] = target;
                    moved = true;
                }
            }
            if moved {
                continue;
            }
            // Joint flips of two or three coordinates: the remaining corners
            // of each block.
            let current = value(&proj);
            let blocks = (0..m).flat_map(|i| {
                (i + 1..m).flat_map(move |j| std::iter::once(vec![i, j]).chain((j + 1..m).map(move |k| vec![i, j, k])))
            });
            for block in blocks {
                let trial: Vec<f64> = proj
                    .iter()
                    .zip(directions)
                    .map(|(s, a)| s - 2.0 * block.iter().map(|&i| gamma[i] * a[i]).sum::<f64>())
                    .collect();
                if value(&trial) > current * (1.0 + 1e-12) {
                    proj = trial;
                    block.iter().for_each(|&i| gamma[i] = -gamma[i]);
                    moved = true;
                    break;
                }
            }
            if !moved {
                break;
            }
        }
        best = best.max(quadratic(directions, &gamma));
    }
    Ok(best)
}

fn difference(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Vec<f64> {
    p.probs().iter().zip(q.probs()).map(|(a, b)| a - b).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem2Report {
    pub eps: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `sup_γ Σ_ν φ_ν(γ)²`.
    pub sup: f64,
    pub argmax_gamma: Vec<i8>,
    pub holds: bool,
}

/// `(1/|V|) Σ_ν [D(M_ν‖M̄) + D(M̄‖M_ν)] ≤ (e^ε − 1)²/|V| · sup_γ Σ_ν φ_ν(γ)²`
/// with `φ_ν(γ) = Σ_x γ(x)(P_ν(x) − P̄(x))`.
pub fn verify_theorem2(ch: &FiniteChannel, family: &PackingFamily) -> Result<Theorem2Report> {
    if family.atoms() != ch.nx() {
        return Err(Error::Shape(format!("family has {} atoms, channel has {} inputs", family.atoms(), ch.nx())));
    }
    let mean = family.mean()?;
    let mbar = ch.marginalize(&mean)?;
    let mut lhs = CompensatedSum::default();
    for p in family.members() {
        lhs.add(symmetrized_kl(&ch.marginalize(p)?, &mbar)?);
    }
    let v = family.len() as f64;
    let lhs = lhs.value() / v;
    let directions: Vec<Vec<f64>> = family.members().iter().map(|p| difference(p, &mean)).collect();
    let (sup, argmax_gamma) = sup_over_sign_vectors(&directions)?;
    let eps = ch.effective_epsilon();
    let rhs = scaled(1.0 / v, eps, sup);
    Ok(Theorem2Report { eps, lhs, rhs, sup, argmax_gamma, holds: holds(lhs, rhs) })
}

/// Directions `P_{+j} − P_{−j}`, `j = 1..d`, of a hypercube family.
pub fn paired_differences(family: &PackingFamily) -> Result<Vec<Vec<f64>>> {
    let d = family.dim().ok_or_else(|| Error::Unsupported("family has no sign structure".into()))?;
    (0..d)
        .map(|j| {
            let (p, m) = family.paired_mixtures(j)?;
            Ok(difference(&p, &m))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem3Report {
    pub eps: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `D_sym(M^n_{+j}, M^n_{−j})` for each coordinate.
    pub per_coordinate: Vec<f64>,
    /// Per-step suprema `sup_γ Σ_j (γ · (P_{+j,i} − P_{−j,i}))²`.
    pub step_sups: Vec<f64>,
    pub argmax_gammas: Vec<Vec<i8>>,
    pub holds: bool,
}

/// `Σ_j D_sym(M^n_{+j}, M^n_{−j}) ≤ 2(e^ε − 1)² Σ_i sup_γ Σ_j (γ · (P_{+j,i} − P_{−j,i}))²`
/// for a product of per-step channels and per-step hypercube families.
/// `M^n_{±j}` is the mixture of product marginals over `ν_j = ±1`, so it is
/// enumerated on the full output product space.
pub fn verify_theorem3(channels: &[FiniteChannel], families: &[PackingFamily]) -> Result<Theorem3Report> {
    if channels.is_empty() || channels.len() != families.len() {
        return Err(Error::Shape(format!("{} channels for {} step families", channels.len(), families.len())));
    }
    if channels.len() > MAX_STEPS {
        return param(format!("at most {MAX_STEPS} steps are enumerated, got {}", channels.len()));
    }
    let d = families[0].dim().ok_or_else(|| Error::Unsupported("family has no sign structure".into()))?;
    if families.iter().any(|f| f.dim() != Some(d)) {
        return Err(Error::Shape("step families index different hypercubes".into()));
    }
    for (ch, f) in channels.iter().zip(families) {
        if f.atoms() != ch.nx() {
            return Err(Error::Shape(format!("family has {} atoms, channel has {} inputs", f.atoms(), ch.nx())));
        }
    }
    let states: usize = channels.iter().map(FiniteChannel::nz).product();
    if states.saturating_mul(families[0].len()) > MAX_STATES {
        return Err(Error::Unsupported(format!("{states} output states exceed the enumeration cap")));
    }
    // Product marginal of each member across the steps.
    let members = families[0].len();
    let mut joint = Vec::with_capacity(members);
    for nu in 0..members {
        let mut m = channels[0].marginalize(&families[0].members()[nu])?;
        for (ch, f) in channels.iter().zip(families).skip(1) {
            m = product_distribution(&m, &ch.marginalize(&f.members()[nu])?)?;
        }
        joint.push(m);
    }
    let half = 2.0 / members as f64;
    let mut per_coordinate = Vec::with_capacity(d);
    for j in 0..d {
        let plus: Vec<f64> = (0..members).map(|i| if (i >> j) & 1 == 1 { half } else { 0.0 }).collect();
        let minus: Vec<f64> = plus.iter().map(|w| half - w).collect();
        let mp = DiscreteDistribution::mixture(&plus, &joint)?;
        let mm = DiscreteDistribution::mixture(&minus, &joint)?;
        per_coordinate.push(symmetrized_kl(&mp, &mm)?);
    }
    let lhs: CompensatedSum = per_coordinate.iter().copied().collect();
    let mut step_sups = Vec::with_capacity(families.len());
    let mut argmax_gammas = Vec::with_capacity(families.len());
    for f in families {
        let (s, g) = sup_over_sign_vectors(&paired_differences(f)?)?;
        step_sups.push(s);
        argmax_gammas.push(g);
    }
    let eps = channels.iter().map(FiniteChannel::effective_epsilon).fold(0.0, f64::max);
    let total: CompensatedSum = step_sups.iter().copied().collect();
    let rhs = scaled(2.0, eps, total.value());
    let lhs = lhs.value();
    Ok(Theorem3Report { eps, lhs, rhs, per_coordinate, step_sups, argmax_gammas, holds: holds(lhs, rhs) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::channel::{random_distribution, random_private_channel};
    use crate::rng::RngStream;
    use proptest::prelude::{any, prop_assert, proptest};

    fn dd(p: &[f64]) -> DiscreteDistribution {
        DiscreteDistribution::new(p.to_vec()).unwrap()
    }

    fn brute_force_sup(directions: &[Vec<f64>]) -> f64 {
        let m = directions[0].len();
        (0..1u32 << m)
            .map(|code| {
                let g: Vec<f64> = (0..m).map(|i| if (code >> i) & 1 == 1 { -1.0 } else { 1.0 }).collect();
                quadratic(directions, &g)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn equal_inputs_give_zero_sides() {
        let mut rng = RngStream::new(0, 0);
        let ch = random_private_channel(3, 4, 1.0, &mut rng).unwrap();
        let p = random_distribution(3, false, &mut rng).unwrap();
        let r = verify_theorem1(&ch, &p, &p).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        assert!(r.holds);
        let f = PackingFamily::new(vec![p.clone(); 4]).unwrap();
        let r = verify_theorem2(&ch, &f).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        let r = verify_corollary1(&[ch.clone(), ch], &[(p.clone(), p.clone()), (p.clone(), p)]).unwrap();
        assert_eq!(r.lhs, 0.0);
    }

    #[test]
    fn identity_channel_has_infinite_right_side() {
        let ch = FiniteChannel::identity(2).unwrap();
        let r = verify_theorem1(&ch, &dd(&[1.0, 0.0]), &dd(&[0.5, 0.5])).unwrap();
        assert_eq!(r.rhs, f64::INFINITY);
        assert_eq!(r.lhs, f64::INFINITY);
        assert!(r.holds);
    }

    #[test]
    fn theorem1_on_randomized_response() {
        // Two-category response flips with probability 1/(1+e^{ε/2}).
        let eps: f64 = 0.5;
        let ch = FiniteChannel::randomized_response(2, eps).unwrap();
        let (p1, p2) = (dd(&[1.0, 0.0]), dd(&[0.0, 1.0]));
        let r = verify_theorem1(&ch, &p1, &p2).unwrap();
        assert!((r.eps - eps).abs() < 1e-12);
        assert_eq!(r.tv, 1.0);
        // e^{2ε} < 4 here, so the smaller constant applies.
        assert!((r.rhs - (2.0 * eps).exp() * eps.exp_m1().powi(2)).abs() < 1e-12);
        assert!(r.holds && r.dpi_holds);
        // Point masses have infinite KL, so the weak form is vacuous.
        assert_eq!(r.weak.unwrap().rhs, f64::INFINITY);
    }

    #[test]
    fn corollary1_with_one_step_is_theorem1_with_constant_four() {
        let mut rng = RngStream::new(1, 0);
        let ch = random_private_channel(3, 3, 0.3, &mut rng).unwrap();
        let p = random_distribution(3, false, &mut rng).unwrap();
        let q = random_distribution(3, false, &mut rng).unwrap();
        let c = verify_corollary1(std::slice::from_ref(&ch), &[(p.clone(), q.clone())]).unwrap();
        let t = verify_theorem1(&ch, &p, &q).unwrap();
        assert!((c.lhs - t.lhs).abs() < 1e-15);
        assert!((c.rhs - 4.0 * t.eps.exp_m1().powi(2) * t.tv * t.tv).abs() < 1e-15);
        assert!(c.rhs >= t.rhs);
    }

    #[test]
    fn corollary1_three_steps_by_direct_enumeration() {
        let mut rng = RngStream::new(2, 0);
        let chs: Vec<_> = (0..3).map(|_| random_private_channel(2, 3, 1.0, &mut rng).unwrap()).collect();
        let pairs: Vec<_> = (0..3)
            .map(|_| (random_distribution(2, false, &mut rng).unwrap(), random_distribution(2, false, &mut rng).unwrap()))
            .collect();
        let r = verify_corollary1(&chs, &pairs).unwrap();
        assert!(r.holds);
        // Independent oracle: KL of product laws is the sum of per-step KLs.
        let mut sum = 0.0;
        for (ch, (p, q)) in chs.iter().zip(&pairs) {
            sum += symmetrized_kl(&ch.marginalize(p).unwrap(), &ch.marginalize(q).unwrap()).unwrap();
        }
        assert!((r.lhs - sum).abs() < 1e-12);
    }

    #[test]
    fn gray_code_matches_brute_force() {
        let mut rng = RngStream::new(3, 0);
        for m in 1..=10 {
            let dirs: Vec<Vec<f64>> = (0..3).map(|_| (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let (s, g) = sup_over_sign_vectors(&dirs).unwrap();
            assert!((s - brute_force_sup(&dirs)).abs() < 1e-12);
            assert_eq!(g[0], 1);
            let gf: Vec<f64> = g.iter().map(|&x| f64::from(x)).collect();
            assert_eq!(quadratic(&dirs, &gf), s);
        }
        assert!(sup_over_sign_vectors(&[vec![0.0; 21]]).is_err());
        assert!(sup_over_sign_vectors(&[]).is_err());
    }

    #[test]
    fn two_member_family_reduces_to_total_variation() {
        // |V| = 2: φ_ν(γ) = ±γ·(P₁ − P₂)/2, so the supremum is 2 TV² and the
        // right side is (e^ε − 1)² TV².
        let mut rng = RngStream::new(4, 0);
        let ch = random_private_channel(4, 3, 0.8, &mut rng).unwrap();
        let p1 = random_distribution(4, false, &mut rng).unwrap();
        let p2 = random_distribution(4, false, &mut rng).unwrap();
        let tv = tv_distance(&p1, &p2).unwrap();
        let r = verify_theorem2(&ch, &PackingFamily::new(vec![p1, p2]).unwrap()).unwrap();
        assert!((r.sup - 2.0 * tv * tv).abs() < 1e-12);
        assert!((r.rhs - r.eps.exp_m1().powi(2) * tv * tv).abs() < 1e-12);
        assert!(r.holds);
    }

    #[test]
    fn theorem3_with_one_coordinate_is_theorem1_up_to_two() {
        let mut rng = RngStream::new(5, 0);
        let ch = random_private_channel(3, 4, 0.5, &mut rng).unwrap();
        let pm = random_distribution(3, false, &mut rng).unwrap();
        let pp = random_distribution(3, false, &mut rng).unwrap();
        let f = PackingFamily::hypercube(vec![pm.clone(), pp.clone()], 1).unwrap();
        let r3 = verify_theorem3(std::slice::from_ref(&ch), &[f]).unwrap();
        let r1 = verify_theorem1(&ch, &pp, &pm).unwrap();
        assert!((r3.lhs - r1.lhs).abs() < 1e-15);
        // sup_γ (γ·(P₊ − P₋))² = 4 TV², times 2(e^ε − 1)².
        assert!((r3.rhs - 8.0 * r1.eps.exp_m1().powi(2) * r1.tv * r1.tv).abs() < 1e-12);
        assert!(r3.rhs >= 2.0 * r1.rhs - 1e-15);
    }

    #[test]
    fn multinomial_step_supremum() {
        for (d, delta) in [(2, 0.5), (4, 0.25), (8, 0.1)] {
            let f = PackingFamily::multinomial(d, delta).unwrap();
            let (s, _) = sup_over_sign_vectors(&paired_differences(&f).unwrap()).unwrap();
            let target = 8.0 * delta * delta / d as f64;
            assert!((s - target).abs() < 1e-15);
            let eps: f64 = 1.0;
            let ch = FiniteChannel::randomized_response(d, eps).unwrap();
            let r = verify_theorem3(&[ch], &[f]).unwrap();
            assert!(r.rhs <= 2.0 * eps.exp_m1().powi(2) * target * (1.0 + 1e-12));
            assert!(r.holds);
        }
    }

    #[test]
    fn theorem3_two_steps_holds() {
        let mut rng = RngStream::new(6, 0);
        let d = 2;
        let families: Vec<_> = (0..2)
            .map(|_| {
                let m = (0..4).map(|_| random_distribution(3, false, &mut rng).unwrap()).collect();
                PackingFamily::hypercube(m, d).unwrap()
            })
            .collect();
        let chs: Vec<_> = (0..2).map(|_| random_private_channel(3, 3, 1.0, &mut rng).unwrap()).collect();
        let r = verify_theorem3(&chs, &families).unwrap();
        assert!(r.holds);
        assert_eq!(r.per_coordinate.len(), d);
    }

    #[test]
    fn shape_errors() {
        let ch = FiniteChannel::identity(2).unwrap();
        let f = PackingFamily::new(vec![dd(&[1.0, 0.0, 0.0])]).unwrap();
        assert!(verify_theorem2(&ch, &f).is_err());
        assert!(verify_theorem3(std::slice::from_ref(&ch), &[f]).is_err());
        assert!(verify_corollary1(std::slice::from_ref(&ch), &[]).is_err());
        let wide = PackingFamily::new(vec![DiscreteDistribution::uniform(21).unwrap()]).unwrap();
        let c = FiniteChannel::constant(21, &dd(&[1.0])).unwrap();
        assert!(matches!(verify_theorem2(&c, &wide), Err(Error::Unsupported(_))));
    }

    #[test]
    fn theorem1_rhs_is_monotone_on_a_grid() {
        let p = dd(&[0.5, 0.5]);
        let mut last_eps = 0.0;
        for e in 1..=40 {
            let eps = 0.1 * e as f64;
            let mut last_tv = 0.0;
            for t in 0..=10 {
                let q = dd(&[0.5 + 0.05 * t as f64, 0.5 - 0.05 * t as f64]);
                let ch = FiniteChannel::randomized_response(2, eps).unwrap();
                let r = verify_theorem1(&ch, &p, &q).unwrap();
                assert!(r.rhs >= last_tv);
                last_tv = r.rhs;
            }
            assert!(last_tv >= last_eps);
            last_eps = last_tv;
        }
    }

    proptest! {
        #[test]
        fn ascent_never_beats_enumeration(seed in any::<u64>(), m in 1usize..9, k in 1usize..9) {
            let mut rng = RngStream::new(seed, 0);
            let dirs: Vec<Vec<f64>> = (0..k).map(|_| (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let (s, _) = sup_over_sign_vectors(&dirs).unwrap();
            let a = sup_by_coordinate_ascent(&dirs, 32, &mut rng).unwrap();
            prop_assert!(a <= s + 1e-12);
        }

        #[test]
        fn theorem1_and_dpi_hold(seed in any::<u64>(), nx in 2usize..7, nz in 2usize..7, eps in 0.0f64..3.0) {
            let mut rng = RngStream::new(seed, 1);
            let ch = random_private_channel(nx, nz, eps, &mut rng).unwrap();
            let p1 = random_distribution(nx, true, &mut rng).unwrap();
            let p2 = random_distribution(nx, true, &mut rng).unwrap();
            let r = verify_theorem1(&ch, &p1, &p2).unwrap();
            prop_assert!(r.holds && r.dpi_holds);
            if let Some(w) = r.weak {
                prop_assert!(w.holds);
            }
        }
    }
}
