//! Finite channels `Q(z|x)` and a generator of random ε-private channels.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::divergence::DiscreteDistribution;
use crate::error::{param, Error, Result};
use crate::mechanisms::keep_probability;
use crate::numeric::CompensatedSum;

const ROW_TOL: f64 = 1e-12;

/// Row-stochastic `|X| × |Z|` matrix of conditionals `Q(z|x)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiniteChannel {
    nx: usize,
    nz: usize,
    q: Vec<f64>,
}

impl FiniteChannel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let nz = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != nz) {
            return Err(Error::Shape("channel rows have different lengths".into()));
        }
        Self::from_flat(rows.len(), nz, rows.concat())
    }

    /// Row-major `nx × nz` entries.
    pub fn from_flat(nx: usize, nz: usize, q: Vec<f64>) -> Result<Self> {
        if nx == 0 || nz == 0 {
            return Err(Error::Shape("channel needs at least one input and one output".into()));
        }
        if q.len() != nx * nz {
            return Err(Error::Shape(format!("{} entries for a {nx}×{nz} channel", q.len())));
        }
        if let Some(v) = q.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return param(format!("channel entry {v} is not a finite non-negative number"));
        }
        for (x, row) in q.chunks(nz).enumerate() {
            let s: CompensatedSum = row.iter().copied().collect();
            if (s.value() - 1.0).abs() > ROW_TOL {
                return param(format!("row {x} sums to {}", s.value()));
            }
        }
        Ok(Self { nx, nz, q })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut q = vec![0.0; n * n];
        (0..n).for_each(|i| q[i * n + i] = 1.0);
        Self::from_flat(n, n, q)
    }

    /// Every input maps to the same output law.
    pub fn constant(nx: usize, row: &DiscreteDistribution) -> Result<Self> {
        Self::from_flat(nx, row.len(), row.probs().repeat(nx))
    }

    /// Randomized response on `d` categories as a matrix over outputs
    /// `{0,1}^d`; output `z` is indexed by the bits of its column number.
    pub fn randomized_response(d: usize, eps: f64) -> Result<Self> {
        if d == 0 || d > 16 {
            return param(format!("randomized-response matrix needs 1 ≤ d ≤ 16, got {d}"));
        }
        if !(eps >= 0.0 && eps.is_finite()) {
            return param(format!("privacy budget must be finite and non-negative, got {eps}"));
        }
        let keep = keep_probability(eps);
        let nz = 1usize << d;
        let mut q = Vec::with_capacity(d * nz);
        for x in 0..d {
            for z in 0..nz {
                let p: f64 = (0..d)
                    .map(|j| {
                        let bit = (z >> j) & 1 == 1;
                        if bit == (j == x) {
                            keep
                        } else {
                            1.0 - keep
                        }
                    })
                    .product();
                q.push(p);
            }
        }
        Self::from_flat(d, nz, q)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.q[x * self.nz..(x + 1) * self.nz]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.q.chunks(self.nz).map(<[f64]>::to_vec).collect()
    }

    /// `max_{z,x,x′} log(Q(z|x)/Q(z|x′))` with `0/0 = 1` and `p/0 = ∞`.
    pub fn effective_epsilon(&self) -> f64 {
        let mut worst = 0.0f64;
        for z in 0..self.nz {
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for x in 0..self.nx {
                let v = self.q[x * self.nz + z];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if hi == 0.0 {
                continue;
            }
            if lo == 0.0 {
                return f64::INFINITY;
            }
            worst = worst.max((hi / lo).ln());
        }
        worst
    }

    /// `M = pᵀQ`.
    pub fn marginalize(&self, p: &DiscreteDistribution) -> Result<DiscreteDistribution> {
        if p.len() != self.nx {
            return Err(Error::Shape(format!("input law has {} atoms, channel has {} inputs", p.len(), self.nx)));
        }
        let mut m = vec![CompensatedSum::default(); self.nz];
        for (x, &px) in p.probs().iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            for (acc, q) in m.iter_mut().zip(self.row(x)) {
                acc.add(px * q);
            }
        }
        let m: Vec<f64> = m.iter().map(CompensatedSum::value).collect();
        DiscreteDistribution::from_weights(&m)
    }

    /// Channel on `X₁ × X₂ → Z₁ × Z₂` applying the two factors independently;
    /// pairs are indexed `a · |second| + b`.
    pub fn product(&self, other: &Self) -> Result<Self> {
        let (nx, nz) = (self.nx * other.nx, self.nz * other.nz);
        let mut q = Vec::with_capacity(nx * nz);
        for x1 in 0..self.nx {
            for x2 in 0..other.nx {
                for &a in self.row(x1) {
                    q.extend(other.row(x2).iter().map(|b| a * b));
                }
            }
        }
        renormalized(nx, nz, q)
    }
}

/// Absorb rounding so each row sums to one before validation.
fn renormalized(nx: usize, nz: usize, mut q: Vec<f64>) -> Result<FiniteChannel> {
    for row in q.chunks_mut(nz) {
        let s: CompensatedSum = row.iter().copied().collect();
        let s = s.value();
        row.iter_mut().for_each(|v| *v /= s);
    }
    FiniteChannel::from_flat(nx, nz, q)
}

/// Product law `p₁ ⊗ p₂` indexed like [`FiniteChannel::product`].
pub fn product_distribution(p1: &DiscreteDistribution, p2: &DiscreteDistribution) -> Result<DiscreteDistribution> {
    let w: Vec<f64> = p1.probs().iter().flat_map(|a| p2.probs().iter().map(move |b| a * b)).collect();
    DiscreteDistribution::from_weights(&w)
}

pub fn effective_epsilon(ch: &FiniteChannel) -> f64 {
    ch.effective_epsilon()
}

pub fn marginalize(ch: &FiniteChannel, p: &DiscreteDistribution) -> Result<DiscreteDistribution> {
    ch.marginalize(p)
}

/// Random law on `n` atoms; with `sparse` some atoms get zero mass.
pub fn random_distribution<R: Rng + ?Sized>(n: usize, sparse: bool, rng: &mut R) -> Result<DiscreteDistribution> {
    if n == 0 {
        return Err(Error::Shape("distribution needs at least one atom".into()));
    }
    let mut w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    if sparse {
        let keep = rng.gen_range(0..n);
        for (i, v) in w.iter_mut().enumerate() {
            if i != keep && rng.gen_bool(0.3) {
                *v = 0.0;
            }
        }
    }
    DiscreteDistribution::from_weights(&w)
}

/// Random channel with `effective_epsilon ≤ eps`.
///
/// Rows start as `exp(ε u_{xz}) b_z` for a random base row `b` and
/// `u ∈ [0,1]` (uniform, or `{0,1}` for a quarter of the draws to reach the
/// extremes). Per-row normalization can push ratios up to `e^{2ε}`, so the
/// rows are then mixed toward `b` by the largest weight that restores the
/// bound.
pub fn random_private_channel<R: Rng + ?Sized>(nx: usize, nz: usize, eps: f64, rng: &mut R) -> Result<FiniteChannel> {
    if nx == 0 || nz == 0 {
        return Err(Error::Shape("channel needs at least one input and one output".into()));
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return param(format!("privacy budget must be finite and non-negative, got {eps}"));
    }
    let base = random_distribution(nz, false, rng)?;
    let b = base.probs();
    let extremal = rng.gen_bool(0.25);
    let mut raw = Vec::with_capacity(nx * nz);
    for _ in 0..nx {
        let start = raw.len();
        for &bz in b {
            let u: f64 = if extremal { f64::from(u8::from(rng.gen::<bool>())) } else { rng.gen() };
            raw.push((eps * u).exp() * bz);
        }
        let s: f64 = raw[start..].iter().sum();
        raw[start..].iter_mut().for_each(|v| *v /= s);
    }
    let mix = |lambda: f64| -> Result<FiniteChannel> {
        let q = raw.chunks(nz).flat_map(|row| row.iter().zip(b).map(move |(r, bz)| lambda * r + (1.0 - lambda) * bz));
        renormalized(nx, nz, q.collect())
    };
    let full = mix(1.0)?;
    if full.effective_epsilon() <= eps {
        return Ok(full);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mix(mid)?.effective_epsilon() <= eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mix(lo)
}
