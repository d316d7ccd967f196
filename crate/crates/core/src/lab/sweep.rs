//! Randomized sweeps of the theorem checks with a versioned JSON report.
//!
//! Instance `i` at budget index `e` draws everything from
//! `RngStream::for_trial(seed, e, i)`, so any counterexample is reproducible
//! from the report alone. Instances run in parallel; outcomes are folded in
//! instance order.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::channel::{random_distribution, random_private_channel, FiniteChannel};
use super::family::PackingFamily;
use super::theorems::{
    paired_differences, sup_by_coordinate_ascent, verify_corollary1, verify_theorem1, verify_theorem2,
    verify_theorem3, TOLERANCE,
};
use crate::divergence::DiscreteDistribution;
use crate::error::{param, Error, Result};
use crate::rng::RngStream;

pub const REPORT_SCHEMA_VERSION: u32 = 1;
/// Random starts of the ascent oracle.
pub const ORACLE_STARTS: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TheoremId {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "cor1")]
    Corollary1,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "3")]
    Three,
}

impl TheoremId {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::One => "1",
            Self::Corollary1 => "cor1",
            Self::Two => "2",
            Self::Three => "3",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(Self::One),
            "cor1" => Ok(Self::Corollary1),
            "2" => Ok(Self::Two),
            "3" => Ok(Self::Three),
            other => param(format!("unknown theorem `{other}` (expected 1, cor1, 2 or 3)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub theorem: TheoremId,
    pub instances: usize,
    pub eps: Vec<f64>,
    pub seed: u64,
}

/// Full instance data for a failed check.
#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub kind: String,
    pub eps: f64,
    pub instance: u64,
    pub lhs: f64,
    pub rhs: f64,
    /// One channel per step.
    pub channels: Vec<FiniteChannel>,
    /// Input laws per step.
    pub distributions: Vec<Vec<DiscreteDistribution>>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct EpsSummary {
    pub eps: f64,
    pub instances: usize,
    pub violations: usize,
    pub max_ratio: f64,
    /// Data-processing check (theorem 1 only).
    pub dpi_violations: usize,
    /// KL form of the bound, checked when `ε ≤ 23/35` (theorem 1 only).
    pub weak_checks: usize,
    pub weak_violations: usize,
    /// Vertex supremum vs the ascent oracle (theorems 2 and 3).
    pub oracle_checks: usize,
    pub oracle_mismatches: usize,
    pub max_oracle_gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub theorem: TheoremId,
    pub seed: u64,
    pub instances_per_eps: usize,
    pub tolerance: f64,
    pub per_eps: Vec<EpsSummary>,
    pub counterexamples: Vec<Counterexample>,
}

impl SweepReport {
    pub fn violations(&self) -> usize {
        self.per_eps.iter().map(|s| s.violations + s.dpi_violations + s.weak_violations).sum()
    }

    pub fn oracle_mismatches(&self) -> usize {
        self.per_eps.iter().map(|s| s.oracle_mismatches).sum()
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0 && self.oracle_mismatches() == 0
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Default)]
struct Outcome {
    ratio: f64,
    violation: bool,
    dpi_violation: bool,
    weak: Option<bool>,
    oracle_gaps: Vec<f64>,
    counterexamples: Vec<Counterexample>,
}

/// `lhs/rhs`; right sides below the tolerance only register if the left
/// side clears it.
fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs > TOLERANCE {
        lhs / rhs
    } else if lhs <= TOLERANCE {
        0.0
    } else {
        f64::INFINITY
    }
}

struct Instance {
    eps: f64,
    index: u64,
    channels: Vec<FiniteChannel>,
    distributions: Vec<Vec<DiscreteDistribution>>,
}

impl Instance {
    fn counterexample(&self, kind: &str, lhs: f64, rhs: f64) -> Counterexample {
        Counterexample {
            kind: kind.into(),
            eps: self.eps,
            instance: self.index,
            lhs,
            rhs,
            channels: self.channels.clone(),
            distributions: self.distributions.clone(),
        }
    }
}

fn size<R: Rng>(rng: &mut R, lo: usize, hi: usize) -> usize {
    rng.gen_range(lo..=hi)
}

fn random_family<R: Rng>(members: usize, atoms: usize, rng: &mut R) -> Result<Vec<DiscreteDistribution>> {
    (0..members).map(|_| random_distribution(atoms, rng.gen_bool(0.25), rng)).collect()
}

fn run_instance(theorem: TheoremId, eps: f64, cell: u64, index: u64, seed: u64) -> Result<Outcome> {
    let mut rng = RngStream::for_trial(seed, cell, index);
    let mut out = Outcome::default();
    match theorem {
        TheoremId::One => {
            let (nx, nz) = (size(&mut rng, 2, 6), size(&mut rng, 2, 6));
            let ch = random_private_channel(nx, nz, eps, &mut rng)?;
            let p1 = random_distribution(nx, rng.gen_bool(0.5), &mut rng)?;
            let p2 = random_distribution(nx, rng.gen_bool(0.5), &mut rng)?;
            let r = verify_theorem1(&ch, &p1, &p2)?;
            let inst = Instance { eps, index, channels: vec![ch], distributions: vec![vec![p1, p2]] };
            out.ratio = ratio(r.lhs, r.rhs);
            if !r.holds {
                out.violation = true;
                out.counterexamples.push(inst.counterexample("theorem", r.lhs, r.rhs));
            }
            if !r.dpi_holds {
                out.dpi_violation = true;
                out.counterexamples.push(inst.counterexample("data-processing", r.lhs, r.input_sym_kl));
            }
            if let Some(w) = r.weak {
                out.weak = Some(w.holds);
                if !w.holds {
                    out.counterexamples.push(inst.counterexample("kl-form", r.lhs, w.rhs));
                }
            }
        }
        TheoremId::Corollary1 => {
            let steps = size(&mut rng, 1, 3);
            let mut channels = Vec::with_capacity(steps);
            let mut pairs = Vec::with_capacity(steps);
            for _ in 0..steps {
                let (nx, nz) = (size(&mut rng, 2, 4), size(&mut rng, 2, 4));
                channels.push(random_private_channel(nx, nz, eps, &mut rng)?);
                pairs.push((
                    random_distribution(nx, rng.gen_bool(0.5), &mut rng)?,
                    random_distribution(nx, rng.gen_bool(0.5), &mut rng)?,
                ));
            }
            let r = verify_corollary1(&channels, &pairs)?;
            out.ratio = ratio(r.lhs, r.rhs);
            if !r.holds {
                out.violation = true;
                let distributions = pairs.into_iter().map(|(a, b)| vec![a, b]).collect();
                let inst = Instance { eps, index, channels, distributions };
                out.counterexamples.push(inst.counterexample("theorem", r.lhs, r.rhs));
            }
        }
        TheoremId::Two => {
            let (nx, nz, v) = (size(&mut rng, 2, 8), size(&mut rng, 2, 6), size(&mut rng, 2, 8));
            let ch = random_private_channel(nx, nz, eps, &mut rng)?;
            let members = random_family(v, nx, &mut rng)?;
            let family = PackingFamily::new(members.clone())?;
            let r = verify_theorem2(&ch, &family)?;
            let mean = family.mean()?;
            let dirs: Vec<Vec<f64>> =
                members.iter().map(|p| p.probs().iter().zip(mean.probs()).map(|(a, b)| a - b).collect()).collect();
            let oracle = sup_by_coordinate_ascent(&dirs, ORACLE_STARTS, &mut rng)?;
            out.oracle_gaps.push((r.sup - oracle).abs());
            let inst = Instance { eps, index, channels: vec![ch], distributions: vec![members] };
            out.ratio = ratio(r.lhs, r.rhs);
            if !r.holds {
                out.violation = true;
                out.counterexamples.push(inst.counterexample("theorem", r.lhs, r.rhs));
            }
            if (r.sup - oracle).abs() > TOLERANCE {
                out.counterexamples.push(inst.counterexample("oracle", r.sup, oracle));
            }
        }
        TheoremId::Three => {
            let d = size(&mut rng, 1, 4);
            let steps = size(&mut rng, 1, 3);
            let nx = size(&mut rng, 2, 8);
            let mut channels = Vec::with_capacity(steps);
            let mut families = Vec::with_capacity(steps);
            let mut distributions = Vec::with_capacity(steps);
            for _ in 0..steps {
                channels.push(random_private_channel(nx, size(&mut rng, 2, 6), eps, &mut rng)?);
                let members = random_family(1 << d, nx, &mut rng)?;
                families.push(PackingFamily::hypercube(members.clone(), d)?);
                distributions.push(members);
            }
            let r = verify_theorem3(&channels, &families)?;
            let inst = Instance { eps, index, channels, distributions };
            out.ratio = ratio(r.lhs, r.rhs);
            if !r.holds {
                out.violation = true;
                out.counterexamples.push(inst.counterexample("theorem", r.lhs, r.rhs));
            }
            for (f, &sup) in families.iter().zip(&r.step_sups) {
                let oracle = sup_by_coordinate_ascent(&paired_differences(f)?, ORACLE_STARTS, &mut rng)?;
                out.oracle_gaps.push((sup - oracle).abs());
                if (sup - oracle).abs() > TOLERANCE {
                    out.counterexamples.push(inst.counterexample("oracle", sup, oracle));
                }
            }
        }
    }
    Ok(out)
}

/// Run `instances` random checks at each budget.
pub fn run_verification_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    if cfg.instances == 0 {
        return param("sweep needs at least one instance");
    }
    if cfg.eps.is_empty() {
        return param("sweep needs at least one privacy budget");
    }
    if let Some(e) = cfg.eps.iter().find(|e| !(**e >= 0.0 && e.is_finite())) {
        return param(format!("privacy budget must be finite and non-negative, got {e}"));
    }
    let mut per_eps = Vec::with_capacity(cfg.eps.len());
    let mut counterexamples = Vec::new();
    for (cell, &eps) in cfg.eps.iter().enumerate() {
        let outcomes: Vec<Outcome> = (0..cfg.instances as u64)
            .into_par_iter()
            .map(|i| run_instance(cfg.theorem, eps, cell as u64, i, cfg.seed))
            .collect::<Result<_>>()?;
        let mut s = EpsSummary { eps, instances: cfg.instances, ..EpsSummary::default() };
        for o in outcomes {
            s.max_ratio = s.max_ratio.max(o.ratio);
            s.violations += usize::from(o.violation);
            s.dpi_violations += usize::from(o.dpi_violation);
            if let Some(ok) = o.weak {
                s.weak_checks += 1;
                s.weak_violations += usize::from(!ok);
            }
            for gap in o.oracle_gaps {
                s.oracle_checks += 1;
                s.oracle_mismatches += usize::from(gap > TOLERANCE);
                s.max_oracle_gap = s.max_oracle_gap.max(gap);
            }
            counterexamples.extend(o.counterexamples);
        }
        per_eps.push(s);
    }
    Ok(SweepReport {
        schema_version: REPORT_SCHEMA_VERSION,
        theorem: cfg.theorem,
        seed: cfg.seed,
        instances_per_eps: cfg.instances,
        tolerance: TOLERANCE,
        per_eps,
        counterexamples,
    })
}
