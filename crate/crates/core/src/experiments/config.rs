//! Experiment configuration: INI files with `[experiment]`, `[grid]`,
//! `[distribution]`, `[estimator]` and optional `[fit]` sections.
//!
//! ```text
//! [experiment]
//! task = mean1d
//! seed = 7
//! trials = 100
//!
//! [grid]
//! n = 2^10..2^20        ; also lists, 2^a, and 2^a..2^b:0.5
//! eps = 0.5
//! d = 1
//!
//! [distribution]
//! name = moment-two-point
//! delta = 0.25
//!
//! [estimator]
//! variants = private, nonprivate
//! metrics = mse
//! k = 2
//!
//! [fit]
//! private = -0.6..-0.4  ; accepted slope band per variant (or variant.metric)
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use ini::Ini;

use super::distributions::DataLaw;
use crate::error::{Error, Result};

fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

/// Minimum trials per cell.
pub const MIN_TRIALS: usize = 30;
/// Minimum grid points for a slope fit.
pub const MIN_FIT_POINTS: usize = 4;

macro_rules! named_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl serde::Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }

        impl<'de> serde::Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.trim() {
                    $($text => Ok($name::$variant),)+
                    other => config(format!(
                        concat!("unknown ", stringify!($name), " `{}` (expected one of: {})"),
                        other,
                        [$($text),+].join(", ")
                    )),
                }
            }
        }
    };
}

named_enum!(
    /// Estimation problem simulated by a sweep.
    Task {
        Mean1d => "mean1d",
        MeanL2 => "mean-l2",
        MeanLinf => "mean-linf",
        MeanSparse => "mean-sparse",
        Multinomial => "multinomial",
        Histogram => "histogram",
        OrthoSeries => "orthoseries",
        Regression => "regression",
    }
);

named_enum!(
    /// Estimator run on each simulated sample.
    Variant {
        Private => "private",
        NonPrivate => "nonprivate",
        StrategyA => "strategy-a",
        StrategyB => "strategy-b",
        Sparse => "sparse",
        Laplace => "laplace",
        RandomizedResponse => "rr",
        Hypercube => "hypercube",
    }
);

named_enum!(
    /// Loss recorded per trial: squared ℓ2 error (integrated squared error
    /// for densities) or ℓ1 error.
    Metric {
        Mse => "mse",
        L1 => "l1",
    }
);

impl Task {
    pub fn variants(self) -> &'static [Variant] {
        use Variant::*;
        match self {
            Task::Mean1d | Task::Histogram | Task::Regression => &[Private, NonPrivate],
            Task::MeanL2 => &[StrategyA, Laplace, NonPrivate],
            Task::MeanLinf => &[StrategyB, NonPrivate],
            Task::MeanSparse => &[Sparse, StrategyB, NonPrivate],
            Task::Multinomial => &[RandomizedResponse, Laplace, NonPrivate],
            Task::OrthoSeries => &[Hypercube, Laplace, NonPrivate],
        }
    }

    pub fn metrics(self) -> &'static [Metric] {
        match self {
            Task::Histogram | Task::OrthoSeries => &[Metric::Mse],
            _ => &[Metric::Mse, Metric::L1],
        }
    }

    pub fn default_distribution(self) -> &'static str {
        match self {
            Task::Mean1d => "moment-two-point",
            Task::MeanL2 => "sphere-mixture",
            Task::MeanLinf | Task::MeanSparse => "cube-signs",
            Task::Multinomial => "geometric",
            Task::Histogram => "sloped",
            Task::OrthoSeries => "sobolev",
            Task::Regression => "regression",
        }
    }

    fn accepts(self, law: &DataLaw) -> bool {
        matches!(
            (self, law),
            (Task::Mean1d, DataLaw::MomentTwoPoint { .. })
                | (Task::MeanL2, DataLaw::SphereMixture { .. })
                | (Task::MeanLinf | Task::MeanSparse, DataLaw::CubeSigns { .. })
                | (Task::Multinomial, DataLaw::Geometric { .. })
                | (Task::Histogram | Task::OrthoSeries, DataLaw::Sloped { .. } | DataLaw::Sobolev { .. })
                | (Task::Regression, DataLaw::Regression { .. })
        )
    }
}

/// Estimator tuning shared by the tasks.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorParams {
    /// Moment order for the truncated one-dimensional mean.
    pub moment: f64,
    /// Smoothness for the series size rules.
    pub beta: f64,
    /// Radius of the ball or box holding the data.
    pub radius: f64,
    /// Soft-threshold level for the sparse mean (default rule if `None`).
    pub lambda: Option<f64>,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        Self { moment: 2.0, beta: 2.0, radius: 1.0, lambda: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub task: Task,
    pub n_grid: Vec<usize>,
    pub eps_grid: Vec<f64>,
    pub d_grid: Vec<usize>,
    pub trials: usize,
    pub distribution: DataLaw,
    pub variants: Vec<Variant>,
    pub metrics: Vec<Metric>,
    pub params: EstimatorParams,
    pub seed: u64,
    pub output: Option<PathBuf>,
    /// Record per-cell wall time (otherwise the column is 0 so output stays
    /// a pure function of the config).
    pub timing: bool,
    /// Accepted slope bands keyed by `(variant, metric)`.
    pub fit_bands: BTreeMap<(Variant, Metric), (f64, f64)>,
}

impl ExperimentConfig {
    /// Defaults for `task`, with the given grids.
    pub fn new(task: Task, n_grid: Vec<usize>, eps_grid: Vec<f64>, d: usize, trials: usize, seed: u64) -> Result<Self> {
        let distribution = DataLaw::from_params(task.default_distribution(), &|_| None)?;
        let cfg = Self {
            task,
            n_grid,
            eps_grid,
            d_grid: vec![d],
            trials,
            distribution,
            variants: task.variants().to_vec(),
            metrics: vec![Metric::Mse],
            params: EstimatorParams::default(),
            seed,
            output: None,
            timing: false,
            fit_bands: BTreeMap::new(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.eps_grid.is_empty() || self.d_grid.is_empty() {
            return config("n, eps and d grids must be non-empty");
        }
        if self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return config(format!("n grid must be positive and strictly increasing: {:?}", self.n_grid));
        }
        if let Some(e) = self.eps_grid.iter().find(|e| !(**e > 0.0)) {
            return config(format!("privacy budgets must be positive (inf selects the noiseless path), got {e}"));
        }
        if matches!(self.task, Task::Histogram | Task::OrthoSeries) && self.eps_grid.iter().any(|e| e.is_infinite()) {
            return config(format!("task {} sizes its estimator from a finite privacy budget", self.task));
        }
        if self.d_grid.contains(&0) {
            return config("dimension must be at least 1");
        }
        if self.trials < MIN_TRIALS {
            return config(format!("at least {MIN_TRIALS} trials per cell are required, got {}", self.trials));
        }
        if !self.task.accepts(&self.distribution) {
            return config(format!("task {} cannot use distribution {}", self.task, self.distribution.name()));
        }
        if self.variants.is_empty() || self.metrics.is_empty() {
            return config("at least one variant and one metric are required");
        }
        for v in &self.variants {
            if !self.task.variants().contains(v) {
                return config(format!("task {} has no variant {v}", self.task));
            }
        }
        for m in &self.metrics {
            if !self.task.metrics().contains(m) {
                return config(format!("task {} has no metric {m}", self.task));
            }
        }
        for (v, m) in self.fit_bands.keys() {
            if !self.variants.contains(v) || !self.metrics.contains(m) {
                return config(format!("fit band for {v}:{m} names a series that is not run"));
            }
        }
        if !self.fit_bands.is_empty() && self.n_grid.len() < MIN_FIT_POINTS {
            return config(format!("slope fits need at least {MIN_FIT_POINTS} n values"));
        }
        if matches!(self.task, Task::Multinomial) && self.d_grid.contains(&1) {
            return config("multinomial needs at least two categories");
        }
        if matches!(self.task, Task::Mean1d | Task::Histogram | Task::OrthoSeries) && self.d_grid != [1] {
            return config(format!("task {} is one-dimensional; set d = 1", self.task));
        }
        Ok(())
    }

    pub fn from_ini_str(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_ini(&ini)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_ini_str(&text)
    }

    fn from_ini(ini: &Ini) -> Result<Self> {
        let mut seen = Vec::new();
        for (section, _) in ini.iter() {
            match section {
                None | Some("experiment" | "grid" | "distribution" | "estimator" | "fit") => {}
                Some(other) => return config(format!("unknown section [{other}]")),
            }
            if seen.contains(&section) {
                return config(format!("section [{}] appears more than once", section.unwrap_or("")));
            }
            seen.push(section);
        }
        let section = |name: &str| ini.section(Some(name));
        let get = |sec: &str, key: &str| section(sec).and_then(|s| s.get(key)).map(str::trim).map(str::to_owned);
        let require = |sec: &str, key: &str| get(sec, key).ok_or_else(|| Error::Config(format!("missing [{sec}] {key}")));
        let check_keys = |sec: &str, allowed: &[&str]| -> Result<()> {
            if let Some(s) = section(sec) {
                if let Some((k, _)) = s.iter().find(|(k, _)| !allowed.contains(k)) {
                    return config(format!("unknown key `{k}` in [{sec}]"));
                }
            }
            Ok(())
        };
        check_keys("experiment", &["task", "seed", "trials", "output", "timing"])?;
        check_keys("grid", &["n", "eps", "d"])?;
        check_keys("estimator", &["variants", "metrics", "k", "beta", "radius", "lambda"])?;

        let task: Task = require("experiment", "task")?.parse()?;
        let parse_num = |sec: &str, key: &str, raw: String| -> Result<f64> {
            raw.parse().map_err(|_| Error::Config(format!("[{sec}] {key}: `{raw}` is not a number")))
        };
        let seed = match get("experiment", "seed") {
            Some(s) => s.parse().map_err(|_| Error::Config(format!("[experiment] seed: `{s}` is not a u64")))?,
            None => 0,
        };
        let trials = require("experiment", "trials")?;
        let trials = trials.parse().map_err(|_| Error::Config(format!("[experiment] trials: `{trials}` is not a count")))?;
        let timing = match get("experiment", "timing").as_deref() {
            None | Some("false") => false,
            Some("true") => true,
            Some(other) => return config(format!("[experiment] timing: `{other}` is not a boolean")),
        };

        let n_grid = parse_count_grid(&require("grid", "n")?)?;
        let eps_grid = parse_real_grid(&require("grid", "eps")?)?;
        let d_grid = match get("grid", "d") {
            Some(d) => parse_count_grid(&d)?,
            None => vec![1],
        };

        let dist_name = get("distribution", "name").unwrap_or_else(|| task.default_distribution().to_owned());
        let dist_get = |key: &str| get("distribution", key);
        let distribution = DataLaw::from_params(&dist_name, &dist_get)?;

        let list = |raw: Option<String>| -> Vec<String> {
            raw.map(|r| r.split(',').map(|s| s.trim().to_owned()).filter(|s| !s.is_empty()).collect()).unwrap_or_default()
        };
        let variants = match get("estimator", "variants") {
            Some(raw) => list(Some(raw)).iter().map(|s| s.parse()).collect::<Result<Vec<Variant>>>()?,
            None => task.variants().to_vec(),
        };
        let metrics = match get("estimator", "metrics") {
            Some(raw) => list(Some(raw)).iter().map(|s| s.parse()).collect::<Result<Vec<Metric>>>()?,
            None => vec![Metric::Mse],
        };
        let mut params = EstimatorParams::default();
        if let Some(k) = get("estimator", "k") {
            params.moment = parse_num("estimator", "k", k)?;
        }
        if let Some(b) = get("estimator", "beta") {
            params.beta = parse_num("estimator", "beta", b)?;
        }
        if let Some(r) = get("estimator", "radius") {
            params.radius = parse_num("estimator", "radius", r)?;
        }
        if let Some(l) = get("estimator", "lambda") {
            params.lambda = Some(parse_num("estimator", "lambda", l)?);
        }

        let mut fit_bands = BTreeMap::new();
        if let Some(s) = section("fit") {
            for (key, value) in s.iter() {
                let (v, m) = match key.split_once('.') {
                    Some((v, m)) => (v.parse()?, m.parse()?),
                    None => (key.parse()?, metrics[0]),
                };
                fit_bands.insert((v, m), parse_band(value)?);
            }
        }

        let cfg = Self {
            task,
            n_grid,
            eps_grid,
            d_grid,
            trials,
            distribution,
            variants,
            metrics,
            params,
            seed,
            output: get("experiment", "output").map(PathBuf::from),
            timing,
            fit_bands,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_band(raw: &str) -> Result<(f64, f64)> {
    let (lo, hi) = raw.split_once("..").ok_or_else(|| Error::Config(format!("band `{raw}` is not `lo..hi`")))?;
    let p = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Config(format!("band `{raw}` is not numeric")));
    let (lo, hi) = (p(lo)?, p(hi)?);
    if lo > hi {
        return config(format!("band `{raw}` is empty"));
    }
    Ok((lo, hi))
}

/// One grid item: a number, `b^a`, or `b^a..b^c[:step]` (exponent step,
/// default 1). Values are returned unrounded.
fn parse_grid_item(item: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("grid item `{item}` is not a number, power or power range"));
    let power = |s: &str| -> Result<(f64, f64)> {
        let (b, e) = s.trim().split_once('^').ok_or_else(bad)?;
        Ok((b.trim().parse().map_err(|_| bad())?, e.trim().parse().map_err(|_| bad())?))
    };
    if let Some((lo, rest)) = item.split_once("..") {
        let (hi, step) = match rest.split_once(':') {
            Some((h, s)) => (h, s.trim().parse::<f64>().map_err(|_| bad())?),
            None => (rest, 1.0),
        };
        let ((b1, e1), (b2, e2)) = (power(lo)?, power(hi)?);
        if b1 != b2 || !(step > 0.0) || e2 < e1 {
            return Err(bad());
        }
        let count = ((e2 - e1) / step + 1e-9).floor() as usize;
        return Ok((0..=count).map(|i| b1.powf(e1 + i as f64 * step)).collect());
    }
    if item.contains('^') {
        let (b, e) = power(item)?;
        return Ok(vec![b.powf(e)]);
    }
    match item.trim() {
        "inf" => Ok(vec![f64::INFINITY]),
        s => Ok(vec![s.parse().map_err(|_| bad())?]),
    }
}

fn parse_grid(raw: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        out.extend(parse_grid_item(item)?);
    }
    if out.is_empty() {
        return config("empty grid");
    }
    Ok(out)
}

/// Grid of counts; fractional powers are rounded to the nearest integer.
pub fn parse_count_grid(raw: &str) -> Result<Vec<usize>> {
    parse_grid(raw)?
        .into_iter()
        .map(|v| {
            if v.is_finite() && (0.5..1e15).contains(&v) {
                Ok(v.round() as usize)
            } else {
                config(format!("grid value {v} is not a positive count"))
            }
        })
        .collect()
}

pub fn parse_real_grid(raw: &str) -> Result<Vec<f64>> {
    parse_grid(raw)
}

/// Named configurations behind `bench --preset`.
pub const PRESETS: &[(&str, &str)] = &[
    (
        "paper-prop1",
        "[experiment]\ntask = mean1d\nseed = 101\ntrials = 100\n\
         [grid]\nn = 2^10..2^20\neps = 0.5\nd = 1\n\
         [distribution]\nname = moment-two-point\ndelta = 0.25\nk = 2\n\
         [estimator]\nvariants = private, nonprivate\nk = 2\n\
         [fit]\nprivate = -0.6..-0.4\nnonprivate = -1.1..-0.9\n",
    ),
    (
        "laplace-gap",
        "[experiment]\ntask = mean-l2\nseed = 102\ntrials = 30\n\
         [grid]\nn = 2^16\neps = 1\nd = 10, 50\n\
         [distribution]\nname = sphere-mixture\nmass = 0.5\n\
         [estimator]\nvariants = strategy-a, laplace\n",
    ),
    (
        "multinomial",
        "[experiment]\ntask = multinomial\nseed = 103\ntrials = 30\n\
         [grid]\nn = 2^12..2^18\neps = 1\nd = 10\n\
         [distribution]\nname = geometric\nratio = 0.8\n\
         [estimator]\nvariants = rr, laplace\nmetrics = mse, l1\n\
         [fit]\nrr.l1 = -0.6..-0.4\nlaplace.l1 = -0.6..-0.4\n",
    ),
    (
        "histogram",
        "[experiment]\ntask = histogram\nseed = 104\ntrials = 30\n\
         [grid]\nn = 2^10..2^20\neps = 1\nd = 1\n\
         [distribution]\nname = sloped\nslope = 1\n\
         [estimator]\nvariants = private\n\
         [fit]\nprivate = -0.6..-0.4\n",
    ),
    (
        "orthoseries",
        "[experiment]\ntask = orthoseries\nseed = 105\ntrials = 100\n\
         [grid]\nn = 2^10..2^20:0.5\neps = 1\nd = 1\n\
         [distribution]\nname = sobolev\nbeta = 2\n\
         [estimator]\nvariants = hypercube, laplace\nbeta = 2\n\
         [fit]\nhypercube = -0.77..-0.57\n",
    ),
    (
        "regression",
        "[experiment]\ntask = regression\nseed = 106\ntrials = 200\n\
         [grid]\nn = 2^12..2^18\neps = 1\nd = 4\n\
         [distribution]\nname = regression\ndesign = orthogonal\nsigma = 1\n\
         [estimator]\nvariants = private, nonprivate\n",
    ),
    (
        "smoke",
        "[experiment]\ntask = mean1d\nseed = 1\ntrials = 30\n\
         [grid]\nn = 2^8..2^12\neps = 0.5, 1\nd = 1\n\
         [estimator]\nvariants = private, nonprivate\n",
    ),
];

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        Error::Config(format!(
            "unknown preset `{name}` (expected one of: {})",
            PRESETS.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
        ))
    })?;
    ExperimentConfig::from_ini_str(text)
}
