//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs as a plain binary (`harness = false`).

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use ldp_lab::estimators::{project_simplex, regression_fixed_design, RegressionProblem};
use ldp_lab::experiments::{fit_rate, preset, run_sweep, Metric, ResultRow, Variant};
use ldp_lab::lab::{run_verification_sweep, SweepConfig, TheoremId};
use ldp_lab::mechanisms::{
    LaplaceMechanism, LocalMechanism, RandomizedResponse, StrategyA, StrategyB, TruncatedLaplace,
};
use ldp_lab::{sample_uniform_sphere, RngStream};

type PairCheck = (Box<dyn LocalMechanism>, Vec<f64>, Vec<f64>);
type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

fn row(rows: &[ResultRow], variant: Variant, metric: Metric, n: usize, d: usize) -> &ResultRow {
    rows.iter()
        .find(|r| r.variant == variant && r.metric == metric && r.n == n && r.d == d)
        .expect("missing sweep row")
}

fn theorem_sweeps() -> Outcome {
    let start = Instant::now();
    let report = run_verification_sweep(&SweepConfig {
        theorem: TheoremId::One,
        instances: 10_000,
        eps: vec![0.1, 0.5, 1.0, 2.0],
        seed: 1,
    })
    .expect("theorem 1 sweep");
    let elapsed = start.elapsed();
    let max_ratio = report.per_eps.iter().map(|s| s.max_ratio).fold(0.0, f64::max);
    outcome(
        report.violations() == 0 && within(elapsed, 120),
        format!(
            "{} instances, {} violations, max lhs/rhs {max_ratio:.4}, {:.1}s",
            report.per_eps.iter().map(|s| s.instances).sum::<usize>(),
            report.violations(),
            elapsed.as_secs_f64()
        ),
    )
}

fn family_sweeps() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for theorem in [TheoremId::Two, TheoremId::Three] {
        let report = run_verification_sweep(&SweepConfig {
            theorem,
            instances: 1_000,
            eps: vec![0.1, 0.5, 1.0, 2.0],
            seed: 2,
        })
        .expect("family sweep");
        let checks: usize = report.per_eps.iter().map(|s| s.oracle_checks).sum();
        let instances: usize = report.per_eps.iter().map(|s| s.instances).sum();
        let gap = report.per_eps.iter().map(|s| s.max_oracle_gap).fold(0.0, f64::max);
        ok &= report.passed() && checks >= instances;
        parts.push(format!(
            "theorem {theorem}: {instances} families, {} violations, {} oracle mismatches in {checks} checks (max gap {gap:.1e})",
            report.violations(),
            report.oracle_mismatches()
        ));
    }
    let elapsed = start.elapsed();
    outcome(ok && within(elapsed, 300), format!("{}; {:.1}s", parts.join("; "), elapsed.as_secs_f64()))
}

fn random_in_ball<R: Rng>(d: usize, rng: &mut R) -> Vec<f64> {
    let dir = sample_uniform_sphere(d, rng).unwrap();
    let r: f64 = rng.gen::<f64>().powf(1.0 / d as f64);
    dir.into_iter().map(|x| x * r).collect()
}

fn random_in_box<R: Rng>(d: usize, rng: &mut R) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

fn one_hot<R: Rng>(d: usize, rng: &mut R) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[rng.gen_range(0..d)] = 1.0;
    v
}

fn privacy_certificates() -> Outcome {
    let mut rng = RngStream::new(3, 0);
    let mut worst: f64 = 0.0;
    let mut ok = true;
    let mut rr_exact = true;
    for eps in [0.5f64, 1.0] {
        let cap = eps.exp() + 1e-9;
        for _ in 0..1_000 {
            let d = rng.gen_range(1..=8);
            let checks: [PairCheck; 5] = [
                (Box::new(StrategyA::new(1.0, d, eps).unwrap()), random_in_ball(d, &mut rng), random_in_ball(d, &mut rng)),
                (Box::new(StrategyB::new(1.0, d, eps).unwrap()), random_in_box(d, &mut rng), random_in_box(d, &mut rng)),
                (Box::new(RandomizedResponse::new(d, eps).unwrap()), one_hot(d, &mut rng), one_hot(d, &mut rng)),
                (
                    Box::new(LaplaceMechanism::for_sensitivity(d, 2.0 * d as f64, eps).unwrap()),
                    random_in_box(d, &mut rng),
                    random_in_box(d, &mut rng),
                ),
                (
                    Box::new(TruncatedLaplace::new(1.5, eps).unwrap()),
                    vec![rng.gen_range(-10.0..10.0)],
                    vec![rng.gen_range(-10.0..10.0)],
                ),
            ];
            for (mech, x, y) in &checks {
                let ratio = mech.privacy_ratio(x, y).unwrap();
                let ratio_back = mech.privacy_ratio(y, x).unwrap();
                worst = worst.max(ratio.ln() / eps).max(ratio_back.ln() / eps);
                ok &= ratio <= cap && ratio_back <= cap && ratio >= 1.0 - 1e-12;
            }
            if d >= 2 {
                let rr = RandomizedResponse::new(d, eps).unwrap();
                let i = rng.gen_range(0..d);
                let j = (i + rng.gen_range(1..d)) % d;
                let (mut x, mut y) = (vec![0.0; d], vec![0.0; d]);
                x[i] = 1.0;
                y[j] = 1.0;
                rr_exact &= (rr.privacy_ratio(&x, &y).unwrap() - eps.exp()).abs() <= 1e-12 * eps.exp();
            }
        }
    }
    outcome(
        ok && rr_exact,
        format!("10000 pairs, max log-ratio/eps {worst:.12}, randomized response attains e^eps: {rr_exact}"),
    )
}

/// `‖mean − v‖₂ ≤ 3 SE` with `SE² = Σ_j Var(Z_j)/N`, the root expected
/// squared error of the Monte-Carlo mean.
fn unbiased_within_3se(draw: &mut dyn FnMut(&mut [f64]), v: &[f64], draws: usize) -> (bool, f64) {
    let d = v.len();
    let mut z = vec![0.0; d];
    let (mut sum, mut sq) = (vec![0.0; d], vec![0.0; d]);
    for _ in 0..draws {
        draw(&mut z);
        for j in 0..d {
            sum[j] += z[j];
            sq[j] += z[j] * z[j];
        }
    }
    let nf = draws as f64;
    let mut err2 = 0.0;
    let mut var = 0.0;
    for j in 0..d {
        let m = sum[j] / nf;
        err2 += (m - v[j]).powi(2);
        var += (sq[j] / nf - m * m) * nf / (nf - 1.0);
    }
    let se = (var / nf).sqrt();
    (err2.sqrt() <= 3.0 * se, err2.sqrt() / se)
}

fn unbiasedness() -> Outcome {
    let start = Instant::now();
    let draws = 1_000_000;
    let eps = 1.0;
    let mut rng = RngStream::new(5, 0);
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for d in [1, 2, 3, 8] {
        let mech = StrategyA::new(1.0, d, eps).unwrap();
        for _ in 0..5 {
            let v = random_in_ball(d, &mut rng);
            let mut mrng = RngStream::new(rng.gen(), 1);
            let (pass, z) = unbiased_within_3se(&mut |out| mech.privatize_into(&v, &mut mrng, out).unwrap(), &v, draws);
            ok &= pass;
            worst = worst.max(z);
        }
    }
    for d in 1..=6 {
        let mech = StrategyB::new(1.0, d, eps).unwrap();
        for _ in 0..5 {
            let v = random_in_box(d, &mut rng);
            let mut mrng = RngStream::new(rng.gen(), 2);
            let (pass, z) = unbiased_within_3se(&mut |out| mech.privatize_into(&v, &mut mrng, out).unwrap(), &v, draws);
            ok &= pass;
            worst = worst.max(z);
        }
    }
    let elapsed = start.elapsed();
    outcome(
        ok && within(elapsed, 180),
        format!("50 vectors x 1e6 draws, worst error {worst:.2} SE, {:.1}s", elapsed.as_secs_f64()),
    )
}

fn slope_in(rows: &[ResultRow], variant: Variant, metric: Metric, eps: f64, d: usize, lo: f64, hi: f64) -> (bool, f64) {
    let fit = fit_rate(rows, variant, metric, eps, d).expect("rate fit");
    ((lo..=hi).contains(&fit.slope), fit.slope)
}

fn prop1_rate() -> Outcome {
    let start = Instant::now();
    let cfg = preset("paper-prop1").unwrap();
    let rows = run_sweep(&cfg).unwrap();
    let (p_ok, p) = slope_in(&rows, Variant::Private, Metric::Mse, 0.5, 1, -0.6, -0.4);
    let (n_ok, np) = slope_in(&rows, Variant::NonPrivate, Metric::Mse, 0.5, 1, -1.1, -0.9);
    let elapsed = start.elapsed();
    outcome(
        p_ok && n_ok && within(elapsed, 300),
        format!("private slope {p:.4}, non-private slope {np:.4}, {:.1}s", elapsed.as_secs_f64()),
    )
}

fn laplace_gap() -> Outcome {
    let start = Instant::now();
    let cfg = preset("laplace-gap").unwrap();
    let rows = run_sweep(&cfg).unwrap();
    let n = 1 << 16;
    let ratio = |d| {
        row(&rows, Variant::Laplace, Metric::Mse, n, d).mse_mean / row(&rows, Variant::StrategyA, Metric::Mse, n, d).mse_mean
    };
    let (r10, r50) = (ratio(10), ratio(50));
    let gap = r50 / r10;
    let elapsed = start.elapsed();
    outcome(
        (2.5..=10.0).contains(&gap) && within(elapsed, 180),
        format!("ratio d=10 {r10:.3}, d=50 {r50:.3}, ratio of ratios {gap:.3}, {:.1}s", elapsed.as_secs_f64()),
    )
}

fn multinomial() -> Outcome {
    let cfg = preset("multinomial").unwrap();
    let rows = run_sweep(&cfg).unwrap();
    let (d, eps) = (10, 1.0);
    let scaled = |v: Variant| -> Vec<f64> {
        cfg.n_grid
            .iter()
            .map(|&n| row(&rows, v, Metric::Mse, n, d).mse_mean * n as f64 * eps * eps / d as f64)
            .collect()
    };
    let spread = |xs: &[f64]| xs.iter().cloned().fold(0.0, f64::max) / xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let (rr, lap) = (scaled(Variant::RandomizedResponse), scaled(Variant::Laplace));
    let (s_rr, s_lap) = (spread(&rr), spread(&lap));
    let agree = rr.iter().zip(&lap).map(|(a, b)| (a / b).max(b / a)).fold(0.0, f64::max);
    let (l1_rr_ok, l1_rr) = slope_in(&rows, Variant::RandomizedResponse, Metric::L1, eps, d, -0.6, -0.4);
    let (l1_lap_ok, l1_lap) = slope_in(&rows, Variant::Laplace, Metric::L1, eps, d, -0.6, -0.4);
    outcome(
        s_rr <= 4.0 && s_lap <= 4.0 && agree <= 4.0 && l1_rr_ok && l1_lap_ok,
        format!(
            "MSE*n*eps^2/d spread rr {s_rr:.3}, laplace {s_lap:.3}; max variant ratio {agree:.3}; l1 slopes rr {l1_rr:.4}, laplace {l1_lap:.4}"
        ),
    )
}

fn histogram() -> Outcome {
    let cfg = preset("histogram").unwrap();
    let rows = run_sweep(&cfg).unwrap();
    let (ok, s) = slope_in(&rows, Variant::Private, Metric::Mse, 1.0, 1, -0.6, -0.4);
    outcome(ok, format!("ISE slope {s:.4}"))
}

fn orthoseries() -> Outcome {
    let cfg = preset("orthoseries").unwrap();
    let rows = run_sweep(&cfg).unwrap();
    let hyp = fit_rate(&rows, Variant::Hypercube, Metric::Mse, 1.0, 1).unwrap();
    let lap = fit_rate(&rows, Variant::Laplace, Metric::Mse, 1.0, 1).unwrap();
    let (t_hyp, t_lap) = (-2.0 / 3.0, -4.0 / 7.0);
    let ok = (-0.77..=-0.57).contains(&hyp.slope)
        && lap.slope - hyp.slope >= 0.05
        && !hyp.ci_contains(t_lap)
        && !lap.ci_contains(t_hyp);
    outcome(
        ok,
        format!(
            "hypercube slope {:.4} (CI [{:.4}, {:.4}]), laplace slope {:.4} (CI [{:.4}, {:.4}]), gap {:.4}",
            hyp.slope,
            hyp.ci95.0,
            hyp.ci95.1,
            lap.slope,
            lap.ci95.0,
            lap.ci95.1,
            lap.slope - hyp.slope
        ),
    )
}

fn regression() -> Outcome {
    let cfg = preset("regression").unwrap();
    let rows = run_sweep(&cfg).unwrap();
    let (d, eps, sigma) = (4, 1.0, 1.0);
    let scaled: Vec<f64> = cfg
        .n_grid
        .iter()
        .map(|&n| row(&rows, Variant::Private, Metric::Mse, n, d).mse_mean * n as f64 * eps * eps / (sigma * sigma * d as f64))
        .collect();
    let band_ok = scaled.iter().all(|s| (0.2..=10.0).contains(s));

    // Noiseless responses through the eps = inf path.
    let mut rng = RngStream::new(10, 0);
    let mut worst: f64 = 0.0;
    for n in [64, 1024, 4096] {
        let x = DMatrix::from_fn(n, d, |i, j| if (i >> j) & 1 == 1 { -1.0 } else { 1.0 });
        let theta: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let y = (&x * DVector::from_vec(theta.clone())).as_slice().to_vec();
        let problem = RegressionProblem::new(x, y, sigma, Some(theta.clone())).unwrap();
        let est = regression_fixed_design(&problem, f64::INFINITY, &mut rng).unwrap();
        worst = est.iter().zip(&theta).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
    }
    let scaled_txt: Vec<String> = scaled.iter().map(|s| format!("{s:.2}")).collect();
    outcome(
        band_ok && worst <= 1e-9,
        format!("MSE*n*eps^2/(sigma^2 d) = [{}], noiseless error {worst:.1e}", scaled_txt.join(", ")),
    )
}

fn objective(v: &[f64], p: &[f64]) -> f64 {
    v.iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum()
}

fn simplex_projection() -> Outcome {
    let mut rng = RngStream::new(11, 0);
    let steps = 1000;
    let h = 1.0 / steps as f64;
    let mut worst_gap: f64 = 0.0;
    let mut beaten = false;
    for _ in 0..100 {
        let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..2.0)).collect();
        let p = project_simplex(&v, 1.0).unwrap();
        let exact = objective(&v, &p);
        let mut best = f64::INFINITY;
        for i in 0..=steps {
            for j in 0..=steps - i {
                let g = [i as f64 * h, j as f64 * h, (steps - i - j) as f64 * h];
                best = best.min(objective(&v, &g));
            }
        }
        beaten |= best < exact - 1e-12;
        worst_gap = worst_gap.max(best - exact);
    }
    let mut worst_idem: f64 = 0.0;
    let mut worst_expansion: f64 = 0.0;
    for _ in 0..10_000 {
        let d = rng.gen_range(1..=10);
        let a: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let b: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let (pa, pb) = (project_simplex(&a, 1.0).unwrap(), project_simplex(&b, 1.0).unwrap());
        let again = project_simplex(&pa, 1.0).unwrap();
        worst_idem = pa.iter().zip(&again).map(|(x, y)| (x - y).abs()).fold(worst_idem, f64::max);
        worst_expansion = worst_expansion.max(objective(&pa, &pb).sqrt() - objective(&a, &b).sqrt());
    }
    outcome(
        !beaten && worst_gap <= 1e-6 && worst_idem <= 1e-12 && worst_expansion <= 1e-12,
        format!(
            "grid objective gap {worst_gap:.2e}, grid never better: {}, idempotence {worst_idem:.1e}, expansion {worst_expansion:.1e}",
            !beaten
        ),
    )
}

fn bench_csv(dir: &Path, tag: &str, threads: &str) -> Vec<u8> {
    let out = dir.join(format!("{tag}.csv"));
    let status = Command::new(env!("CARGO_BIN_EXE_ldp-lab"))
        .args(["bench", "--preset", "multinomial", "--out"])
        .arg(&out)
        .env("LDP_LAB_THREADS", threads)
        .stdout(std::process::Stdio::null())
        .status()
        .expect("run ldp-lab");
    assert!(status.success(), "bench exited with {status}");
    std::fs::read(out).unwrap()
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let a = bench_csv(dir.path(), "a", "1");
    let b = bench_csv(dir.path(), "b", "1");
    let c = bench_csv(dir.path(), "c", "8");
    let d = bench_csv(dir.path(), "d", "8");
    outcome(
        !a.is_empty() && a == b && a == c && c == d,
        format!("{} bytes; repeat identical: {}, threads 1 vs 8 identical: {}", a.len(), a == b && c == d, a == c),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("theorem 1 sweep", theorem_sweeps),
        ("theorem 2/3 sweeps with ascent oracle", family_sweeps),
        ("privacy certificates", privacy_certificates),
        ("unbiasedness oracles", unbiasedness),
        ("one-dimensional mean rate", prop1_rate),
        ("laplace gap in dimension", laplace_gap),
        ("multinomial scaling", multinomial),
        ("histogram rate", histogram),
        ("series vs laplace series rates", orthoseries),
        ("fixed-design regression", regression),
        ("simplex projection", simplex_projection),
        ("bench determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str()) || *f == id.to_string()) {
            continue;
        }
        let start = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        let verdict = if result.passed { "PASS" } else { "FAIL" };
        failed += usize::from(!result.passed);
        println!("criterion {id:>2} {verdict} {name}: {} [{:.1}s]", result.detail, start.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
