//! Acceptance suite. Prints one `[PASS]` or `[FAIL]` line per criterion and
//! exits non-zero if any criterion fails.
//!
//! All sizes, seeds and tolerances are pinned below.

#[path = "../../core/tests/support/cascade_oracle.rs"]
mod cascade_oracle;
mod common;
#[path = "../../core/tests/support/stats.rs"]
mod stats;

use std::collections::HashMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use cfvp_core::experiments::{
    build_realization, estimate_lambda_c, isotonic_fit, run_baseline_realization, run_realization,
    stage_means, PointParams, RealizationSeeds, Summary, SweepPoint,
};
use cfvp_core::rng::rng_from_seed;
use cfvp_core::{run_cfvp, IsolationStrategy, RunResult, StrategyKind};
use rand::Rng;
use rayon::prelude::*;

const MASTER_SEED: u64 = 1;
const N: usize = 2000;
const REALIZATIONS: usize = 100;
const LAMBDA_STEP: f64 = 0.02;
const EPSILON: f64 = 0.005;
const SWEEP_LAMBDA: f64 = 0.5;
const SIGMA: f64 = 0.3;
/// Standard errors allowed by the infection gap, the isotonic residuals in
/// q and the overlap across <k_B>.
const SE_GAP: f64 = 3.0;
/// Standard errors a degree-based deficit may reach against deterministic
/// isolation.
const SE_DEFICIT: f64 = 2.0;
/// Largest λ_c spread across ⟨k_B⟩ in grid steps.
const K_B_MAX_STEPS: f64 = 2.0;

type Outcome = Result<String, String>;

fn lambda_grid() -> Vec<f64> {
    (0..=50).map(|i| i as f64 / 50.0).collect()
}

fn q_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

fn params(k_a: usize, k_b: usize, lambda: f64, strategy: IsolationStrategy) -> PointParams {
    PointParams { n: N, k_a, k_b, lambda, strategy }
}

/// Runs every realization of every point in parallel; results come back
/// grouped by point in realization order, without stage records.
fn run_points(points: &[PointParams], reps: usize) -> Vec<Vec<RunResult>> {
    let items: Vec<(usize, usize)> = (0..points.len()).flat_map(|p| (0..reps).map(move |r| (p, r))).collect();
    let runs: Vec<RunResult> = items
        .par_iter()
        .map(|&(p, r)| {
            let mut run = run_realization(&points[p], MASTER_SEED, r).expect("run");
            run.stages = Vec::new();
            run
        })
        .collect();
    runs.chunks(reps).map(<[RunResult]>::to_vec).collect()
}

/// Points shared between criteria are simulated once.
#[derive(Default)]
struct Cache {
    points: HashMap<String, Vec<RunResult>>,
}

fn key(p: &PointParams) -> String {
    format!("{}/{}/{}/{}/{:?}/{}/{}", p.n, p.k_a, p.k_b, p.lambda, p.strategy.kind, p.strategy.q, p.strategy.sigma)
}

impl Cache {
    fn get(&mut self, points: &[PointParams]) -> Vec<SweepPoint> {
        let missing: Vec<PointParams> = points.iter().filter(|p| !self.points.contains_key(&key(p))).copied().collect();
        let mut unique: Vec<PointParams> = Vec::new();
        for p in missing {
            if !unique.iter().any(|u| key(u) == key(&p)) {
                unique.push(p);
            }
        }
        for (p, runs) in unique.iter().zip(run_points(&unique, REALIZATIONS)) {
            self.points.insert(key(p), runs);
        }
        points.iter().map(|p| SweepPoint::aggregate(*p, &self.points[&key(p)])).collect()
    }

    fn runs(&self, p: &PointParams) -> &[RunResult] {
        &self.points[&key(p)]
    }
}

fn lambda_c_curve(cache: &mut Cache, k_a: usize, k_b: usize) -> Option<f64> {
    let pts: Vec<PointParams> =
        lambda_grid().into_iter().map(|l| params(k_a, k_b, l, IsolationStrategy::NONE)).collect();
    estimate_lambda_c(&cache.get(&pts), EPSILON).expect("sorted grid")
}

fn fmt_lc(l: Option<f64>) -> String {
    l.map_or_else(|| "not reached".into(), |v| format!("{v:.2}"))
}

fn cascade_oracle() -> Outcome {
    let mut rng = rng_from_seed(MASTER_SEED);
    let mut mismatches = Vec::new();
    for case in 0..1000 {
        if let Err(e) = cascade_oracle::check_one(&mut rng, 3) {
            mismatches.push(format!("case {case}: {e}"));
        }
    }
    if mismatches.is_empty() {
        Ok("1000 random systems (n <= 20, 3 seed sets each), 0 mismatches".into())
    } else {
        Err(format!("{} mismatches, first: {}", mismatches.len(), mismatches[0]))
    }
}

fn reference_trace() -> Outcome {
    let (run, sys, script) = common::reference_run();
    let produced = common::data_rows(&cfvp::output::trace_table(&run.stages).render("run", &cfvp::SweepConfig::default()));
    let committed = std::fs::read_to_string(common::reference_dir().join("trace.csv")).map_err(|e| e.to_string())?;
    if produced != common::data_rows(&committed) {
        return Err(format!("trace differs from trace.csv:\n{}", produced.join("\n")));
    }
    if script.remaining() != 0 {
        return Err(format!("{} scripted attempts unused", script.remaining()));
    }
    if run.stages.len() != 3 || run.g_final != 0.0 || sys.giant_fraction_b() != Ok(0.0) {
        return Err(format!("{} stages, g_final {}", run.stages.len(), run.g_final));
    }
    Ok("3 stages, complete collapse, matches committed trace.csv".into())
}

fn partner_symmetry() -> Outcome {
    let mut rng = rng_from_seed(MASTER_SEED ^ 0x5);
    let cases: Vec<(PointParams, usize)> = (0..10_000)
        .map(|r| {
            let n = rng.random_range(20..400usize);
            let k_a = 2 * rng.random_range(1..=5usize);
            let k_b = 2 * rng.random_range(1..=5usize);
            let lambda = rng.random_range(0.0..=1.0);
            let kind = [StrategyKind::None, StrategyKind::Deterministic, StrategyKind::DegreeBased][r % 3];
            let strategy = IsolationStrategy::new(kind, rng.random_range(0.0..=1.0), SIGMA).unwrap();
            (PointParams { n, k_a, k_b, lambda, strategy }, r)
        })
        .collect();
    let bad: Vec<String> = cases
        .par_iter()
        .filter_map(|(p, r)| {
            let seeds = RealizationSeeds::derive(MASTER_SEED, p.n, p.k_a, p.k_b, *r);
            let mut sys = build_realization(p, &seeds).unwrap();
            let run = run_cfvp(&mut sys, p.lambda, &p.strategy, seeds.dynamics).unwrap();
            let (a, b) = (sys.giant_fraction().unwrap(), sys.giant_fraction_b().unwrap());
            (a != b || a != run.g_final).then(|| format!("{p:?} r={r}: A {a} B {b}"))
        })
        .collect();
    if bad.is_empty() {
        Ok("10000 runs, g_final(A) == g_final(B) in all".into())
    } else {
        Err(format!("{} exceptions, first: {}", bad.len(), bad[0]))
    }
}

fn peak_of(series: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in series.iter().enumerate() {
        if v > series[best] {
            best = i;
        }
    }
    best + 1
}

fn coupled_vs_single_layer() -> Outcome {
    let mut lines = Vec::new();
    let mut failed = false;
    for k in [4, 6, 8, 10] {
        let p = params(k, k, SWEEP_LAMBDA, IsolationStrategy::NONE);
        let (coupled, single): (Vec<RunResult>, Vec<RunResult>) = (0..REALIZATIONS)
            .into_par_iter()
            .map(|r| {
                (
                    run_realization(&p, MASTER_SEED, r).unwrap(),
                    run_baseline_realization(&p, MASTER_SEED, r).unwrap(),
                )
            })
            .unzip();
        // Paired on the same layer A and random stream.
        let diff = Summary::of(
            coupled.iter().zip(&single).map(|(c, s)| s.total_infected as f64 - c.total_infected as f64),
        );
        let gap_ok = diff.mean > SE_GAP * diff.std_error();
        let peak_c = peak_of(&stage_means(&coupled, |s| s.f_i_current, |_| 0.0));
        let peak_s = peak_of(&stage_means(&single, |s| s.f_i_current, |_| 0.0));
        let peak_ok = k < 6 || peak_c <= peak_s;
        failed |= !(gap_ok && peak_ok);
        lines.push(format!(
            "<k>={k}: single-minus-coupled infections {:.1} (se {:.1}), peak stage {peak_c} vs {peak_s}{}",
            diff.mean,
            diff.std_error(),
            if gap_ok && peak_ok { "" } else { " <- violated" }
        ));
    }
    let text = lines.join("; ");
    if failed {
        Err(text)
    } else {
        Ok(text)
    }
}

fn threshold_falls_with_k_a(cache: &mut Cache) -> Outcome {
    let ks = [4, 8, 16];
    let lcs: Vec<Option<f64>> = ks.iter().map(|&k| lambda_c_curve(cache, k, 8)).collect();
    let text = ks.iter().zip(&lcs).map(|(k, l)| format!("<k_A>={k}: {}", fmt_lc(*l))).collect::<Vec<_>>().join(", ");
    let ok = lcs.windows(2).all(|w| match (w[0], w[1]) {
        (Some(a), Some(b)) => a - b >= LAMBDA_STEP - 1e-9,
        _ => false,
    });
    if ok {
        Ok(text)
    } else {
        Err(text)
    }
}

fn threshold_ignores_k_b(cache: &mut Cache) -> Outcome {
    let ks = [4, 6, 8, 10, 16];
    let lcs: Vec<Option<f64>> = ks.iter().map(|&k| lambda_c_curve(cache, 8, k)).collect();
    let text = ks.iter().zip(&lcs).map(|(k, l)| format!("<k_B>={k}: {}", fmt_lc(*l))).collect::<Vec<_>>().join(", ");
    let vals: Option<Vec<f64>> = lcs.iter().copied().collect();
    match vals {
        Some(v) => {
            let spread = v.iter().copied().fold(f64::MIN, f64::max) - v.iter().copied().fold(f64::MAX, f64::min);
            let text = format!("{text}; spread {spread:.2}");
            if spread <= K_B_MAX_STEPS * LAMBDA_STEP + 1e-9 {
                Ok(text)
            } else {
                Err(text)
            }
        }
        None => Err(text),
    }
}

fn q_points(k_a: usize, k_b: usize, kind: StrategyKind) -> Vec<PointParams> {
    q_grid()
        .into_iter()
        .map(|q| params(k_a, k_b, SWEEP_LAMBDA, IsolationStrategy::new(kind, q, SIGMA).unwrap()))
        .collect()
}

/// Largest isotonic residual relative to the largest standard error of
/// the points pooled with it.
fn isotonic_violation(points: &[SweepPoint]) -> Option<String> {
    let means: Vec<f64> = points.iter().map(|p| p.mean_g).collect();
    let fit = isotonic_fit(&means, &vec![1.0; means.len()], true);
    let mut i = 0;
    while i < fit.len() {
        let j = (i..fit.len()).take_while(|&j| fit[j] == fit[i]).last().unwrap();
        let se = points[i..=j].iter().map(SweepPoint::std_error).fold(0.0, f64::max);
        for t in i..=j {
            let resid = (means[t] - fit[t]).abs();
            if resid > SE_GAP * se {
                return Some(format!("q={} residual {resid:.4} > {SE_GAP} x {se:.4}", points[t].params.strategy.q));
            }
        }
        i = j + 1;
    }
    None
}

fn isolation_raises_g(cache: &mut Cache) -> Outcome {
    let mut notes = Vec::new();
    let mut failures = Vec::new();
    for k_a in [4, 6, 8, 10, 16] {
        let det_pts = q_points(k_a, 8, StrategyKind::Deterministic);
        let deg_pts = q_points(k_a, 8, StrategyKind::DegreeBased);
        let det = cache.get(&det_pts);
        let deg = cache.get(&deg_pts);
        for (name, curve) in [("deterministic", &det), ("degree", &deg)] {
            if let Some(v) = isotonic_violation(curve) {
                failures.push(format!("<k_A>={k_a} {name}: {v}"));
            }
        }
        let mut positive = 0;
        let mut gaps = Vec::new();
        for q in [0.2, 0.4, 0.6] {
            let i = det_pts.iter().position(|p| p.strategy.q == q).unwrap();
            let d = Summary::of(
                cache.runs(&deg_pts[i]).iter().zip(cache.runs(&det_pts[i])).map(|(a, b)| a.g_final - b.g_final),
            );
            if d.mean < -SE_DEFICIT * d.std_error() {
                failures.push(format!("<k_A>={k_a} q={q}: degree-based behind by {:.4} (se {:.4})", -d.mean, d.std_error()));
            }
            if d.mean > 0.0 {
                positive += 1;
            }
            gaps.push(format!("{:+.3}", d.mean));
        }
        if positive < 2 {
            failures.push(format!("<k_A>={k_a}: positive gap at only {positive} of 3 q values"));
        }
        notes.push(format!("<k_A>={k_a} gaps {}", gaps.join("/")));
    }
    if failures.is_empty() {
        Ok(format!("isotonic in q for 10 curves; degree minus deterministic at q=0.2/0.4/0.6: {}", notes.join(", ")))
    } else {
        Err(failures.join("; "))
    }
}

fn k_b_curves_overlap(cache: &mut Cache) -> Outcome {
    let mut worst = (0.0f64, String::new());
    let mut failures = Vec::new();
    for kind in [StrategyKind::Deterministic, StrategyKind::DegreeBased] {
        let curves: Vec<Vec<SweepPoint>> = [4, 6, 8, 10, 16].iter().map(|&k_b| cache.get(&q_points(8, k_b, kind))).collect();
        for qi in 0..q_grid().len() {
            for a in 0..curves.len() {
                for b in a + 1..curves.len() {
                    let (pa, pb) = (&curves[a][qi], &curves[b][qi]);
                    let diff = (pa.mean_g - pb.mean_g).abs();
                    let tol = SE_GAP * (pa.std_error().powi(2) + pb.std_error().powi(2)).sqrt();
                    let ratio = if tol > 0.0 { diff / tol } else if diff == 0.0 { 0.0 } else { f64::INFINITY };
                    let label = format!("{} q={} <k_B>={} vs {}", kind.as_str(), pa.params.strategy.q, pa.params.k_b, pb.params.k_b);
                    if ratio > worst.0 {
                        worst = (ratio, label.clone());
                    }
                    if diff > tol {
                        failures.push(format!("{label}: |diff| {diff:.4} > {tol:.4}"));
                    }
                }
            }
        }
    }
    if failures.is_empty() {
        Ok(format!("all pairs within {SE_GAP} se; tightest {} at {:.2} of the tolerance", worst.1, worst.0))
    } else {
        Err(format!("{} pairs apart, first: {}", failures.len(), failures[0]))
    }
}

fn trivial_limits(cache: &mut Cache) -> Outcome {
    let mut notes = Vec::new();
    for k in [4, 8, 16] {
        let g = cache.get(&[params(k, 8, 0.0, IsolationStrategy::NONE)])[0];
        let min_g = cache.runs(&g.params).iter().map(|r| r.g_final).fold(1.0, f64::min);
        if g.mean_g < 1.0 - 10.0 / N as f64 {
            return Err(format!("<k_A>={k}, lambda=0: mean_g {}", g.mean_g));
        }
        notes.push(format!("lambda=0 <k_A>={k}: mean_g {:.5} (min {min_g:.4})", g.mean_g));
    }
    let strategy = IsolationStrategy::deterministic(1.0).unwrap();
    for lambda in [0.5, 1.0] {
        for k in [4, 8, 16] {
            let p = params(k, 8, lambda, strategy);
            cache.get(&[p]);
            if let Some(r) = cache.runs(&p).iter().find(|r| r.total_infected != 1) {
                return Err(format!("q=1, lambda={lambda}, <k_A>={k}: {} infected", r.total_infected));
            }
        }
    }
    notes.push("deterministic q=1: total_infected = 1 in 600 runs".into());
    Ok(notes.join("; "))
}

fn cli(dir: &Path, threads: &str, args: &[&str]) -> Result<(), String> {
    let out = Command::new(common::cfvp_bin())
        .args(args)
        .args(["--threads", threads, "--out", dir.to_str().unwrap(), "--seed", "77"])
        .env_remove("CFVP_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn determinism() -> Outcome {
    let commands: [&[&str]; 4] = [
        &["run", "--n", "2000", "--ka", "8", "--kb", "8", "--lambda", "0.5"],
        &["sweep-lambda", "--n", "500", "--ka", "4,8", "--kb", "8", "--lambda-grid", "0:1:0.1", "--realizations", "20"],
        &["sweep-q", "--n", "500", "--ka", "8", "--kb", "4,8", "--strategy", "degree", "--realizations", "20"],
        &["timeseries", "--n", "500", "--ka", "4,8", "--realizations", "20"],
    ];
    let dirs: Vec<tempfile::TempDir> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    for (dir, threads) in dirs.iter().zip(["1", "2", "4"]) {
        for args in commands {
            cli(dir.path(), threads, args)?;
        }
    }
    let files = ["trace.csv", "sweep_lambda.csv", "lambda_c.csv", "sweep_q.csv", "timeseries.csv"];
    for name in files {
        let first = std::fs::read(dirs[0].path().join(name)).map_err(|e| format!("{name}: {e}"))?;
        for d in &dirs[1..] {
            if std::fs::read(d.path().join(name)).map_err(|e| e.to_string())? != first {
                return Err(format!("{name} differs between thread counts"));
            }
        }
    }
    Ok(format!("{} CSVs byte-identical at 1, 2 and 4 threads", files.len()))
}

fn substage_statistics() -> Outcome {
    let mut notes = Vec::new();
    notes.push(stats::star_spread(10, 0.5, 10_000, MASTER_SEED)?);
    notes.push(stats::star_spread(25, 0.2, 10_000, MASTER_SEED + 1)?);
    notes.push(stats::degree_based_q(1_000, MASTER_SEED)?);
    Ok(notes.join("; "))
}

fn main() {
    let started = Instant::now();
    let mut cache = Cache::default();
    let mut criteria: Vec<(&str, Box<dyn FnMut(&mut Cache) -> Outcome>)> = vec![
        ("cascade oracle equivalence", Box::new(|_| cascade_oracle())),
        ("reference trace", Box::new(|_| reference_trace())),
        ("partner symmetry", Box::new(|_| partner_symmetry())),
        ("coupled vs single-layer infections", Box::new(|_| coupled_vs_single_layer())),
        ("lambda_c falls with <k_A>", Box::new(threshold_falls_with_k_a)),
        ("lambda_c flat in <k_B>", Box::new(threshold_ignores_k_b)),
        ("isolation raises G, degree-based wins", Box::new(isolation_raises_g)),
        ("q curves overlap across <k_B>", Box::new(k_b_curves_overlap)),
        ("trivial limits", Box::new(trivial_limits)),
        ("determinism", Box::new(|_| determinism())),
        ("statistical substage checks", Box::new(|_| substage_statistics())),
    ];
    let mut failed = 0;
    for (name, check) in criteria.iter_mut() {
        let t = Instant::now();
        let outcome = check(&mut cache);
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name} ({secs:.1}s): {detail}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.0}s (N={N}, {REALIZATIONS} realizations, master seed {MASTER_SEED})",
        criteria.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
