//! Parallel drivers for the sweeps.
//!
//! Work is flattened into `(grid point, realization)` items and run on a
//! rayon pool. Results come back in item order and are aggregated
//! sequentially, so the output does not depend on the thread count.

use cfvp_core::experiments::{
    estimate_lambda_c, run_baseline_realization, run_realization, stage_means, ExperimentError,
    PointParams, SweepPoint,
};
use cfvp_core::{IsolationStrategy, RunResult, StrategyKind};
use rayon::prelude::*;

use crate::config::SweepConfig;
use crate::error::{CliError, ConfigError};

/// Runs `f` inside a pool capped at `threads` workers (all cores if unset).
pub fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Simulation(e.to_string()))?;
    Ok(pool.install(f))
}

fn sim_error(e: ExperimentError) -> CliError {
    CliError::Simulation(e.to_string())
}

/// Runs every realization of every point and aggregates them in order.
///
/// Stage records are dropped as soon as each run finishes.
pub fn evaluate_points(
    points: &[PointParams],
    master: u64,
    realizations: usize,
    threads: Option<usize>,
) -> Result<Vec<SweepPoint>, CliError> {
    let items: Vec<(usize, usize)> =
        (0..points.len()).flat_map(|p| (0..realizations).map(move |r| (p, r))).collect();
    let runs = with_pool(threads, || {
        items
            .par_iter()
            .map(|&(p, r)| {
                run_realization(&points[p], master, r).map(|mut run| {
                    run.stages = Vec::new();
                    run
                })
            })
            .collect::<Result<Vec<RunResult>, _>>()
    })?
    .map_err(sim_error)?;
    Ok(points
        .iter()
        .zip(runs.chunks(realizations))
        .map(|(params, chunk)| SweepPoint::aggregate(*params, chunk))
        .collect())
}

fn strategy(cfg: &SweepConfig, q: f64) -> Result<IsolationStrategy, CliError> {
    Ok(cfg.strategy_at(q)?)
}

/// λ sweep over every `(k_a, k_b)` pair, grouped by pair then ascending λ.
pub fn sweep_lambda(cfg: &SweepConfig) -> Result<Vec<SweepPoint>, CliError> {
    let strategy = strategy(cfg, cfg.q)?;
    let mut points = Vec::new();
    for &k_a in &cfg.k_a {
        for &k_b in &cfg.k_b {
            for &lambda in &cfg.lambda_grid {
                points.push(PointParams { n: cfg.n, k_a, k_b, lambda, strategy });
            }
        }
    }
    evaluate_points(&points, cfg.master_seed, cfg.realizations, cfg.threads)
}

/// q sweep at fixed λ over every `(k_a, k_b)` pair. Needs an active strategy.
pub fn sweep_q(cfg: &SweepConfig) -> Result<Vec<SweepPoint>, CliError> {
    if StrategyKind::from(cfg.strategy) == StrategyKind::None {
        return Err(ConfigError::new("strategy", "a q sweep needs `deterministic` or `degree`").into());
    }
    let mut points = Vec::new();
    for &k_a in &cfg.k_a {
        for &k_b in &cfg.k_b {
            for &q in &cfg.q_grid {
                points.push(PointParams { n: cfg.n, k_a, k_b, lambda: cfg.lambda, strategy: strategy(cfg, q)? });
            }
        }
    }
    evaluate_points(&points, cfg.master_seed, cfg.realizations, cfg.threads)
}

/// One `lambda_c.csv` row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub k_a: usize,
    pub k_b: usize,
    pub lambda_c: Option<f64>,
}

/// λ_c of each `(k_a, k_b)` curve. Points must come grouped by pair, as
/// [`sweep_lambda`] returns them.
pub fn thresholds(points: &[SweepPoint], epsilon: f64) -> Result<Vec<Threshold>, CliError> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < points.len() {
        let key = (points[start].params.k_a, points[start].params.k_b);
        let end = points[start..]
            .iter()
            .position(|p| (p.params.k_a, p.params.k_b) != key)
            .map_or(points.len(), |off| start + off);
        let lambda_c = estimate_lambda_c(&points[start..end], epsilon).map_err(sim_error)?;
        out.push(Threshold { k_a: key.0, k_b: key.1, lambda_c });
        start = end;
    }
    Ok(out)
}

/// Which engine produced a time series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Two coupled layers.
    Cfvp,
    /// Plain SIR on layer A alone.
    Single,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Cfvp => "cfvp",
            Mode::Single => "single",
        }
    }
}

/// Stage-aligned means for one `(mode, k)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub mode: Mode,
    pub k: usize,
    pub lambda: f64,
    /// Mean current-infected fraction; finished runs count as 0.
    pub current: Vec<f64>,
    /// Mean ever-infected fraction; finished runs hold their final value.
    pub cumulative: Vec<f64>,
}

impl Series {
    fn from_runs(mode: Mode, k: usize, lambda: f64, runs: &[RunResult]) -> Self {
        Series {
            mode,
            k,
            lambda,
            current: stage_means(runs, |s| s.f_i_current, |_| 0.0),
            cumulative: stage_means(runs, |s| s.f_i_cumulative, RunResult::cumulative_fraction),
        }
    }
}

/// CF-VP and single-layer series at fixed λ for each `k` in `k_a`, with
/// both layers of the coupled system at average degree `k`.
///
/// The single-layer run of realization `r` uses the same layer A and the
/// same random stream as the coupled run it is compared with.
pub fn timeseries(cfg: &SweepConfig) -> Result<Vec<Series>, CliError> {
    let strategy = strategy(cfg, cfg.q)?;
    let points: Vec<PointParams> = cfg
        .k_a
        .iter()
        .map(|&k| PointParams { n: cfg.n, k_a: k, k_b: k, lambda: cfg.lambda, strategy })
        .collect();
    let reps = cfg.realizations;
    let items: Vec<(usize, Mode, usize)> = (0..points.len())
        .flat_map(|p| {
            [Mode::Cfvp, Mode::Single].into_iter().flat_map(move |m| (0..reps).map(move |r| (p, m, r)))
        })
        .collect();
    let master = cfg.master_seed;
    let runs = with_pool(cfg.threads, || {
        items
            .par_iter()
            .map(|&(p, mode, r)| match mode {
                Mode::Cfvp => run_realization(&points[p], master, r),
                Mode::Single => run_baseline_realization(&points[p], master, r),
            })
            .collect::<Result<Vec<_>, _>>()
    })?
    .map_err(sim_error)?;
    Ok(items
        .chunks(reps)
        .zip(runs.chunks(reps))
        .map(|(keys, chunk)| {
            let (p, mode, _) = keys[0];
            Series::from_runs(mode, points[p].k_a, cfg.lambda, chunk)
        })
        .collect())
}
