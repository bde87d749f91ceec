//! Monte Carlo building blocks: per-realization seeding, aggregation,
//! threshold estimation and isotonic fits.
//!
//! Everything here is sequential and pure. The `cfvp` crate fans the
//! realizations out over threads and feeds the results back in grid order.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::coupled::CoupledSystem;
use crate::engine::{run_cfvp, run_single_layer_sir, EngineError, RunResult};
use crate::epidemic::IsolationStrategy;
use crate::graph::{generate_ba, DegreeSpec, GraphError};
use crate::rng::{derive_seed, rng_from_seed};

const TAG_LAYER_A: u64 = 0xA;
const TAG_LAYER_B: u64 = 0xB;
const TAG_DYNAMICS: u64 = 0xD;

/// Seeds used by realization `r`.
///
/// * layer A: `derive_seed(master, [0xA, n, k_a, r])`
/// * layer B: `derive_seed(master, [0xB, n, k_b, r])`
/// * dynamics: `derive_seed(master, [0xD, n, r])`
///
/// None of them depend on `lambda`, `q` or the strategy, so every grid point
/// of a sweep sees the same networks and the same uniform draws for a given
/// `r` (common random numbers). Running one grid point on its own therefore
/// reproduces its row of a full sweep exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RealizationSeeds {
    /// Seed for generating layer A.
    pub layer_a: u64,
    /// Seed for generating layer B.
    pub layer_b: u64,
    /// Seed of the run's random stream.
    pub dynamics: u64,
}

impl RealizationSeeds {
    /// Derives the seeds of realization `r`.
    pub fn derive(master: u64, n: usize, k_a: usize, k_b: usize, r: usize) -> Self {
        let (n, r) = (n as u64, r as u64);
        RealizationSeeds {
            layer_a: derive_seed(master, &[TAG_LAYER_A, n, k_a as u64, r]),
            layer_b: derive_seed(master, &[TAG_LAYER_B, n, k_b as u64, r]),
            dynamics: derive_seed(master, &[TAG_DYNAMICS, n, r]),
        }
    }
}

/// One grid point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointParams {
    /// Node count per layer.
    pub n: usize,
    /// Average degree of layer A.
    pub k_a: usize,
    /// Average degree of layer B.
    pub k_b: usize,
    /// Transmission probability.
    pub lambda: f64,
    /// Isolation strategy.
    pub strategy: IsolationStrategy,
}

/// Errors from experiment helpers.
#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentError {
    /// Invalid layer parameters.
    Graph(GraphError),
    /// A run failed.
    Engine(EngineError),
    /// Points handed to [`estimate_lambda_c`] are not in ascending `lambda`.
    Unsorted,
}

impl fmt::Display for ExperimentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentError::Graph(e) => write!(f, "{e}"),
            ExperimentError::Engine(e) => write!(f, "{e}"),
            ExperimentError::Unsorted => f.write_str("sweep points are not sorted by lambda"),
        }
    }
}

impl core::error::Error for ExperimentError {}

impl From<GraphError> for ExperimentError {
    fn from(e: GraphError) -> Self {
        ExperimentError::Graph(e)
    }
}

impl From<EngineError> for ExperimentError {
    fn from(e: EngineError) -> Self {
        ExperimentError::Engine(e)
    }
}

/// Builds the coupled system of realization `r`.
pub fn build_realization(
    params: &PointParams,
    seeds: &RealizationSeeds,
) -> Result<CoupledSystem, ExperimentError> {
    let spec_a = DegreeSpec::from_average_degree(params.n, params.k_a)?;
    let spec_b = DegreeSpec::from_average_degree(params.n, params.k_b)?;
    let a = generate_ba(spec_a, &mut rng_from_seed(seeds.layer_a))?;
    let b = generate_ba(spec_b, &mut rng_from_seed(seeds.layer_b))?;
    Ok(CoupledSystem::connected_pair(a, b))
}

/// Runs CF-VP for realization `r` of a grid point.
pub fn run_realization(
    params: &PointParams,
    master: u64,
    r: usize,
) -> Result<RunResult, ExperimentError> {
    let seeds = RealizationSeeds::derive(master, params.n, params.k_a, params.k_b, r);
    let mut system = build_realization(params, &seeds)?;
    Ok(run_cfvp(&mut system, params.lambda, &params.strategy, seeds.dynamics)?)
}

/// Runs the single-layer baseline on the layer A of realization `r`, with
/// the same dynamics seed as the CF-VP run it is paired with.
pub fn run_baseline_realization(
    params: &PointParams,
    master: u64,
    r: usize,
) -> Result<RunResult, ExperimentError> {
    let seeds = RealizationSeeds::derive(master, params.n, params.k_a, params.k_b, r);
    let spec_a = DegreeSpec::from_average_degree(params.n, params.k_a)?;
    let a = generate_ba(spec_a, &mut rng_from_seed(seeds.layer_a))?;
    Ok(run_single_layer_sir(&a, params.lambda, seeds.dynamics)?)
}

/// Sample mean and unbiased (`n - 1`) standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    /// Sample size.
    pub count: usize,
    /// Mean.
    pub mean: f64,
    /// Unbiased standard deviation; zero for fewer than two samples.
    pub std: f64,
}

impl Summary {
    /// Summarises `values` (two-pass, summing in iteration order).
    pub fn of<I: IntoIterator<Item = f64>>(values: I) -> Self
    where
        I::IntoIter: Clone,
    {
        let it = values.into_iter();
        let (count, sum) = it.clone().fold((0usize, 0.0), |(c, s), x| (c + 1, s + x));
        if count == 0 {
            return Summary { count, mean: 0.0, std: 0.0 };
        }
        let mean = sum / count as f64;
        let std = if count < 2 {
            0.0
        } else {
            let ss: f64 = it.map(|x| (x - mean) * (x - mean)).sum();
            libm::sqrt(ss / (count - 1) as f64)
        };
        Summary { count, mean, std }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        self.std / libm::sqrt(self.count as f64)
    }
}

/// Aggregate of one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    /// Parameters of the point.
    pub params: PointParams,
    /// Mean final giant-component fraction.
    pub mean_g: f64,
    /// Unbiased standard deviation of the final fraction.
    pub std_g: f64,
    /// Mean number of nodes ever infected.
    pub mean_total_infected: f64,
    /// Runs aggregated.
    pub realizations: usize,
}

impl SweepPoint {
    /// Aggregates runs given in realization order.
    pub fn aggregate(params: PointParams, runs: &[RunResult]) -> Self {
        let g = Summary::of(runs.iter().map(|r| r.g_final));
        let infected = Summary::of(runs.iter().map(|r| r.total_infected as f64));
        SweepPoint {
            params,
            mean_g: g.mean,
            std_g: g.std,
            mean_total_infected: infected.mean,
            realizations: runs.len(),
        }
    }

    /// Standard error of `mean_g`.
    pub fn std_error(&self) -> f64 {
        Summary { count: self.realizations, mean: self.mean_g, std: self.std_g }.std_error()
    }
}

/// Runs all realizations of a point one after another.
pub fn evaluate_point(
    params: &PointParams,
    master: u64,
    realizations: usize,
) -> Result<SweepPoint, ExperimentError> {
    let runs = (0..realizations)
        .map(|r| run_realization(params, master, r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SweepPoint::aggregate(*params, &runs))
}

/// Smallest grid `lambda` from which every point on has `mean_g < epsilon`.
///
/// Returns `Ok(None)` when even the last point stays at or above `epsilon`.
pub fn estimate_lambda_c(
    points: &[SweepPoint],
    epsilon: f64,
) -> Result<Option<f64>, ExperimentError> {
    let curve: Vec<(f64, f64)> = points.iter().map(|p| (p.params.lambda, p.mean_g)).collect();
    threshold_of_curve(&curve, epsilon)
}

/// [`estimate_lambda_c`] on bare `(lambda, mean_g)` pairs.
pub fn threshold_of_curve(
    curve: &[(f64, f64)],
    epsilon: f64,
) -> Result<Option<f64>, ExperimentError> {
    if curve.windows(2).any(|w| w[0].0 > w[1].0) {
        return Err(ExperimentError::Unsorted);
    }
    let mut threshold = None;
    for &(lambda, g) in curve.iter().rev() {
        if g < epsilon {
            threshold = Some(lambda);
        } else {
            break;
        }
    }
    Ok(threshold)
}

/// Least-squares isotonic fit by pool-adjacent-violators.
///
/// `increasing` selects a non-decreasing fit, otherwise non-increasing.
/// Returns the fitted value of every input point.
pub fn isotonic_fit(values: &[f64], weights: &[f64], increasing: bool) -> Vec<f64> {
    assert_eq!(values.len(), weights.len());
    let sign = if increasing { 1.0 } else { -1.0 };
    // Blocks of (weighted mean, weight, length).
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((sign * v, w, 1));
        while blocks.len() > 1 {
            let (m2, w2, l2) = blocks[blocks.len() - 1];
            let (m1, w1, l1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            let w = w1 + w2;
            let m = if w > 0.0 { (m1 * w1 + m2 * w2) / w } else { 0.5 * (m1 + m2) };
            blocks.pop();
            *blocks.last_mut().unwrap() = (m, w, l1 + l2);
        }
    }
    let mut fit = Vec::with_capacity(values.len());
    for (m, _, len) in blocks {
        fit.extend(core::iter::repeat_n(sign * m, len));
    }
    fit
}

/// Stage-aligned means of a per-stage quantity over several runs.
///
/// Runs shorter than the longest one are padded with `pad(run)`.
pub fn stage_means<F, P>(runs: &[RunResult], value: F, pad: P) -> Vec<f64>
where
    F: Fn(&crate::engine::StageRecord) -> f64,
    P: Fn(&RunResult) -> f64,
{
    let len = runs.iter().map(|r| r.stages.len()).max().unwrap_or(0);
    let mut sums = vec![0.0; len];
    for run in runs {
        let filler = pad(run);
        for (t, sum) in sums.iter_mut().enumerate() {
            *sum += run.stages.get(t).map_or(filler, &value);
        }
    }
    let count = runs.len().max(1) as f64;
    sums.into_iter().map(|s| s / count).collect()
}
