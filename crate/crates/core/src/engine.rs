//! The CF-VP stage loop and the single-layer SIR baseline.
//!
//! One stage of CF-VP is:
//!
//! 1. adaptive isolation on layer A, if a strategy is active;
//! 2. synchronous spreading, after which every previously infected node is
//!    removed;
//! 3. a full mutual cascade seeded by the nodes removed in step 2;
//! 4. susceptible or infected A-nodes lost in the cascade become failed.
//!
//! The loop stops once no infected node survives step 4. Each run owns a
//! [`SimRng`] seeded from [`RunResult::seed`]; the stream is consumed by
//! `assign_q`, then seeding, then per stage isolation and transmission.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::coupled::{CoupledError, CoupledSystem};
use crate::epidemic::{
    assign_q, check_probability, isolation_substage, seed_infection, spread_substage, Bernoulli,
    Compartment, EpidemicError, EpidemicState, IsolationStrategy, Transmission,
};
use crate::graph::Graph;
use crate::rng::{rng_from_seed, SimRng};

/// Errors from a simulation run.
#[derive(Debug, Clone, PartialEq)]
pub enum EngineError {
    /// Bad parameters or script problems.
    Epidemic(EpidemicError),
    /// Cascade failures.
    Coupled(CoupledError),
    /// The system handed to a run already had failed nodes or pending
    /// topology changes.
    NotFresh,
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::Epidemic(e) => write!(f, "{e}"),
            EngineError::Coupled(e) => write!(f, "{e}"),
            EngineError::NotFresh => f.write_str("run needs a fresh, fully functional system"),
        }
    }
}

impl core::error::Error for EngineError {}

impl From<EpidemicError> for EngineError {
    fn from(e: EpidemicError) -> Self {
        EngineError::Epidemic(e)
    }
}

impl From<CoupledError> for EngineError {
    fn from(e: CoupledError) -> Self {
        EngineError::Coupled(e)
    }
}

/// Observables of one stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    /// 1-based stage index.
    pub stage: usize,
    /// Susceptible nodes infected during spreading.
    pub newly_infected: usize,
    /// Infected nodes removed by the virus at the end of spreading.
    pub virus_removed: usize,
    /// A-nodes lost to the cascade, not counting the virus-removed seeds.
    pub cascade_removed_a: usize,
    /// B-nodes lost to the cascade, dependency failures included.
    pub cascade_removed_b: usize,
    /// Edges cut by adaptive isolation.
    pub edges_pruned: usize,
    /// Infected fraction right after spreading.
    pub f_i_current: f64,
    /// Fraction ever infected, up to and including this stage.
    pub f_i_cumulative: f64,
    /// Mutual giant component fraction after the cascade. The single-layer
    /// baseline reports the susceptible fraction here.
    pub functional_fraction: f64,
}

/// Outcome of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    /// Final giant-component fraction (susceptible fraction for the
    /// single-layer baseline).
    pub g_final: f64,
    /// One record per stage.
    pub stages: Vec<StageRecord>,
    /// Nodes ever infected, including the seed.
    pub total_infected: usize,
    /// Seed of the run's random stream.
    pub seed: u64,
    /// Whether `g_final` is zero.
    pub collapsed: bool,
}

impl RunResult {
    /// Stage with the largest current-infected fraction (first one on ties).
    pub fn peak_stage(&self) -> Option<usize> {
        let mut best: Option<&StageRecord> = None;
        for s in &self.stages {
            if best.is_none_or(|b| s.f_i_current > b.f_i_current) {
                best = Some(s);
            }
        }
        best.map(|s| s.stage)
    }

    /// Ever-infected fraction at the end of the run.
    pub fn cumulative_fraction(&self) -> f64 {
        self.stages.last().map_or(0.0, |s| s.f_i_cumulative)
    }
}

/// Transmission outcomes replayed from a list instead of drawn at random.
///
/// Entries are consumed one per infection attempt in the canonical attempt
/// order. An entry may name the edge it expects, in which case a different
/// attempt is reported as a mismatch.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransmissionScript {
    initial: Option<usize>,
    entries: Vec<(Option<(usize, usize)>, bool)>,
    cursor: usize,
}

impl TransmissionScript {
    /// Plain outcomes, no edge checks.
    pub fn from_outcomes<I: IntoIterator<Item = bool>>(outcomes: I) -> Self {
        TransmissionScript {
            initial: None,
            entries: outcomes.into_iter().map(|ok| (None, ok)).collect(),
            cursor: 0,
        }
    }

    /// Outcomes tied to the `(infected, susceptible)` edge they decide.
    pub fn from_attempts<I: IntoIterator<Item = ((usize, usize), bool)>>(attempts: I) -> Self {
        TransmissionScript {
            initial: None,
            entries: attempts.into_iter().map(|(e, ok)| (Some(e), ok)).collect(),
            cursor: 0,
        }
    }

    /// Fixes the initially infected node instead of drawing it.
    pub fn with_initial(mut self, node: usize) -> Self {
        self.initial = Some(node);
        self
    }

    /// Entries consumed so far.
    pub fn consumed(&self) -> usize {
        self.cursor
    }

    /// Entries not yet consumed.
    pub fn remaining(&self) -> usize {
        self.entries.len() - self.cursor
    }
}

impl Transmission for TransmissionScript {
    fn attempt<R: Rng + ?Sized>(
        &mut self,
        from: usize,
        to: usize,
        _rng: &mut R,
    ) -> Result<bool, EpidemicError> {
        let attempt = self.cursor;
        let &(edge, ok) = self
            .entries
            .get(attempt)
            .ok_or(EpidemicError::ScriptExhausted { attempt })?;
        if let Some(expected) = edge {
            if expected != (from, to) {
                return Err(EpidemicError::ScriptMismatch { attempt, expected, found: (from, to) });
            }
        }
        self.cursor += 1;
        Ok(ok)
    }
}

/// Runs CF-VP on a fresh system with transmission probability `lambda`.
pub fn run_cfvp(
    system: &mut CoupledSystem,
    lambda: f64,
    strategy: &IsolationStrategy,
    seed: u64,
) -> Result<RunResult, EngineError> {
    check_probability("lambda", lambda)?;
    let mut rng = rng_from_seed(seed);
    run_coupled(system, lambda, strategy, &mut Bernoulli(lambda), None, &mut rng, seed)
}

/// Runs CF-VP with transmission outcomes read from `script`.
///
/// Isolation draws (and the initial infection, unless the script fixes it)
/// still come from the stream seeded by `seed`.
pub fn run_with_forced_outcomes(
    system: &mut CoupledSystem,
    strategy: &IsolationStrategy,
    script: &mut TransmissionScript,
    seed: u64,
) -> Result<RunResult, EngineError> {
    let mut rng = rng_from_seed(seed);
    let initial = script.initial;
    run_coupled(system, 0.0, strategy, script, initial, &mut rng, seed)
}

fn run_coupled<T: Transmission>(
    system: &mut CoupledSystem,
    lambda: f64,
    strategy: &IsolationStrategy,
    transmission: &mut T,
    initial: Option<usize>,
    rng: &mut SimRng,
    seed: u64,
) -> Result<RunResult, EngineError> {
    let n = system.node_count();
    if n == 0 || !system.is_settled() || system.functional_count() != n {
        return Err(EngineError::NotFresh);
    }
    let q = assign_q(strategy, system.layer_a(), rng)?;
    let mut state = EpidemicState::new(n, lambda)?.with_q(q);
    match initial {
        Some(node) => state.infect(node),
        None => {
            seed_infection(&mut state, rng);
        }
    }
    let nf = n as f64;
    let mut stages = Vec::new();
    while !state.infected().is_empty() {
        let edges_pruned = if strategy.is_active() {
            isolation_substage(&state, system.layer_a_mut(), rng).len()
        } else {
            0
        };
        let spread = spread_substage(&mut state, system.layer_a(), transmission, rng)?;
        let f_i_current = state.count(Compartment::Infected) as f64 / nf;
        let report = system.cascade(&spread.newly_removed)?;
        state.mark_failed(&report.removed_a);
        stages.push(StageRecord {
            stage: stages.len() + 1,
            newly_infected: spread.newly_infected.len(),
            virus_removed: spread.newly_removed.len(),
            cascade_removed_a: report.removed_a.len() - spread.newly_removed.len(),
            cascade_removed_b: report.removed_b.len(),
            edges_pruned,
            f_i_current,
            f_i_cumulative: state.ever_infected() as f64 / nf,
            functional_fraction: system.giant_fraction()?,
        });
    }
    let g_final = system.giant_fraction()?;
    Ok(RunResult {
        g_final,
        stages,
        total_infected: state.ever_infected(),
        seed,
        collapsed: g_final == 0.0,
    })
}

/// Plain SIR on one graph: same spreading rule, no cascade, no isolation.
///
/// `g_final` and `functional_fraction` report the susceptible fraction.
pub fn run_single_layer_sir(graph: &Graph, lambda: f64, seed: u64) -> Result<RunResult, EngineError> {
    check_probability("lambda", lambda)?;
    let n = graph.node_count();
    if n == 0 {
        return Err(EngineError::NotFresh);
    }
    let mut rng = rng_from_seed(seed);
    let mut state = EpidemicState::new(n, lambda)?;
    seed_infection(&mut state, &mut rng);
    let nf = n as f64;
    let mut stages = Vec::new();
    let mut transmission = Bernoulli(lambda);
    while !state.infected().is_empty() {
        let spread = spread_substage(&mut state, graph, &mut transmission, &mut rng)?;
        stages.push(StageRecord {
            stage: stages.len() + 1,
            newly_infected: spread.newly_infected.len(),
            virus_removed: spread.newly_removed.len(),
            cascade_removed_a: 0,
            cascade_removed_b: 0,
            edges_pruned: 0,
            f_i_current: state.count(Compartment::Infected) as f64 / nf,
            f_i_cumulative: state.ever_infected() as f64 / nf,
            functional_fraction: state.count(Compartment::Susceptible) as f64 / nf,
        });
    }
    let g_final = state.count(Compartment::Susceptible) as f64 / nf;
    Ok(RunResult {
        g_final,
        stages,
        total_infected: state.ever_infected(),
        seed,
        collapsed: g_final == 0.0,
    })
}
