//! SIR state on layer A, the spreading and isolation substages, and the
//! assignment of per-node identification probabilities.
//!
//! Recovery probability is fixed at one: a node is infected for exactly one
//! stage and then removed.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::graph::Graph;

/// Compartment of one layer-A node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Compartment {
    /// Susceptible.
    Susceptible,
    /// Infected; transmits during the next spreading substage.
    Infected,
    /// Removed by the virus.
    Removed,
    /// Nonfunctional because of a cascade, not the virus.
    Failed,
}

/// Errors from the epidemic substages.
#[derive(Debug, Clone, PartialEq)]
pub enum EpidemicError {
    /// Probability outside `[0, 1]` (or NaN).
    InvalidProbability {
        /// Parameter name.
        field: &'static str,
        /// Offending value.
        value: f64,
    },
    /// Negative or non-finite standard deviation.
    InvalidSigma(f64),
    /// Spreading was requested with no infected node.
    NoInfected,
    /// A forced-outcome script ran out of entries.
    ScriptExhausted {
        /// Attempt index (0-based) that had no entry.
        attempt: usize,
    },
    /// A forced-outcome script expected a different edge.
    ScriptMismatch {
        /// Attempt index (0-based).
        attempt: usize,
        /// Edge in the script.
        expected: (usize, usize),
        /// Edge actually attempted.
        found: (usize, usize),
    },
}

impl fmt::Display for EpidemicError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpidemicError::InvalidProbability { field, value } => {
                write!(f, "{field} must lie in [0, 1], got {value}")
            }
            EpidemicError::InvalidSigma(s) => {
                write!(f, "sigma must be finite and non-negative, got {s}")
            }
            EpidemicError::NoInfected => f.write_str("no infected node left to spread from"),
            EpidemicError::ScriptExhausted { attempt } => {
                write!(f, "transmission script exhausted at attempt {attempt}")
            }
            EpidemicError::ScriptMismatch { attempt, expected, found } => write!(
                f,
                "transmission script expected edge {}->{} at attempt {attempt}, run attempted {}->{}",
                expected.0, expected.1, found.0, found.1
            ),
        }
    }
}

impl core::error::Error for EpidemicError {}

pub(crate) fn check_probability(field: &'static str, value: f64) -> Result<f64, EpidemicError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(EpidemicError::InvalidProbability { field, value })
    }
}

/// Which adaptive-isolation rule is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    /// No isolation.
    None,
    /// Every node has the same identification probability `q`.
    Deterministic,
    /// Gaussian identification probabilities ranked by degree.
    DegreeBased,
}

impl StrategyKind {
    /// Lower-case name used in configs and CSV files.
    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::None => "none",
            StrategyKind::Deterministic => "deterministic",
            StrategyKind::DegreeBased => "degree",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for StrategyKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "none" => Ok(StrategyKind::None),
            "deterministic" => Ok(StrategyKind::Deterministic),
            "degree" | "degree_based" | "degree-based" => Ok(StrategyKind::DegreeBased),
            _ => Err(()),
        }
    }
}

/// Adaptive isolation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsolationStrategy {
    /// Rule in use.
    pub kind: StrategyKind,
    /// Mean identification probability.
    pub q: f64,
    /// Standard deviation of the Gaussian draw (degree-based only).
    pub sigma: f64,
}

impl IsolationStrategy {
    /// No isolation.
    pub const NONE: IsolationStrategy = IsolationStrategy { kind: StrategyKind::None, q: 0.0, sigma: 0.0 };

    /// Uniform identification probability `q`.
    pub fn deterministic(q: f64) -> Result<Self, EpidemicError> {
        Self::new(StrategyKind::Deterministic, q, 0.0)
    }

    /// Gaussian `N(q, sigma)` probabilities handed out by degree rank.
    pub fn degree_based(q: f64, sigma: f64) -> Result<Self, EpidemicError> {
        Self::new(StrategyKind::DegreeBased, q, sigma)
    }

    /// Checked constructor for any kind.
    pub fn new(kind: StrategyKind, q: f64, sigma: f64) -> Result<Self, EpidemicError> {
        let s = IsolationStrategy { kind, q, sigma };
        s.validate()?;
        Ok(s)
    }

    /// `q` in `[0, 1]` and `sigma` finite and non-negative.
    pub fn validate(&self) -> Result<(), EpidemicError> {
        check_probability("q", self.q)?;
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(EpidemicError::InvalidSigma(self.sigma));
        }
        Ok(())
    }

    /// Whether isolation runs at all.
    pub fn is_active(&self) -> bool {
        self.kind != StrategyKind::None
    }
}

/// Per-node identification probabilities.
///
/// * `None`: all zero, no random draws.
/// * `Deterministic`: all `q`, no random draws.
/// * `DegreeBased`: `n` samples from `N(q, sigma)` are drawn and sorted; the
///   nodes are ranked by degree in `graph` (ties by id) and the `r`-th
///   smallest sample goes to the node of rank `r`. Each value is then clamped
///   to `[0, 1]`.
pub fn assign_q<R: Rng + ?Sized>(
    strategy: &IsolationStrategy,
    graph: &Graph,
    rng: &mut R,
) -> Result<Vec<f64>, EpidemicError> {
    strategy.validate()?;
    let n = graph.node_count();
    Ok(match strategy.kind {
        StrategyKind::None => vec![0.0; n],
        StrategyKind::Deterministic => vec![strategy.q; n],
        StrategyKind::DegreeBased => {
            let mut samples = degree_ranked_samples(strategy, graph, rng);
            for q in &mut samples {
                *q = clamp_unit(*q);
            }
            samples
        }
    })
}

/// The degree-ranked Gaussian samples before clamping, indexed by node.
pub fn degree_ranked_samples<R: Rng + ?Sized>(
    strategy: &IsolationStrategy,
    graph: &Graph,
    rng: &mut R,
) -> Vec<f64> {
    let n = graph.node_count();
    let normal = Normal::new(strategy.q, strategy.sigma).expect("validated sigma");
    let mut samples: Vec<f64> = (0..n).map(|_| normal.sample(rng)).collect();
    samples.sort_unstable_by(f64::total_cmp);
    let degrees = graph.degrees();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (degrees[i], i));
    let mut out = vec![0.0; n];
    for (rank, &node) in order.iter().enumerate() {
        out[node] = samples[rank];
    }
    out
}

/// Clamps an identification probability into `[0, 1]`.
pub fn clamp_unit(q: f64) -> f64 {
    if q < 0.0 {
        0.0
    } else if q > 1.0 {
        1.0
    } else {
        q
    }
}

/// Compartments of all layer-A nodes plus the epidemic parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EpidemicState {
    compartments: Vec<Compartment>,
    infected: Vec<usize>,
    counts: [usize; 4],
    ever_infected: usize,
    lambda: f64,
    delta: f64,
    q: Vec<f64>,
}

fn slot(c: Compartment) -> usize {
    match c {
        Compartment::Susceptible => 0,
        Compartment::Infected => 1,
        Compartment::Removed => 2,
        Compartment::Failed => 3,
    }
}

impl EpidemicState {
    /// All `n` nodes susceptible, no isolation ability.
    pub fn new(n: usize, lambda: f64) -> Result<Self, EpidemicError> {
        check_probability("lambda", lambda)?;
        Ok(EpidemicState {
            compartments: vec![Compartment::Susceptible; n],
            infected: Vec::new(),
            counts: [n, 0, 0, 0],
            ever_infected: 0,
            lambda,
            delta: 1.0,
            q: vec![0.0; n],
        })
    }

    /// Replaces the identification probabilities.
    pub fn with_q(mut self, q: Vec<f64>) -> Self {
        assert_eq!(q.len(), self.compartments.len(), "one q per node");
        self.q = q;
        self
    }

    /// Node count.
    pub fn node_count(&self) -> usize {
        self.compartments.len()
    }

    /// Transmission probability.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Recovery probability; always one.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Identification probability of every node.
    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// Compartment of node `i`.
    pub fn compartment(&self, i: usize) -> Compartment {
        self.compartments[i]
    }

    /// Currently infected nodes, ascending.
    pub fn infected(&self) -> &[usize] {
        &self.infected
    }

    /// Number of nodes in `c`.
    pub fn count(&self, c: Compartment) -> usize {
        self.counts[slot(c)]
    }

    /// Nodes ever infected, including the seed.
    pub fn ever_infected(&self) -> usize {
        self.ever_infected
    }

    fn set(&mut self, i: usize, c: Compartment) {
        let old = core::mem::replace(&mut self.compartments[i], c);
        self.counts[slot(old)] -= 1;
        self.counts[slot(c)] += 1;
        if c == Compartment::Infected && old != Compartment::Infected {
            self.ever_infected += 1;
        }
    }

    /// Infects node `i` directly.
    pub fn infect(&mut self, i: usize) {
        if self.compartments[i] != Compartment::Infected {
            self.set(i, Compartment::Infected);
            let at = self.infected.partition_point(|&x| x < i);
            self.infected.insert(at, i);
        }
    }

    /// Marks nodes removed by a cascade. Susceptible and infected nodes become
    /// [`Compartment::Failed`]; removed ones keep their state. Returns how
    /// many changed.
    pub fn mark_failed(&mut self, nodes: &[usize]) -> usize {
        let mut changed = 0;
        for &i in nodes {
            match self.compartments[i] {
                Compartment::Susceptible | Compartment::Infected => {
                    self.set(i, Compartment::Failed);
                    changed += 1;
                }
                Compartment::Removed | Compartment::Failed => {}
            }
        }
        if changed > 0 {
            let compartments = &self.compartments;
            self.infected.retain(|&i| compartments[i] == Compartment::Infected);
        }
        changed
    }
}

/// Infects one node drawn uniformly from all nodes and returns it.
pub fn seed_infection<R: Rng + ?Sized>(state: &mut EpidemicState, rng: &mut R) -> usize {
    let n = state.node_count();
    assert!(n > 0, "cannot seed an empty network");
    let node = rng.random_range(0..n as u64) as usize;
    state.infect(node);
    node
}

/// Decides individual infection attempts.
pub trait Transmission {
    /// Whether infected `from` infects susceptible `to` over their edge.
    fn attempt<R: Rng + ?Sized>(
        &mut self,
        from: usize,
        to: usize,
        rng: &mut R,
    ) -> Result<bool, EpidemicError>;
}

/// Independent Bernoulli(`lambda`) trials: success when a uniform draw from
/// `[0, 1)` is below `lambda`. Every attempt consumes one draw.
#[derive(Debug, Clone, Copy)]
pub struct Bernoulli(pub f64);

impl Transmission for Bernoulli {
    fn attempt<R: Rng + ?Sized>(
        &mut self,
        _from: usize,
        _to: usize,
        rng: &mut R,
    ) -> Result<bool, EpidemicError> {
        Ok(rng.random::<f64>() < self.0)
    }
}

/// Result of one spreading substage.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpreadOutcome {
    /// Susceptible nodes infected this stage, ascending.
    pub newly_infected: Vec<usize>,
    /// Nodes that were infected at the start of the stage and are now removed.
    pub newly_removed: Vec<usize>,
}

/// Synchronous spreading with recovery probability one.
///
/// Every alive edge from an infected node to a functional susceptible node
/// is one attempt; attempts run in ascending `(infected, neighbor)` order.
/// A node hit by any attempt is infected for the next stage. Afterwards every
/// node that was infected at the start becomes removed.
pub fn spread_substage<T, R>(
    state: &mut EpidemicState,
    graph: &Graph,
    transmission: &mut T,
    rng: &mut R,
) -> Result<SpreadOutcome, EpidemicError>
where
    T: Transmission + ?Sized,
    R: Rng + ?Sized,
{
    if state.infected.is_empty() {
        return Err(EpidemicError::NoInfected);
    }
    let mut hit = vec![false; state.node_count()];
    let mut newly_infected = Vec::new();
    for &i in &state.infected {
        for j in graph.neighbors(i) {
            if state.compartments[j] != Compartment::Susceptible || !graph.is_alive(j) {
                continue;
            }
            if transmission.attempt(i, j, rng)? && !hit[j] {
                hit[j] = true;
                newly_infected.push(j);
            }
        }
    }
    newly_infected.sort_unstable();
    let newly_removed = core::mem::take(&mut state.infected);
    for &i in &newly_removed {
        state.set(i, Compartment::Removed);
    }
    for &j in &newly_infected {
        state.set(j, Compartment::Infected);
    }
    state.infected = newly_infected.clone();
    Ok(SpreadOutcome { newly_infected, newly_removed })
}

/// Adaptive isolation, run before the spreading substage.
///
/// Susceptible functional nodes are visited in ascending id. A node with at
/// least one alive infected neighbor draws one uniform number and, if it is
/// below its `q`, cuts the edge to one of those neighbors chosen uniformly
/// (a second draw). Returns the cut edges as `(susceptible, infected)`.
pub fn isolation_substage<R: Rng + ?Sized>(
    state: &EpidemicState,
    graph: &mut Graph,
    rng: &mut R,
) -> Vec<(usize, usize)> {
    let mut pruned = Vec::new();
    let mut infected_neighbors = Vec::new();
    for i in 0..state.node_count() {
        if state.compartments[i] != Compartment::Susceptible || !graph.is_alive(i) {
            continue;
        }
        infected_neighbors.clear();
        infected_neighbors.extend(
            graph
                .neighbors(i)
                .filter(|&j| state.compartments[j] == Compartment::Infected),
        );
        if infected_neighbors.is_empty() {
            continue;
        }
        if rng.random::<f64>() < state.q[i] {
            let pick = rng.random_range(0..infected_neighbors.len() as u64) as usize;
            let j = infected_neighbors[pick];
            graph.remove_edge(i, j).expect("edge to an alive neighbor");
            pruned.push((i, j));
        }
    }
    pruned
}
