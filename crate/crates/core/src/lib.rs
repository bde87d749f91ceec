//! Simulation core for the interplay between cascading failures and virus
//! propagation (CF-VP) on two-layer interdependent networks.
//!
//! Layer A carries an SIR epidemic with recovery probability one. Every node
//! the virus removes fails together with its partner in layer B, which sets
//! off a mutual giant-component cascade. The cascade in turn deletes
//! susceptible and infected nodes from layer A and slows the epidemic down.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, parallel
//! sweeps and the command line live in the `cfvp` companion crate.

#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]
#![warn(missing_docs)]

extern crate alloc;

pub mod coupled;
pub mod engine;
pub mod epidemic;
pub mod experiments;
pub mod graph;
pub mod rng;

pub use coupled::{CascadeReport, CoupledError, CoupledSystem};
pub use engine::{
    run_cfvp, run_single_layer_sir, run_with_forced_outcomes, EngineError, RunResult,
    StageRecord, TransmissionScript,
};
pub use epidemic::{
    assign_q, isolation_substage, seed_infection, spread_substage, Compartment, EpidemicError,
    EpidemicState, IsolationStrategy, SpreadOutcome, StrategyKind,
};
pub use graph::{generate_ba, DegreeSpec, Graph, GraphError};
pub use rng::SimRng;
