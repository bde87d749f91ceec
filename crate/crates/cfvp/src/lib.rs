//! Command line, file formats and parallel sweeps for `cfvp-core`.
//!
//! The binary is a thin wrapper around [`cli::main`]. The other modules are
//! public so tests and scripts can drive sweeps without going through argv.

pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod sweep;

pub use config::{PartialConfig, StrategyName, SweepConfig};
pub use error::{CliError, ConfigError};
