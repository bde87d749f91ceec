//! Experiment configuration: JSON file, environment fallback and flag
//! overrides, merged into one validated [`SweepConfig`].

use std::fmt;
use std::str::FromStr;

use cfvp_core::{IsolationStrategy, StrategyKind};
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Environment variable read when neither the config file nor `--seed`
/// provides a master seed.
pub const SEED_ENV: &str = "CFVP_SEED";

/// Isolation strategy as spelled in configs and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StrategyName {
    None,
    Deterministic,
    Degree,
}

impl From<StrategyName> for StrategyKind {
    fn from(s: StrategyName) -> Self {
        match s {
            StrategyName::None => StrategyKind::None,
            StrategyName::Deterministic => StrategyKind::Deterministic,
            StrategyName::Degree => StrategyKind::DegreeBased,
        }
    }
}

impl fmt::Display for StrategyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(StrategyKind::from(*self).as_str())
    }
}

/// Effective configuration of a command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub n: usize,
    pub k_a: Vec<usize>,
    pub k_b: Vec<usize>,
    /// Fixed transmission probability for `run`, `sweep-q` and `timeseries`.
    pub lambda: f64,
    pub lambda_grid: Vec<f64>,
    /// Fixed identification probability for `run` and `sweep-lambda`.
    pub q: f64,
    pub q_grid: Vec<f64>,
    pub sigma: f64,
    pub strategy: StrategyName,
    pub realizations: usize,
    pub master_seed: u64,
    pub collapse_epsilon: f64,
    /// Worker cap; never affects results, so it is left out of the echo.
    #[serde(skip)]
    pub threads: Option<usize>,
}

/// `count + 1` evenly spaced values from 0 to 1, e.g. `unit_grid(50)` is
/// the 0.02-step grid.
pub fn unit_grid(count: usize) -> Vec<f64> {
    (0..=count).map(|i| i as f64 / count as f64).collect()
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n: 2000,
            k_a: vec![8],
            k_b: vec![8],
            lambda: 0.5,
            lambda_grid: unit_grid(50),
            q: 0.0,
            q_grid: unit_grid(10),
            sigma: 0.3,
            strategy: StrategyName::None,
            realizations: 100,
            master_seed: 0,
            collapse_epsilon: 0.005,
            threads: None,
        }
    }
}

/// A config document or flag set where every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub n: Option<usize>,
    pub k_a: Option<Vec<usize>>,
    pub k_b: Option<Vec<usize>>,
    pub lambda: Option<f64>,
    pub lambda_grid: Option<Vec<f64>>,
    pub q: Option<f64>,
    pub q_grid: Option<Vec<f64>>,
    pub sigma: Option<f64>,
    pub strategy: Option<StrategyName>,
    pub realizations: Option<usize>,
    pub master_seed: Option<u64>,
    pub collapse_epsilon: Option<f64>,
    pub threads: Option<usize>,
}

impl PartialConfig {
    /// Parses a JSON config document. Unknown keys are rejected.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            // serde names the key in messages like "unknown field `foo`".
            let field = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.starts_with("unknown field") || msg.contains("field `"))
                .unwrap_or("config")
                .to_string();
            ConfigError::new(field, msg)
        })
    }

    /// Keys set in `other` win.
    pub fn overlay(self, other: PartialConfig) -> PartialConfig {
        PartialConfig {
            n: other.n.or(self.n),
            k_a: other.k_a.or(self.k_a),
            k_b: other.k_b.or(self.k_b),
            lambda: other.lambda.or(self.lambda),
            lambda_grid: other.lambda_grid.or(self.lambda_grid),
            q: other.q.or(self.q),
            q_grid: other.q_grid.or(self.q_grid),
            sigma: other.sigma.or(self.sigma),
            strategy: other.strategy.or(self.strategy),
            realizations: other.realizations.or(self.realizations),
            master_seed: other.master_seed.or(self.master_seed),
            collapse_epsilon: other.collapse_epsilon.or(self.collapse_epsilon),
            threads: other.threads.or(self.threads),
        }
    }

    /// Fills unset keys with defaults (the master seed falls back to
    /// `env_seed` first) and validates the result.
    pub fn resolve(self, env_seed: Option<&str>) -> Result<SweepConfig, ConfigError> {
        let d = SweepConfig::default();
        let master_seed = match (self.master_seed, env_seed) {
            (Some(s), _) => s,
            (None, Some(raw)) => raw.trim().parse().map_err(|_| {
                ConfigError::new("master_seed", format!("{SEED_ENV}={raw:?} is not an unsigned integer"))
            })?,
            (None, None) => d.master_seed,
        };
        let cfg = SweepConfig {
            n: self.n.unwrap_or(d.n),
            k_a: self.k_a.unwrap_or(d.k_a),
            k_b: self.k_b.unwrap_or(d.k_b),
            lambda: self.lambda.unwrap_or(d.lambda),
            lambda_grid: self.lambda_grid.unwrap_or(d.lambda_grid),
            q: self.q.unwrap_or(d.q),
            q_grid: self.q_grid.unwrap_or(d.q_grid),
            sigma: self.sigma.unwrap_or(d.sigma),
            strategy: self.strategy.unwrap_or(d.strategy),
            realizations: self.realizations.unwrap_or(d.realizations),
            master_seed,
            collapse_epsilon: self.collapse_epsilon.unwrap_or(d.collapse_epsilon),
            threads: self.threads,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn check_unit(field: &str, x: f64) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(ConfigError::new(field, format!("{x} is outside [0, 1]")))
    }
}

fn check_grid(field: &str, grid: &[f64]) -> Result<(), ConfigError> {
    if grid.is_empty() {
        return Err(ConfigError::new(field, "grid is empty"));
    }
    for &x in grid {
        check_unit(field, x)?;
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ConfigError::new(field, "grid must be strictly ascending"));
    }
    Ok(())
}

fn check_degrees(field: &str, ks: &[usize], n: usize) -> Result<(), ConfigError> {
    if ks.is_empty() {
        return Err(ConfigError::new(field, "needs at least one average degree"));
    }
    for &k in ks {
        if k == 0 || k % 2 != 0 {
            return Err(ConfigError::new(field, format!("average degree {k} is not a positive even integer")));
        }
        if k / 2 >= n {
            return Err(ConfigError::new(field, format!("average degree {k} needs more than {n} nodes")));
        }
    }
    Ok(())
}

impl SweepConfig {
    /// Checks every field; the error names the first offending key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n < 2 {
            return Err(ConfigError::new("n", "need at least 2 nodes"));
        }
        check_degrees("k_a", &self.k_a, self.n)?;
        check_degrees("k_b", &self.k_b, self.n)?;
        check_unit("lambda", self.lambda)?;
        check_grid("lambda_grid", &self.lambda_grid)?;
        check_unit("q", self.q)?;
        check_grid("q_grid", &self.q_grid)?;
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(ConfigError::new("sigma", format!("{} is not a finite non-negative number", self.sigma)));
        }
        if self.realizations == 0 {
            return Err(ConfigError::new("realizations", "must be at least 1"));
        }
        if !(self.collapse_epsilon > 0.0 && self.collapse_epsilon <= 1.0) {
            return Err(ConfigError::new("collapse_epsilon", format!("{} is outside (0, 1]", self.collapse_epsilon)));
        }
        if self.threads == Some(0) {
            return Err(ConfigError::new("threads", "must be at least 1"));
        }
        Ok(())
    }

    /// Strategy with mean `q`.
    pub fn strategy_at(&self, q: f64) -> Result<IsolationStrategy, ConfigError> {
        IsolationStrategy::new(self.strategy.into(), q, self.sigma)
            .map_err(|e| ConfigError::new("q", e.to_string()))
    }

    /// The config as one line of JSON, for output headers.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }

    /// Spacing of the λ grid: the largest gap between neighbours.
    pub fn lambda_step(&self) -> f64 {
        grid_step(&self.lambda_grid)
    }
}

/// Largest gap between consecutive grid values (0 for a single value),
/// rounded to 12 decimals so 0.3 - 0.2 reports as 0.1.
pub fn grid_step(grid: &[f64]) -> f64 {
    let step = grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    (step * 1e12).round() / 1e12
}

/// Parses a grid given as `a,b,c` or `start:stop:step`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let nums = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        let (start, stop, step) = (nums[0], nums[1], nums[2]);
        if !(step > 0.0) || stop < start {
            return Err(format!("bad range {s:?}"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        // Round away the accumulated binary noise so 0.06 prints as 0.06.
        return Ok((0..=count)
            .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
            .collect());
    }
    s.split(',')
        .map(|p| f64::from_str(p.trim()).map_err(|e| format!("{p:?}: {e}")))
        .collect()
}
