//! CSV and edge-list files.
//!
//! Every file starts with `#` comment lines naming the command, the
//! effective config as JSON and the master seed, followed by a header row.
//! Floats use Rust's shortest round-trip formatting, so identical inputs give
//! byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use cfvp_core::graph::{load_edge_list, write_edge_list};
use cfvp_core::{Graph, StageRecord};

use crate::config::SweepConfig;
use crate::error::CliError;

pub const TRACE_COLUMNS: [&str; 9] = [
    "stage",
    "newly_infected",
    "virus_removed",
    "cascade_removed_a",
    "cascade_removed_b",
    "edges_pruned",
    "f_i_current",
    "f_i_cumulative",
    "functional_fraction",
];
pub const SWEEP_LAMBDA_COLUMNS: [&str; 9] = [
    "k_a",
    "k_b",
    "strategy",
    "q",
    "lambda",
    "mean_g",
    "std_g",
    "mean_total_infected",
    "realizations",
];
pub const SWEEP_Q_COLUMNS: [&str; 9] =
    ["k_a", "k_b", "strategy", "sigma", "lambda", "q", "mean_g", "std_g", "realizations"];
pub const TIMESERIES_COLUMNS: [&str; 6] =
    ["mode", "k", "lambda", "stage", "mean_f_i_current", "mean_f_i_cumulative"];
pub const LAMBDA_C_COLUMNS: [&str; 5] = ["k_a", "k_b", "lambda_c", "epsilon", "grid_step"];

/// Written in `lambda_c.csv` when the curve never drops below epsilon.
pub const NOT_REACHED: &str = "NA";

/// A CSV table held in memory until it is written out.
#[derive(Debug, Clone)]
pub struct Table {
    columns: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &'static [&'static str]) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Header comments, then the header row and data rows.
    pub fn render(&self, command: &str, cfg: &SweepConfig) -> String {
        let mut out = provenance(command, cfg);
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        let bytes = w.into_inner().expect("in-memory flush");
        out.push_str(std::str::from_utf8(&bytes).expect("utf-8 fields"));
        out
    }
}

/// The `#` header shared by every output file.
pub fn provenance(command: &str, cfg: &SweepConfig) -> String {
    format!(
        "# cfvp {command}\n# config: {}\n# master_seed: {}\n",
        cfg.to_json(),
        cfg.master_seed
    )
}

pub fn trace_table(stages: &[StageRecord]) -> Table {
    let mut t = Table::new(&TRACE_COLUMNS);
    for s in stages {
        t.push(vec![
            s.stage.to_string(),
            s.newly_infected.to_string(),
            s.virus_removed.to_string(),
            s.cascade_removed_a.to_string(),
            s.cascade_removed_b.to_string(),
            s.edges_pruned.to_string(),
            s.f_i_current.to_string(),
            s.f_i_cumulative.to_string(),
            s.functional_fraction.to_string(),
        ]);
    }
    t
}

/// Creates `dir` if needed and writes `contents` to `dir/name`.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Edge list with the provenance header.
pub fn render_edge_list(g: &Graph, command: &str, cfg: &SweepConfig) -> String {
    let mut out = provenance(command, cfg);
    out.push_str(&format!("# nodes: {}\n", g.node_count()));
    out.push_str(&write_edge_list(g));
    out
}

pub fn read_edge_list(path: &Path) -> Result<Graph, CliError> {
    let text = read_file(path)?;
    load_edge_list(&text).map_err(|e| CliError::Input { path: path.into(), message: e.to_string() })
}

/// One row of `sweep_lambda.csv`.
#[derive(Debug, Clone, PartialEq, serde::Deserialize)]
pub struct SweepLambdaRow {
    pub k_a: usize,
    pub k_b: usize,
    pub strategy: String,
    pub q: f64,
    pub lambda: f64,
    pub mean_g: f64,
    pub std_g: f64,
    pub mean_total_infected: f64,
    pub realizations: usize,
}

/// Parses `sweep_lambda.csv`, skipping `#` comment lines.
pub fn read_sweep_lambda(path: &Path) -> Result<Vec<SweepLambdaRow>, CliError> {
    let text = read_file(path)?;
    let bad = |message: String| CliError::Input { path: path.into(), message };
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    for col in SWEEP_LAMBDA_COLUMNS {
        if !header.iter().any(|h| h == col) {
            return Err(bad(format!("missing column `{col}`")));
        }
    }
    reader
        .deserialize()
        .collect::<Result<Vec<SweepLambdaRow>, _>>()
        .map_err(|e| bad(e.to_string()))
}
