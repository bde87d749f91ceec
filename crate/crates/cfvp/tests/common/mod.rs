//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use cfvp::output;
use cfvp_core::{run_with_forced_outcomes, CoupledSystem, IsolationStrategy, RunResult, TransmissionScript};

/// Initial infection of the reference run (A2).
pub const REFERENCE_INITIAL: usize = 1;

pub fn reference_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/reference")
}

pub fn reference_system() -> CoupledSystem {
    let dir = reference_dir();
    let a = output::read_edge_list(&dir.join("layer_a.edges")).unwrap();
    let b = output::read_edge_list(&dir.join("layer_b.edges")).unwrap();
    CoupledSystem::from_layers(a, b).unwrap()
}

pub fn reference_script() -> TransmissionScript {
    let text = std::fs::read_to_string(reference_dir().join("script.csv")).unwrap();
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let attempts: Vec<((usize, usize), bool)> = reader
        .deserialize::<(usize, usize, usize, bool)>()
        .map(|row| {
            let (_stage, from, to, ok) = row.unwrap();
            ((from, to), ok)
        })
        .collect();
    TransmissionScript::from_attempts(attempts).with_initial(REFERENCE_INITIAL)
}

/// Replays the scripted reference run.
pub fn reference_run() -> (RunResult, CoupledSystem, TransmissionScript) {
    let mut sys = reference_system();
    let mut script = reference_script();
    let run = run_with_forced_outcomes(&mut sys, &IsolationStrategy::NONE, &mut script, 0).unwrap();
    (run, sys, script)
}

/// Data rows of a CSV file, comments and header dropped.
pub fn data_rows(text: &str) -> Vec<String> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).map(str::to_string).collect()
}

pub fn cfvp_bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_cfvp"))
}
