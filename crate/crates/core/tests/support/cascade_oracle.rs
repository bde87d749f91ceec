//! Literal mutual-giant-component recomputation, used as a reference for
//! `CoupledSystem::cascade`.
//!
//! It keeps plain alive masks and edge lists and recomputes components from
//! scratch with a breadth-first search on every half-step.
#![allow(dead_code)]

use std::collections::VecDeque;

use cfvp_core::rng::SimRng;
use cfvp_core::{CoupledSystem, Graph};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

pub struct Oracle {
    pub n: usize,
    pub edges_a: Vec<(usize, usize)>,
    pub edges_b: Vec<(usize, usize)>,
    pub coupling: Vec<usize>,
    pub alive_a: Vec<bool>,
    pub alive_b: Vec<bool>,
}

/// Largest component of the alive subgraph, ties broken toward the
/// component holding the smallest node id. Empty if it has fewer than two
/// nodes.
fn giant(n: usize, edges: &[(usize, usize)], alive: &[bool]) -> Vec<bool> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        if alive[u] && alive[v] {
            adj[u].push(v);
            adj[v].push(u);
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut best: Option<(usize, usize)> = None;
    for start in 0..n {
        if !alive[start] || label[start] != usize::MAX {
            continue;
        }
        let mut size = 0;
        let mut queue = VecDeque::from([start]);
        label[start] = start;
        while let Some(u) = queue.pop_front() {
            size += 1;
            for &v in &adj[u] {
                if label[v] == usize::MAX {
                    label[v] = start;
                    queue.push_back(v);
                }
            }
        }
        if best.is_none_or(|(_, s)| size > s) {
            best = Some((start, size));
        }
    }
    match best {
        Some((root, size)) if size >= 2 => label.iter().map(|&l| l == root).collect(),
        _ => vec![false; n],
    }
}

impl Oracle {
    pub fn new(a: &Graph, b: &Graph, coupling: Vec<usize>) -> Self {
        let n = a.node_count();
        Oracle {
            n,
            edges_a: a.edges().collect(),
            edges_b: b.edges().collect(),
            coupling,
            alive_a: (0..n).map(|i| a.is_alive(i)).collect(),
            alive_b: (0..n).map(|i| b.is_alive(i)).collect(),
        }
    }

    /// Fails `seeds` in A and alternates B-then-A pruning until neither
    /// layer changes.
    pub fn cascade(&mut self, seeds: &[usize]) {
        for &s in seeds {
            self.alive_a[s] = false;
        }
        loop {
            let before = (self.alive_a.clone(), self.alive_b.clone());
            for i in 0..self.n {
                if !self.alive_a[i] {
                    self.alive_b[self.coupling[i]] = false;
                }
            }
            let gb = giant(self.n, &self.edges_b, &self.alive_b);
            self.alive_b = gb;
            for i in 0..self.n {
                if !self.alive_b[self.coupling[i]] {
                    self.alive_a[i] = false;
                }
            }
            let ga = giant(self.n, &self.edges_a, &self.alive_a);
            self.alive_a = ga;
            if (self.alive_a.clone(), self.alive_b.clone()) == before {
                break;
            }
        }
    }
}

/// A random pair of layers on `n` nodes with edge probability `p` and a
/// random coupling (identity half of the time).
pub fn random_system(rng: &mut SimRng) -> CoupledSystem {
    let n = rng.random_range(1..=20usize);
    let layer = |rng: &mut SimRng| {
        let p: f64 = rng.random_range(0.05..0.5);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        Graph::from_edges(n, edges).unwrap()
    };
    let a = layer(rng);
    let b = layer(rng);
    let mut coupling: Vec<usize> = (0..n).collect();
    if rng.random::<bool>() {
        coupling.shuffle(rng);
    }
    CoupledSystem::with_coupling(a, b, coupling).unwrap()
}

/// Random subset of the functional A-nodes.
pub fn random_seeds(sys: &CoupledSystem, rng: &mut SimRng) -> Vec<usize> {
    let alive: Vec<usize> = (0..sys.node_count()).filter(|&i| sys.is_functional(i)).collect();
    let k = rng.random_range(0..=alive.len().min(4));
    alive.choose_multiple(rng, k).copied().collect()
}

/// Runs `rounds` successive cascades on a random system and compares each
/// fixed point with the oracle. Returns a description of the first mismatch.
pub fn check_one(rng: &mut SimRng, rounds: usize) -> Result<(), String> {
    let mut sys = random_system(rng);
    let coupling = (0..sys.node_count()).map(|i| sys.partner(i)).collect();
    let mut oracle = Oracle::new(sys.layer_a(), sys.layer_b(), coupling);
    for round in 0..rounds {
        let seeds = random_seeds(&sys, rng);
        let before_a: Vec<bool> = (0..sys.node_count()).map(|i| sys.layer_a().is_alive(i)).collect();
        let before_b: Vec<bool> = (0..sys.node_count()).map(|i| sys.layer_b().is_alive(i)).collect();
        let report = sys.cascade(&seeds).map_err(|e| e.to_string())?;
        oracle.cascade(&seeds);
        let got_a: Vec<bool> = (0..sys.node_count()).map(|i| sys.layer_a().is_alive(i)).collect();
        let got_b: Vec<bool> = (0..sys.node_count()).map(|i| sys.layer_b().is_alive(i)).collect();
        if got_a != oracle.alive_a || got_b != oracle.alive_b {
            return Err(format!(
                "round {round}, seeds {seeds:?}: A {got_a:?} vs {:?}, B {got_b:?} vs {:?}",
                oracle.alive_a, oracle.alive_b
            ));
        }
        let mut removed_a = report.removed_a.clone();
        removed_a.sort_unstable();
        let expected_a: Vec<usize> = (0..sys.node_count()).filter(|&i| before_a[i] && !got_a[i]).collect();
        let mut removed_b = report.removed_b.clone();
        removed_b.sort_unstable();
        let expected_b: Vec<usize> = (0..sys.node_count()).filter(|&i| before_b[i] && !got_b[i]).collect();
        if removed_a != expected_a || removed_b != expected_b {
            return Err(format!("round {round}: report {report:?} does not list the removed nodes"));
        }
    }
    Ok(())
}
