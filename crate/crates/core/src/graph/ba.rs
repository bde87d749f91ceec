use alloc::vec::Vec;

use rand::Rng;

use super::{Graph, GraphError};

/// Parameters of a Barabási–Albert graph: `n` nodes, `m` links per new node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegreeSpec {
    /// Node count.
    pub n: usize,
    /// Links attached by each node added after the seed clique.
    pub m: usize,
}

impl DegreeSpec {
    /// Checked constructor.
    pub fn new(n: usize, m: usize) -> Result<Self, GraphError> {
        let spec = DegreeSpec { n, m };
        spec.validate()?;
        Ok(spec)
    }

    /// Realises a target average degree `k` as `m = k / 2`.
    pub fn from_average_degree(n: usize, k: usize) -> Result<Self, GraphError> {
        if k == 0 || k % 2 != 0 {
            return Err(GraphError::InvalidAverageDegree(k));
        }
        DegreeSpec::new(n, k / 2)
    }

    /// Rejects `m == 0` and `m >= n`.
    pub fn validate(&self) -> Result<(), GraphError> {
        if self.m == 0 || self.m >= self.n {
            return Err(GraphError::InvalidSpec { n: self.n, m: self.m });
        }
        Ok(())
    }

    /// Edge count of every graph generated from this spec:
    /// `m(m-1)/2 + m(n-m)`.
    pub fn edge_count(&self) -> usize {
        self.m * (self.m - 1) / 2 + self.m * (self.n - self.m)
    }
}

/// Generates a Barabási–Albert scale-free graph.
///
/// The seed is the complete graph on nodes `0..m`, its edges added in
/// lexicographic order. Nodes `m..n` then arrive one at a time and each
/// attaches `m` edges by preferential attachment through an urn that holds
/// every edge endpoint seen so far:
///
/// * node `m` finds exactly `m` candidates and links to all of them in
///   ascending order without touching the random stream;
/// * every later node draws `rng.random_range(0..urn.len() as u64)` and
///   redraws whenever the picked node is already a target of this round;
/// * its edges are added in draw order, and only then is the urn extended
///   with `new, target` for each of them.
///
/// Adjacency lists are sorted by neighbor id before returning.
pub fn generate_ba<R: Rng + ?Sized>(spec: DegreeSpec, rng: &mut R) -> Result<Graph, GraphError> {
    spec.validate()?;
    let DegreeSpec { n, m } = spec;
    let mut g = Graph::new(n);
    let mut urn: Vec<usize> = Vec::with_capacity(2 * spec.edge_count());
    for u in 0..m {
        for v in u + 1..m {
            g.push_edge(u, v);
            urn.push(u);
            urn.push(v);
        }
    }
    let mut targets = Vec::with_capacity(m);
    for new in m..n {
        targets.clear();
        if new == m {
            targets.extend(0..m);
        } else {
            while targets.len() < m {
                let pick = urn[rng.random_range(0..urn.len() as u64) as usize];
                if !targets.contains(&pick) {
                    targets.push(pick);
                }
            }
        }
        for &t in &targets {
            g.push_edge(new, t);
            urn.push(new);
            urn.push(t);
        }
    }
    g.sort_adjacency();
    Ok(g)
}
