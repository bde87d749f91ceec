//! Two interdependent layers and the mutual giant-component cascade.
//!
//! Node `i` of layer A depends on node `coupling[i]` of layer B and the
//! other way round. A node stays functional only while its partner is
//! functional and it sits in the giant component of its own layer.
//!
//! A giant component needs at least two nodes. When every surviving node of
//! a layer is isolated, no giant component exists and the whole layer goes
//! down.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::graph::{generate_ba, DegreeSpec, Graph, GraphError};

/// Smallest component that still counts as a giant component.
pub const MIN_GIANT_SIZE: usize = 2;

/// Errors from building or cascading a [`CoupledSystem`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoupledError {
    /// Layers of different sizes.
    SizeMismatch {
        /// Nodes in layer A.
        a: usize,
        /// Nodes in layer B.
        b: usize,
    },
    /// The coupling is not a permutation of `0..n`.
    NotABijection,
    /// A seed failure names a node that is already nonfunctional.
    AlreadyFailed(usize),
    /// The system has pending topology changes and is not at a fixed point.
    NotSettled,
    /// Layer generation failed.
    Graph(GraphError),
}

impl fmt::Display for CoupledError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoupledError::SizeMismatch { a, b } => {
                write!(f, "layer sizes differ: A has {a} nodes, B has {b}")
            }
            CoupledError::NotABijection => f.write_str("coupling is not a bijection"),
            CoupledError::AlreadyFailed(i) => write!(f, "node A{i} is already nonfunctional"),
            CoupledError::NotSettled => f.write_str("system is not at a cascade fixed point"),
            CoupledError::Graph(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for CoupledError {}

impl From<GraphError> for CoupledError {
    fn from(e: GraphError) -> Self {
        CoupledError::Graph(e)
    }
}

/// Nodes removed by one call to [`CoupledSystem::cascade`], in removal order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CascadeReport {
    /// Half-steps (A to B or B to A) that removed at least one node.
    pub rounds: usize,
    /// Newly failed A-nodes, seeds first.
    pub removed_a: Vec<usize>,
    /// Newly failed B-nodes.
    pub removed_b: Vec<usize>,
}

impl CascadeReport {
    /// Whether the cascade removed nothing.
    pub fn is_empty(&self) -> bool {
        self.removed_a.is_empty() && self.removed_b.is_empty()
    }
}

/// Two equal-size layers coupled one-to-one.
///
/// The functional set is the set of alive A-nodes; at every fixed point the
/// alive B-nodes are exactly their partners.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledSystem {
    layer_a: Graph,
    layer_b: Graph,
    coupling: Vec<usize>,
    inverse: Vec<usize>,
    // A layer is dirty when nodes or edges were removed since it was last
    // reduced to its giant component.
    dirty_a: bool,
    dirty_b: bool,
}

impl CoupledSystem {
    /// Two independent Barabási–Albert layers with identity coupling, A
    /// generated first from the same stream. Both layers are connected, so
    /// every node starts functional.
    pub fn build<R: Rng + ?Sized>(
        spec_a: DegreeSpec,
        spec_b: DegreeSpec,
        rng: &mut R,
    ) -> Result<Self, CoupledError> {
        if spec_a.n != spec_b.n {
            return Err(CoupledError::SizeMismatch { a: spec_a.n, b: spec_b.n });
        }
        let a = generate_ba(spec_a, rng)?;
        let b = generate_ba(spec_b, rng)?;
        Ok(Self::connected_pair(a, b))
    }

    /// Wraps two generated layers that are known to be connected.
    pub(crate) fn connected_pair(a: Graph, b: Graph) -> Self {
        debug_assert!(a.is_connected() && b.is_connected());
        let n = a.node_count();
        CoupledSystem {
            layer_a: a,
            layer_b: b,
            coupling: (0..n).collect(),
            inverse: (0..n).collect(),
            dirty_a: false,
            dirty_b: false,
        }
    }

    /// Couples two arbitrary layers with the identity permutation.
    ///
    /// Partners of dead nodes are killed right away but nothing else is
    /// pruned. If either layer is not already a single giant component, the
    /// system starts unsettled and the first [`CoupledSystem::cascade`] call
    /// reduces it to its mutual giant component.
    pub fn from_layers(a: Graph, b: Graph) -> Result<Self, CoupledError> {
        let n = a.node_count();
        Self::with_coupling(a, b, (0..n).collect())
    }

    /// Couples A-node `i` with B-node `coupling[i]`.
    pub fn with_coupling(a: Graph, b: Graph, coupling: Vec<usize>) -> Result<Self, CoupledError> {
        let n = a.node_count();
        if b.node_count() != n {
            return Err(CoupledError::SizeMismatch { a: n, b: b.node_count() });
        }
        if coupling.len() != n {
            return Err(CoupledError::NotABijection);
        }
        let mut inverse = vec![usize::MAX; n];
        for (i, &p) in coupling.iter().enumerate() {
            if p >= n || inverse[p] != usize::MAX {
                return Err(CoupledError::NotABijection);
            }
            inverse[p] = i;
        }
        let mut sys = CoupledSystem {
            layer_a: a,
            layer_b: b,
            coupling,
            inverse,
            dirty_a: true,
            dirty_b: true,
        };
        // Dependency links act immediately: a node whose partner is already
        // dead cannot be functional.
        for i in 0..n {
            let p = sys.coupling[i];
            if !sys.layer_a.is_alive(i) {
                sys.layer_b.remove_node(p);
            } else if !sys.layer_b.is_alive(p) {
                sys.layer_a.remove_node(i);
            }
        }
        sys.dirty_a = !is_reduced(&sys.layer_a);
        sys.dirty_b = !is_reduced(&sys.layer_b);
        Ok(sys)
    }

    /// Number of node pairs.
    pub fn node_count(&self) -> usize {
        self.layer_a.node_count()
    }

    /// Layer A, where the virus spreads.
    pub fn layer_a(&self) -> &Graph {
        &self.layer_a
    }

    /// Layer B.
    pub fn layer_b(&self) -> &Graph {
        &self.layer_b
    }

    /// Mutable access to layer A. Marks the layer as needing a giant-component
    /// check at the next cascade.
    pub fn layer_a_mut(&mut self) -> &mut Graph {
        self.dirty_a = true;
        &mut self.layer_a
    }

    /// B-partner of A-node `i`.
    pub fn partner(&self, i: usize) -> usize {
        self.coupling[i]
    }

    /// A-partner of B-node `j`.
    pub fn partner_in_a(&self, j: usize) -> usize {
        self.inverse[j]
    }

    /// Whether the pair holding A-node `i` is functional.
    pub fn is_functional(&self, i: usize) -> bool {
        self.layer_a.is_alive(i)
    }

    /// Number of functional A-nodes.
    pub fn functional_count(&self) -> usize {
        self.layer_a.alive_node_count()
    }

    /// Whether the system is at a cascade fixed point.
    pub fn is_settled(&self) -> bool {
        !self.dirty_a && !self.dirty_b
    }

    /// Fraction of nodes in the mutual giant component, measured on layer A.
    pub fn giant_fraction(&self) -> Result<f64, CoupledError> {
        self.fraction_of(&self.layer_a)
    }

    /// The same fraction measured on layer B.
    pub fn giant_fraction_b(&self) -> Result<f64, CoupledError> {
        self.fraction_of(&self.layer_b)
    }

    fn fraction_of(&self, g: &Graph) -> Result<f64, CoupledError> {
        if !self.is_settled() {
            return Err(CoupledError::NotSettled);
        }
        let n = self.node_count();
        if n == 0 {
            return Ok(0.0);
        }
        Ok(g.alive_node_count() as f64 / n as f64)
    }

    /// Fails the given A-nodes and runs the mutual cascade to its fixed point.
    ///
    /// Each round kills the B-partners of newly dead A-nodes, reduces layer B
    /// to its giant component, kills the A-partners of newly dead B-nodes and
    /// reduces layer A to its giant component. Rounds repeat until one removes
    /// nothing. A layer that lost nothing since its last reduction is already
    /// a single component and is not recomputed.
    ///
    /// Duplicate seeds are ignored. A seed that is already nonfunctional is an
    /// error and leaves the system untouched.
    pub fn cascade(&mut self, seed_failures_a: &[usize]) -> Result<CascadeReport, CoupledError> {
        let mut seeds = seed_failures_a.to_vec();
        seeds.sort_unstable();
        seeds.dedup();
        if let Some(&dead) = seeds.iter().find(|&&i| !self.layer_a.is_alive(i)) {
            return Err(CoupledError::AlreadyFailed(dead));
        }
        let mut report = CascadeReport::default();
        // Keep caller order for the report.
        let mut seen = vec![false; self.node_count()];
        for &i in seed_failures_a {
            if !core::mem::replace(&mut seen[i], true) {
                self.layer_a.remove_node(i);
                report.removed_a.push(i);
            }
        }
        if !report.removed_a.is_empty() {
            self.dirty_a = true;
        }
        let mut pending_a = report.removed_a.clone();

        loop {
            // A -> B
            let mut newly_b = Vec::new();
            for i in pending_a.drain(..) {
                let p = self.coupling[i];
                if self.layer_b.remove_node(p) {
                    newly_b.push(p);
                }
            }
            if !newly_b.is_empty() {
                self.dirty_b = true;
            }
            if self.dirty_b {
                newly_b.extend(reduce_to_giant(&mut self.layer_b));
                self.dirty_b = false;
            }
            if !newly_b.is_empty() {
                report.rounds += 1;
            }
            report.removed_b.extend_from_slice(&newly_b);

            // B -> A
            let mut newly_a = Vec::new();
            for j in newly_b {
                let p = self.inverse[j];
                if self.layer_a.remove_node(p) {
                    newly_a.push(p);
                }
            }
            if !newly_a.is_empty() {
                self.dirty_a = true;
            }
            if self.dirty_a {
                newly_a.extend(reduce_to_giant(&mut self.layer_a));
                self.dirty_a = false;
            }
            if newly_a.is_empty() {
                break;
            }
            report.rounds += 1;
            report.removed_a.extend_from_slice(&newly_a);
            pending_a = newly_a;
        }
        Ok(report)
    }
}

/// Whether the alive part of `g` is empty or one giant component.
fn is_reduced(g: &Graph) -> bool {
    g.alive_node_count() == 0 || (g.alive_node_count() >= MIN_GIANT_SIZE && g.is_connected())
}

/// Kills every alive node outside the giant component and returns them in
/// ascending order.
fn reduce_to_giant(g: &mut Graph) -> Vec<usize> {
    let mask = g.giant_component_mask();
    let keep = mask.iter().filter(|&&m| m).count() >= MIN_GIANT_SIZE;
    let mut killed = Vec::new();
    for (i, &in_giant) in mask.iter().enumerate() {
        if g.is_alive(i) && !(keep && in_giant) {
            g.remove_node(i);
            killed.push(i);
        }
    }
    killed
}
