//! Undirected simple graphs for one network layer.
//!
//! Nodes and edges are never reindexed. Removing either flips a mask, so node
//! ids stay stable for the whole lifetime of a realization.

mod ba;
mod edge_list;
mod union_find;

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

pub use ba::{generate_ba, DegreeSpec};
pub use edge_list::{load_edge_list, write_edge_list, ParseError, ParseErrorKind};
pub use union_find::UnionFind;

/// One entry of a node's adjacency list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    /// The node on the other end.
    pub neighbor: usize,
    /// Index into the graph's edge table.
    pub edge: usize,
}

/// Errors raised by graph construction and mutation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    /// Barabási–Albert parameters with `m == 0` or `m >= n`.
    InvalidSpec {
        /// Requested node count.
        n: usize,
        /// Requested attachment count.
        m: usize,
    },
    /// An average degree that is zero or odd cannot be realised as `2m`.
    InvalidAverageDegree(usize),
    /// Edge `(u, u)`.
    SelfLoop(usize),
    /// The same unordered pair was given twice.
    DuplicateEdge(usize, usize),
    /// Endpoint outside `0..n`.
    NodeOutOfRange {
        /// Offending id.
        node: usize,
        /// Node count of the graph.
        n: usize,
    },
    /// No alive edge joins the two nodes.
    MissingEdge(usize, usize),
    /// An alive edge touches a dead node.
    DanglingEdge(usize, usize),
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::InvalidSpec { n, m } => {
                write!(f, "invalid degree spec: need 1 <= m < n, got n={n}, m={m}")
            }
            GraphError::InvalidAverageDegree(k) => {
                write!(f, "average degree must be a positive even integer, got {k}")
            }
            GraphError::SelfLoop(u) => write!(f, "self-loop on node {u}"),
            GraphError::DuplicateEdge(u, v) => write!(f, "duplicate edge {u}-{v}"),
            GraphError::NodeOutOfRange { node, n } => {
                write!(f, "node {node} out of range for a graph with {n} nodes")
            }
            GraphError::MissingEdge(u, v) => write!(f, "no alive edge between {u} and {v}"),
            GraphError::DanglingEdge(u, v) => write!(f, "alive edge {u}-{v} touches a dead node"),
        }
    }
}

impl core::error::Error for GraphError {}

/// Static undirected simple graph with alive masks on nodes and edges.
///
/// A dead node always has every incident edge dead. The degree of a node is
/// the number of alive incident edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<Link>>,
    edges: Vec<(usize, usize)>,
    alive_node: Vec<bool>,
    alive_edge: Vec<bool>,
    alive_nodes: usize,
    alive_edges: usize,
}

impl Graph {
    /// Creates `n` alive nodes and no edges.
    pub fn new(n: usize) -> Self {
        Graph {
            adjacency: vec![Vec::new(); n],
            edges: Vec::new(),
            alive_node: vec![true; n],
            alive_edge: Vec::new(),
            alive_nodes: n,
            alive_edges: 0,
        }
    }

    /// Builds a graph from unordered pairs, rejecting self-loops, duplicates
    /// and out-of-range endpoints.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Graph::new(n);
        for (u, v) in edges {
            g.check_new_edge(u, v)?;
            g.push_edge(u, v);
        }
        g.sort_adjacency();
        Ok(g)
    }

    fn check_new_edge(&self, u: usize, v: usize) -> Result<(), GraphError> {
        let n = self.node_count();
        for node in [u, v] {
            if node >= n {
                return Err(GraphError::NodeOutOfRange { node, n });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if self.find_link(u, v).is_some() {
            return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
        }
        Ok(())
    }

    /// Appends an edge without validation. Callers keep the graph simple.
    pub(crate) fn push_edge(&mut self, u: usize, v: usize) {
        let id = self.edges.len();
        self.edges.push((u.min(v), u.max(v)));
        self.alive_edge.push(true);
        self.alive_edges += 1;
        self.adjacency[u].push(Link { neighbor: v, edge: id });
        self.adjacency[v].push(Link { neighbor: u, edge: id });
    }

    /// Sorts every adjacency list by neighbor id. Infection attempts and
    /// pruning walk neighbors in this order.
    pub(crate) fn sort_adjacency(&mut self) {
        for links in &mut self.adjacency {
            links.sort_unstable_by_key(|l| l.neighbor);
        }
    }

    fn find_link(&self, u: usize, v: usize) -> Option<Link> {
        let links = self.adjacency.get(u)?;
        // Lists are sorted except while a graph is being built.
        links.iter().copied().find(|l| l.neighbor == v)
    }

    /// Total number of nodes, alive or not.
    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Total number of edges ever added, alive or not.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Number of alive nodes.
    pub fn alive_node_count(&self) -> usize {
        self.alive_nodes
    }

    /// Number of alive edges.
    pub fn alive_edge_count(&self) -> usize {
        self.alive_edges
    }

    /// Whether node `i` is alive. Out-of-range ids are reported dead.
    pub fn is_alive(&self, i: usize) -> bool {
        self.alive_node.get(i).copied().unwrap_or(false)
    }

    /// Whether edge `e` is alive.
    pub fn is_edge_alive(&self, e: usize) -> bool {
        self.alive_edge[e]
    }

    /// Endpoints of edge `e`, smaller id first.
    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    /// All links of `i`, including dead ones.
    pub fn links(&self, i: usize) -> &[Link] {
        &self.adjacency[i]
    }

    /// Alive links of `i` in ascending neighbor order.
    pub fn alive_links(&self, i: usize) -> impl Iterator<Item = Link> + '_ {
        self.adjacency[i]
            .iter()
            .copied()
            .filter(move |l| self.alive_edge[l.edge])
    }

    /// Alive neighbors of `i` in ascending order.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.alive_links(i).map(|l| l.neighbor)
    }

    /// Number of alive edges incident to `i`.
    pub fn degree(&self, i: usize) -> usize {
        self.alive_links(i).count()
    }

    /// Degree of every node.
    pub fn degrees(&self) -> Vec<usize> {
        (0..self.node_count()).map(|i| self.degree(i)).collect()
    }

    /// `2 * alive edges / n`.
    pub fn average_degree(&self) -> f64 {
        if self.node_count() == 0 {
            return 0.0;
        }
        2.0 * self.alive_edges as f64 / self.node_count() as f64
    }

    /// Alive edges as `(u, v)` with `u < v`, in edge-id order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges
            .iter()
            .zip(&self.alive_edge)
            .filter(|(_, &alive)| alive)
            .map(|(&e, _)| e)
    }

    /// Whether an alive edge joins `u` and `v`.
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.find_link(u, v)
            .is_some_and(|l| self.alive_edge[l.edge])
    }

    /// Marks the edge between `u` and `v` dead. Node masks are untouched.
    pub fn remove_edge(&mut self, u: usize, v: usize) -> Result<usize, GraphError> {
        match self.find_link(u, v) {
            Some(l) if self.alive_edge[l.edge] => {
                self.alive_edge[l.edge] = false;
                self.alive_edges -= 1;
                Ok(l.edge)
            }
            _ => Err(GraphError::MissingEdge(u, v)),
        }
    }

    /// Kills node `i` and every incident edge. Returns `false` if the node
    /// was already dead.
    pub fn remove_node(&mut self, i: usize) -> bool {
        if !self.alive_node[i] {
            return false;
        }
        self.alive_node[i] = false;
        self.alive_nodes -= 1;
        for l in &self.adjacency[i] {
            if self.alive_edge[l.edge] {
                self.alive_edge[l.edge] = false;
                self.alive_edges -= 1;
            }
        }
        true
    }

    /// Labels alive nodes by connected component over alive edges.
    ///
    /// Returns the union-find forest; dead nodes are singleton sets that the
    /// caller must skip.
    pub fn components(&self) -> UnionFind {
        let mut sets = UnionFind::new(self.node_count());
        for (u, v) in self.edges() {
            sets.union(u, v);
        }
        sets
    }

    /// The largest connected component of the alive subgraph, sorted.
    ///
    /// Ties go to the component holding the smallest node id. An empty or
    /// fully dead graph yields an empty vector.
    pub fn giant_component(&self) -> Vec<usize> {
        let mask = self.giant_component_mask();
        (0..self.node_count()).filter(|&i| mask[i]).collect()
    }

    /// [`Graph::giant_component`] as a membership mask.
    pub fn giant_component_mask(&self) -> Vec<bool> {
        let n = self.node_count();
        let mut sets = self.components();
        let mut best_root = None;
        let mut best_size = 0;
        // Ascending scan: the first root reaching a strictly larger size is
        // also the one whose component has the smallest id among equals.
        for i in 0..n {
            if !self.alive_node[i] {
                continue;
            }
            let root = sets.find(i);
            let size = sets.size_of(root);
            if size > best_size {
                best_size = size;
                best_root = Some(root);
            }
        }
        let mut mask = vec![false; n];
        if let Some(best) = best_root {
            for (i, slot) in mask.iter_mut().enumerate() {
                *slot = self.alive_node[i] && sets.find(i) == best;
            }
        }
        mask
    }

    /// Whether all alive nodes form one component (vacuously true when none
    /// are alive).
    pub fn is_connected(&self) -> bool {
        let mut sets = self.components();
        let mut root = None;
        for i in 0..self.node_count() {
            if !self.alive_node[i] {
                continue;
            }
            let r = sets.find(i);
            match root {
                None => root = Some(r),
                Some(existing) if existing != r => return false,
                Some(_) => {}
            }
        }
        true
    }

    /// Verifies the structural invariants: simple graph, valid endpoints,
    /// dead nodes without alive edges, and consistent counters.
    pub fn check_invariants(&self) -> Result<(), GraphError> {
        let n = self.node_count();
        let mut seen = alloc::collections::BTreeSet::new();
        for (id, &(u, v)) in self.edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(GraphError::NodeOutOfRange { node: u.max(v), n });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if !seen.insert((u, v)) {
                return Err(GraphError::DuplicateEdge(u, v));
            }
            if self.alive_edge[id] && !(self.alive_node[u] && self.alive_node[v]) {
                return Err(GraphError::DanglingEdge(u, v));
            }
        }
        debug_assert_eq!(
            self.alive_nodes,
            self.alive_node.iter().filter(|&&a| a).count()
        );
        debug_assert_eq!(
            self.alive_edges,
            self.alive_edge.iter().filter(|&&a| a).count()
        );
        Ok(())
    }
}
