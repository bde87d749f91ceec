use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write;

use super::Graph;

/// What went wrong on a line of an edge list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// A token that is not a non-negative integer.
    BadToken(String),
    /// A data line without exactly two tokens.
    WrongArity(usize),
    /// `u u`.
    SelfLoop(usize),
    /// The unordered pair appeared earlier.
    DuplicateEdge(usize, usize),
}

/// Edge-list parse failure with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// 1-based line number.
    pub line: usize,
    /// The failure.
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: ", self.line)?;
        match &self.kind {
            ParseErrorKind::BadToken(t) => write!(f, "not a node id: {t:?}"),
            ParseErrorKind::WrongArity(k) => write!(f, "expected 2 node ids, found {k} tokens"),
            ParseErrorKind::SelfLoop(u) => write!(f, "self-loop on node {u}"),
            ParseErrorKind::DuplicateEdge(u, v) => write!(f, "duplicate edge {u} {v}"),
        }
    }
}

impl core::error::Error for ParseError {}

/// Parses whitespace-separated `u v` pairs, one per line.
///
/// Blank lines and lines whose first non-blank character is `#` are skipped.
/// The graph spans ids `0..=max_id`.
pub fn load_edge_list(text: &str) -> Result<Graph, ParseError> {
    let mut pairs = Vec::new();
    let mut seen = BTreeSet::new();
    let mut max_id = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let mut ids = [0usize; 2];
        for (slot, tok) in ids.iter_mut().zip(&tokens) {
            *slot = tok.parse().map_err(|_| ParseError {
                line,
                kind: ParseErrorKind::BadToken(String::from(*tok)),
            })?;
        }
        if tokens.len() != 2 {
            return Err(ParseError { line, kind: ParseErrorKind::WrongArity(tokens.len()) });
        }
        let [u, v] = ids;
        if u == v {
            return Err(ParseError { line, kind: ParseErrorKind::SelfLoop(u) });
        }
        let key = (u.min(v), u.max(v));
        if !seen.insert(key) {
            return Err(ParseError { line, kind: ParseErrorKind::DuplicateEdge(u, v) });
        }
        max_id = max_id.max(Some(u.max(v)));
        pairs.push((u, v));
    }
    let n = max_id.map_or(0, |m| m + 1);
    // Pairs were already checked, so construction cannot fail.
    Ok(Graph::from_edges(n, pairs).expect("validated edge list"))
}

/// Canonical text form of the alive edges: sorted `u v` lines with `u < v`,
/// each terminated by `\n`.
pub fn write_edge_list(g: &Graph) -> String {
    let mut edges: Vec<(usize, usize)> = g.edges().collect();
    edges.sort_unstable();
    let mut out = String::with_capacity(edges.len() * 10);
    for (u, v) in edges {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}
