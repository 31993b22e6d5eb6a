//! Immutable undirected input graph and the edge-list text format.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("graph must have at least one node")]
    Empty,
    #[error("node {node} out of range for n = {n}")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("header announces {expected} edges but {found} were listed")]
    EdgeCount { expected: usize, found: usize },
    #[error("graph is not connected")]
    Disconnected,
}

/// Connected simple graph on nodes `0..n`.
///
/// Edge ids follow load order after duplicates and self-loops are dropped,
/// and every adjacency list is sorted by edge id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<(usize, usize)>>,
    index: HashMap<(usize, usize), usize>,
}

/// Result of [`load_graph`]: the graph plus the number of input lines dropped
/// as duplicates or self-loops.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub graph: Graph,
    pub dropped: usize,
}

fn key(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl Graph {
    /// Builds a graph, dropping self-loops and repeated pairs. Returns the
    /// graph and how many pairs were dropped.
    pub fn new(
        n: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<(Graph, usize), GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut edges = Vec::new();
        let mut index = HashMap::new();
        let mut dropped = 0;
        for (u, v) in pairs {
            for x in [u, v] {
                if x >= n {
                    return Err(GraphError::NodeOutOfRange { node: x, n });
                }
            }
            if u == v || index.contains_key(&key(u, v)) {
                dropped += 1;
                continue;
            }
            index.insert(key(u, v), edges.len());
            edges.push((u, v));
        }
        let mut adj = vec![Vec::new(); n];
        for (e, &(u, v)) in edges.iter().enumerate() {
            adj[u].push((v, e));
            adj[v].push((u, e));
        }
        let g = Graph {
            n,
            edges,
            adj,
            index,
        };
        if !g.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok((g, dropped))
    }

    /// Convenience constructor for code that knows its input is well formed.
    ///
    /// # Panics
    /// Panics if the pairs do not describe a connected graph on `0..n`.
    pub fn from_edges(n: usize, pairs: &[(usize, usize)]) -> Graph {
        Graph::new(n, pairs.iter().copied())
            .expect("invalid graph")
            .0
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.n
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    /// `(neighbor, edge id)` pairs in edge-id order.
    pub fn neighbors(&self, u: usize) -> &[(usize, usize)] {
        &self.adj[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        self.index.get(&key(u, v)).copied()
    }

    /// The endpoint of `e` that is not `u`.
    pub fn other(&self, e: usize, u: usize) -> usize {
        let (a, b) = self.edges[e];
        if a == u {
            b
        } else {
            a
        }
    }
}

/// Parses the edge-list format: a header `n m`, then `m` lines `u v`.
/// Blank lines and lines starting with `#` are ignored.
pub fn load_graph(text: &str) -> Result<Loaded, GraphError> {
    let (n, pairs) = parse_edge_list(text)?;
    let (graph, dropped) = Graph::new(n, pairs)?;
    Ok(Loaded { graph, dropped })
}

/// The raw header count and pairs of an edge-list file, without range,
/// duplicate or connectivity checks.
pub fn parse_edge_list(text: &str) -> Result<(usize, Vec<(usize, usize)>), GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or(GraphError::Parse {
        line: 0,
        msg: "missing header".into(),
    })?;
    let (n, m) = parse_pair(hline, header)?;
    let mut pairs = Vec::with_capacity(m);
    for (line, l) in lines {
        pairs.push(parse_pair(line, l)?);
    }
    if pairs.len() != m {
        return Err(GraphError::EdgeCount {
            expected: m,
            found: pairs.len(),
        });
    }
    Ok((n, pairs))
}

pub(crate) fn parse_pair(line: usize, text: &str) -> Result<(usize, usize), GraphError> {
    let mut it = text.split_whitespace();
    let mut next = || -> Result<usize, GraphError> {
        let tok = it.next().ok_or_else(|| GraphError::Parse {
            line,
            msg: "expected two integers".into(),
        })?;
        tok.parse().map_err(|_| GraphError::Parse {
            line,
            msg: format!("not a non-negative integer: {tok:?}"),
        })
    };
    let a = next()?;
    let b = next()?;
    if it.next().is_some() {
        return Err(GraphError::Parse {
            line,
            msg: "trailing tokens".into(),
        });
    }
    Ok((a, b))
}

/// Writes the graph in the same format [`load_graph`] reads.
pub fn write_edge_list(g: &Graph) -> String {
    write_pairs(g.n(), g.edges())
}

/// Writes `n` and an arbitrary list of pairs in edge-list format.
pub fn write_pairs(n: usize, pairs: &[(usize, usize)]) -> String {
    let mut s = String::with_capacity(8 * (pairs.len() + 1));
    let _ = writeln!(s, "{} {}", n, pairs.len());
    for &(u, v) in pairs {
        let _ = writeln!(s, "{u} {v}");
    }
    s
}
