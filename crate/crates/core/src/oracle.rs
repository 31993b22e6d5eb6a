//! Exhaustive references for small instances: optimal tree degree, bounded
//! degree feasibility, and the full set of short augmenting chains.

use thiserror::Error;

use crate::chains::{is_alternating_chain, is_augmenting_chain, Configuration};
use crate::graph::Graph;

/// Default node limit for the spanning-tree searches.
pub const TREE_LIMIT: usize = 12;
/// Node and length limits for chain enumeration.
pub const CHAIN_NODE_LIMIT: usize = 30;
pub const CHAIN_LEN_LIMIT: usize = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{n} nodes exceeds the limit of {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("chain length {len} exceeds the limit of {limit}")]
    TooLong { len: usize, limit: usize },
    #[error("graph is disconnected")]
    Disconnected,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub delta_star: usize,
    /// Edge ids of one optimal tree.
    pub tree: Vec<usize>,
    /// Search nodes visited across all probes.
    pub examined: u64,
}

/// Union-find with undo, for backtracking.
struct UndoDsu {
    parent: Vec<usize>,
    size: Vec<usize>,
    history: Vec<usize>,
}

impl UndoDsu {
    fn new(n: usize) -> Self {
        UndoDsu {
            parent: (0..n).collect(),
            size: vec![1; n],
            history: Vec::new(),
        }
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        self.history.push(b);
        true
    }

    fn undo(&mut self) {
        let b = self.history.pop().expect("undo without union");
        let a = self.parent[b];
        self.size[a] -= self.size[b];
        self.parent[b] = b;
    }
}

struct TreeSearch<'a> {
    g: &'a Graph,
    caps: &'a [usize],
    deg: Vec<usize>,
    dsu: UndoDsu,
    chosen: Vec<usize>,
    examined: u64,
}

impl TreeSearch<'_> {
    /// Can the chosen edges plus usable edges from `i` on still span?
    fn can_span(&self, i: usize) -> bool {
        let n = self.g.n();
        let mut parent: Vec<usize> = (0..n).map(|v| self.dsu.find(v)).collect();
        fn root(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut comps = n - self.chosen.len();
        for &(u, v) in &self.g.edges()[i..] {
            if self.deg[u] < self.caps[u] && self.deg[v] < self.caps[v] {
                let (a, b) = (root(&mut parent, u), root(&mut parent, v));
                if a != b {
                    parent[a] = b;
                    comps -= 1;
                }
            }
        }
        comps == 1
    }

    fn go(&mut self, i: usize) -> bool {
        self.examined += 1;
        let n = self.g.n();
        if self.chosen.len() + 1 == n {
            return true;
        }
        if i == self.g.m() || !self.can_span(i) {
            return false;
        }
        let (u, v) = self.g.edge(i);
        if self.deg[u] < self.caps[u] && self.deg[v] < self.caps[v] && self.dsu.union(u, v) {
            self.deg[u] += 1;
            self.deg[v] += 1;
            self.chosen.push(i);
            if self.go(i + 1) {
                return true;
            }
            self.chosen.pop();
            self.deg[u] -= 1;
            self.deg[v] -= 1;
            self.dsu.undo();
        }
        self.go(i + 1)
    }
}

fn guard(g: &Graph, limit: usize) -> Result<(), OracleError> {
    if g.n() > limit {
        Err(OracleError::TooLarge { n: g.n(), limit })
    } else {
        Ok(())
    }
}

/// A spanning tree with `deg(u) <= bounds[u]` for all `u`, if one exists,
/// plus the number of search nodes visited.
pub fn brute_force_bdst_with_limit(
    g: &Graph,
    bounds: &[usize],
    limit: usize,
) -> Result<(Option<Vec<usize>>, u64), OracleError> {
    guard(g, limit)?;
    let mut s = TreeSearch {
        g,
        caps: bounds,
        deg: vec![0; g.n()],
        dsu: UndoDsu::new(g.n()),
        chosen: Vec::new(),
        examined: 0,
    };
    let found = g.n() <= 1 || s.go(0);
    Ok((found.then_some(s.chosen), s.examined))
}

pub fn brute_force_bdst(g: &Graph, bounds: &[usize]) -> Result<Option<Vec<usize>>, OracleError> {
    brute_force_bdst_with_limit(g, bounds, TREE_LIMIT).map(|r| r.0)
}

/// Minimum possible maximum degree of a spanning tree.
pub fn brute_force_mdst_with_limit(g: &Graph, limit: usize) -> Result<OracleResult, OracleError> {
    guard(g, limit)?;
    let n = g.n();
    if n == 1 {
        return Ok(OracleResult {
            delta_star: 0,
            tree: Vec::new(),
            examined: 0,
        });
    }
    let mut examined = 0;
    for k in 1..n {
        let (tree, seen) = brute_force_bdst_with_limit(g, &vec![k; n], limit)?;
        examined += seen;
        if let Some(tree) = tree {
            return Ok(OracleResult {
                delta_star: k,
                tree,
                examined,
            });
        }
    }
    Err(OracleError::Disconnected)
}

pub fn brute_force_mdst(g: &Graph) -> Result<OracleResult, OracleError> {
    brute_force_mdst_with_limit(g, TREE_LIMIT)
}

/// Every augmenting chain of length at most `max_len`, as node sequences
/// `w0 z1 … z(l+1)`, sorted.
///
/// Prefixes are grown only while they stay alternating chains, which is a
/// prefix-closed property; each completed sequence is confirmed by the full
/// validator.
pub fn enumerate_chains(
    g: &Graph,
    config: &Configuration,
    max_len: usize,
) -> Result<Vec<Vec<usize>>, OracleError> {
    guard(g, CHAIN_NODE_LIMIT)?;
    if max_len > CHAIN_LEN_LIMIT {
        return Err(OracleError::TooLong {
            len: max_len,
            limit: CHAIN_LEN_LIMIT,
        });
    }
    let mut out = Vec::new();
    if max_len == 0 {
        return Ok(out);
    }
    let reducible: Vec<usize> = (0..g.n()).filter(|&v| config.dec.is_reducible(v)).collect();
    let mut seq = Vec::new();
    for &w0 in &reducible {
        seq.push(w0);
        if is_alternating_chain(g, config, &seq).is_ok() {
            extend(g, config, &reducible, max_len, &mut seq, &mut out);
        }
        seq.pop();
    }
    out.sort();
    Ok(out)
}

fn extend(
    g: &Graph,
    config: &Configuration,
    reducible: &[usize],
    max_len: usize,
    seq: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    let w = *seq.last().expect("prefix ends with a w");
    let len = seq.len().div_ceil(2);
    for &(z, e) in g.neighbors(w) {
        if config.forest.contains(e) {
            continue;
        }
        seq.push(z);
        if is_augmenting_chain(g, config, seq).is_ok() {
            out.push(seq.clone());
        }
        if len < max_len {
            for &next in reducible {
                seq.push(next);
                if is_alternating_chain(g, config, seq).is_ok() {
                    extend(g, config, reducible, max_len, seq, out);
                }
                seq.pop();
            }
        }
        seq.pop();
    }
}
