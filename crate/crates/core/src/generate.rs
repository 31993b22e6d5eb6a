//! Instance generators. All are deterministic given their parameters.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenSpec {
    /// Random connected graph: a random labelled tree plus distinct extra
    /// edges.
    Gnm { n: usize, m: usize, seed: u64 },
    Path { n: usize },
    Cycle { n: usize },
    /// Node 0 joined to every other node.
    Star { n: usize },
    Grid { rows: usize, cols: usize },
    /// Recursive apex family: a spanning tree of degree `q` exists while the
    /// best has degree at most 3.
    Lot { q: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("need at least {0} node(s)")]
    TooFewNodes(usize),
    #[error("m = {m} is outside [{lo}, {hi}]")]
    EdgeCount { m: usize, lo: usize, hi: usize },
    #[error("q = {0} is too large")]
    TooDeep(usize),
}

pub fn generate(spec: &GenSpec) -> Result<Graph, GenError> {
    match *spec {
        GenSpec::Gnm { n, m, seed } => gnm(n, m, seed),
        GenSpec::Path { n } => {
            need(n, 1)?;
            Ok(Graph::from_edges(n, &(1..n).map(|i| (i - 1, i)).collect::<Vec<_>>()))
        }
        GenSpec::Cycle { n } => {
            need(n, 3)?;
            let mut e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
            e.push((n - 1, 0));
            Ok(Graph::from_edges(n, &e))
        }
        GenSpec::Star { n } => {
            need(n, 1)?;
            Ok(Graph::from_edges(n, &(1..n).map(|i| (0, i)).collect::<Vec<_>>()))
        }
        GenSpec::Grid { rows, cols } => {
            need(rows * cols, 1)?;
            let id = |r: usize, c: usize| r * cols + c;
            let mut e = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    if c + 1 < cols {
                        e.push((id(r, c), id(r, c + 1)));
                    }
                    if r + 1 < rows {
                        e.push((id(r, c), id(r + 1, c)));
                    }
                }
            }
            Ok(Graph::from_edges(rows * cols, &e))
        }
        GenSpec::Lot { q } => Ok(lot(q)?.graph),
    }
}

fn need(n: usize, lo: usize) -> Result<(), GenError> {
    if n < lo {
        Err(GenError::TooFewNodes(lo))
    } else {
        Ok(())
    }
}

/// Random tree from a Prüfer sequence, then `m - (n - 1)` distinct random
/// non-tree edges. Tree edges come first in edge order.
pub fn gnm(n: usize, m: usize, seed: u64) -> Result<Graph, GenError> {
    need(n, 1)?;
    let hi = n * (n - 1) / 2;
    if m + 1 < n || m > hi {
        return Err(GenError::EdgeCount { m, lo: n - 1, hi });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = random_tree(n, &mut rng);
    let mut present: HashSet<(usize, usize)> = edges.iter().copied().collect();
    let extra = m - edges.len();
    if extra * 2 > hi {
        let mut rest: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|p| !present.contains(p))
            .collect();
        rest.shuffle(&mut rng);
        edges.extend_from_slice(&rest[..extra]);
    } else {
        while edges.len() < m {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            let p = (a.min(b), a.max(b));
            if a != b && present.insert(p) {
                edges.push(p);
            }
        }
    }
    Ok(Graph::from_edges(n, &edges))
}

fn random_tree(n: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    if n < 2 {
        return Vec::new();
    }
    if n == 2 {
        return vec![(0, 1)];
    }
    let code: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &c in &code {
        degree[c] += 1;
    }
    let mut leaves: std::collections::BTreeSet<usize> =
        (0..n).filter(|&v| degree[v] == 1).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &c in &code {
        let leaf = leaves.pop_first().expect("a leaf always exists");
        edges.push((leaf.min(c), leaf.max(c)));
        degree[c] -= 1;
        if degree[c] == 1 {
            leaves.insert(c);
        }
    }
    let a = leaves.pop_first().expect("two leaves remain");
    let b = leaves.pop_first().expect("two leaves remain");
    edges.push((a, b));
    edges
}

/// The apex family together with its degree-`q` tree and its degree-3 tree.
#[derive(Debug, Clone)]
pub struct Lot {
    pub graph: Graph,
    /// Apex joined to every copy's apex, recursively.
    pub bad_tree: Vec<(usize, usize)>,
    /// Apex joined to the first copy, copies chained apex to apex.
    pub good_tree: Vec<(usize, usize)>,
}

/// Nodes of the depth-`q` apex graph: `1 + q · n(q-1)`.
pub fn lot_size(q: usize) -> usize {
    (1..=q).fold(1, |n, i| 1 + i * n)
}

/// Builds the depth-`q` apex graph. Nodes are numbered in preorder: the apex
/// first, then each copy in turn.
pub fn lot(q: usize) -> Result<Lot, GenError> {
    if q > 9 {
        return Err(GenError::TooDeep(q));
    }
    let mut edges = Vec::new();
    let mut bad = Vec::new();
    let mut good = Vec::new();
    let mut next = 0;
    build_lot(q, &mut next, &mut edges, &mut bad, &mut good);
    Ok(Lot {
        graph: Graph::from_edges(next, &edges),
        bad_tree: bad,
        good_tree: good,
    })
}

fn build_lot(
    i: usize,
    next: &mut usize,
    edges: &mut Vec<(usize, usize)>,
    bad: &mut Vec<(usize, usize)>,
    good: &mut Vec<(usize, usize)>,
) -> usize {
    let apex = *next;
    *next += 1;
    let mut prev: Option<usize> = None;
    for j in 0..i {
        let child = build_lot(i - 1, next, edges, bad, good);
        edges.push((apex, child));
        bad.push((apex, child));
        if j == 0 {
            good.push((apex, child));
        }
        if let Some(p) = prev {
            edges.push((p, child));
            good.push((p, child));
        }
        prev = Some(child);
    }
    apex
}
