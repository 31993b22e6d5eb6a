//! Configurations `(F, M, D)` and augmenting chains over them.
//!
//! A chain `w0 z1 w1 … zl wl z(l+1)` re-hangs each block `T(wi←zi)` from
//! `w(i-1)` instead of `zi` and finally joins `wl` to `z(l+1)`, which merges
//! two trees. Degree room at every `wi` comes from degree reduction inside its
//! atom.

use std::collections::HashSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::counters::WorkCounters;
use crate::decomposition::{reduce_degree, Decomposition, Edit};
use crate::forest::Forest;
use crate::graph::Graph;

/// Forest, decomposition, dirty set and per-node degree bounds.
#[derive(Debug, Clone)]
pub struct Configuration {
    pub forest: Forest,
    pub dec: Decomposition,
    pub dirty: Vec<bool>,
    pub bounds: Vec<usize>,
    /// Re-validate every chain before applying it. Defaults to on in debug
    /// builds.
    pub verify_chains: bool,
}

impl Configuration {
    pub fn new(forest: Forest, dec: Decomposition, bounds: Vec<usize>) -> Configuration {
        let n = forest.n();
        Configuration {
            forest,
            dec,
            dirty: vec![false; n],
            bounds,
            verify_chains: cfg!(debug_assertions),
        }
    }

    pub fn n(&self) -> usize {
        self.forest.n()
    }

    /// Whether `v` can end a chain: reducible, or free with spare degree and
    /// not dirty.
    pub fn can_end_chain(&self, v: usize) -> bool {
        self.dec.is_reducible(v)
            || (self.dec.is_free(v)
                && self.forest.degree(v) <= self.bounds[v]
                && !self.dirty[v])
    }

    pub fn is_non_forest_edge(&self, g: &Graph, u: usize, v: usize) -> bool {
        g.edge_between(u, v).is_some_and(|e| !self.forest.contains(e))
    }

    /// The special molecule containing `w0`'s atom, if any.
    fn special_of(&self, v: usize) -> Option<usize> {
        let mid = self.dec.molecule_of(v)?;
        self.dec.molecule(mid).is_special().then_some(mid)
    }
}

/// Why a sequence is not a chain.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainFailure {
    #[error("sequence must alternate w z ... and end with a z")]
    Shape,
    #[error("nodes are not distinct")]
    NotDistinct,
    #[error("w0 is not in an atom of a special molecule")]
    FirstNotInSpecialAtom,
    #[error("w{0} is not in an atom")]
    NotInAtom(usize),
    #[error("T(w{0}<-z{0}) is not a block")]
    NotBlock(usize),
    #[error("w{0} lies inside block {1}")]
    InsideEarlierBlock(usize, usize),
    #[error("edge after w{0} is not a non-forest edge")]
    NotNonForestEdge(usize),
    #[error("last node lies inside block {0}")]
    LastInsideBlock(usize),
    #[error("last node is dirty")]
    Dirty,
    #[error("last node is neither reducible nor free with spare degree")]
    LastNotEligible,
    #[error("w{0} and the last node share an atom")]
    LastSharesAtom(usize),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChainError {
    #[error("chain is not valid for the current configuration: {0}")]
    Stale(ChainFailure),
}

/// `w[0..=l]`, `z[0..=l]` holding `z1..z(l+1)`, and `y[0..l]` holding
/// `y1..yl`, the first node after `zi` on the path to `wi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentingChain {
    pub w: Vec<usize>,
    pub z: Vec<usize>,
    pub y: Vec<usize>,
}

impl AugmentingChain {
    /// Number of inserted edges, `l + 1`.
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// `w0 z1 w1 … zl wl z(l+1)`.
    pub fn sequence(&self) -> Vec<usize> {
        interleave(&self.w, &self.z)
    }

    /// Validates `seq` against `config` and fills in the `y` nodes.
    pub fn resolve(
        g: &Graph,
        config: &Configuration,
        seq: &[usize],
    ) -> Result<AugmentingChain, ChainFailure> {
        let (w, z) = split(seq)?;
        let blocks = check_augmenting(g, config, &w, &z)?;
        let y = (1..w.len())
            .map(|i| {
                let zi = z[i - 1];
                config
                    .forest
                    .neighbors(zi)
                    .iter()
                    .map(|&(v, _)| v)
                    .find(|v| blocks[i].contains(v))
                    .expect("block touches its root")
            })
            .collect();
        Ok(AugmentingChain { w, z, y })
    }
}

fn interleave(w: &[usize], z: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(w.len() + z.len());
    for i in 0..w.len() {
        out.push(w[i]);
        if i < z.len() {
            out.push(z[i]);
        }
    }
    if z.len() > w.len() {
        out.push(z[w.len()]);
    }
    out
}

fn split(seq: &[usize]) -> Result<(Vec<usize>, Vec<usize>), ChainFailure> {
    if seq.len() < 2 || !seq.len().is_multiple_of(2) {
        return Err(ChainFailure::Shape);
    }
    let w = seq.iter().step_by(2).copied().collect();
    let z = seq.iter().skip(1).step_by(2).copied().collect();
    Ok((w, z))
}

/// Node set of `T(w←z)` if it is a block: `z` is non-reducible or a normal
/// root, and the subtree lies inside one molecule. Found by search from `w`
/// in the forest with `z` removed, stopping at the first foreign node.
fn block(config: &Configuration, w: usize, z: usize) -> Option<HashSet<usize>> {
    let dec = &config.dec;
    if w == z || !(dec.is_non_reducible(z) || dec.is_normal_root(z)) {
        return None;
    }
    let mol = dec.molecule_of(w)?;
    let mut seen = HashSet::from([w]);
    let mut stack = vec![w];
    let mut touches_z = false;
    while let Some(x) = stack.pop() {
        for &(y, _) in config.forest.neighbors(x) {
            if y == z {
                touches_z = true;
            } else if seen.insert(y) {
                if dec.molecule_of(y) != Some(mol) {
                    return None;
                }
                stack.push(y);
            }
        }
    }
    touches_z.then_some(seen)
}

/// Checks an alternating chain `w0 z1 … zl wl` (`z` holds `z1..zl`) and
/// returns its blocks, block 0 being the special molecule of `w0`.
fn check_alternating(
    g: &Graph,
    config: &Configuration,
    w: &[usize],
    z: &[usize],
) -> Result<Vec<HashSet<usize>>, ChainFailure> {
    let dec = &config.dec;
    let w0 = w[0];
    if !dec.is_reducible(w0) {
        return Err(ChainFailure::FirstNotInSpecialAtom);
    }
    let Some(sm) = config.special_of(w0) else {
        return Err(ChainFailure::FirstNotInSpecialAtom);
    };
    let mut blocks = vec![dec.molecule(sm).nodes.iter().copied().collect::<HashSet<_>>()];
    for i in 1..w.len() {
        if !config.is_non_forest_edge(g, w[i - 1], z[i - 1]) {
            return Err(ChainFailure::NotNonForestEdge(i - 1));
        }
        if !dec.is_reducible(w[i]) {
            return Err(ChainFailure::NotInAtom(i));
        }
        let b = block(config, w[i], z[i - 1]).ok_or(ChainFailure::NotBlock(i))?;
        if let Some(j) = blocks.iter().position(|bj| bj.contains(&w[i])) {
            return Err(ChainFailure::InsideEarlierBlock(i, j));
        }
        blocks.push(b);
    }
    Ok(blocks)
}

fn check_distinct(seq: &[usize]) -> Result<(), ChainFailure> {
    let mut seen = HashSet::new();
    if seq.iter().all(|v| seen.insert(*v)) {
        Ok(())
    } else {
        Err(ChainFailure::NotDistinct)
    }
}

fn check_last(
    g: &Graph,
    config: &Configuration,
    wl: usize,
    last: usize,
    l: usize,
) -> Result<(), ChainFailure> {
    if !config.is_non_forest_edge(g, wl, last) {
        return Err(ChainFailure::NotNonForestEdge(l));
    }
    if config.can_end_chain(last) {
        Ok(())
    } else if config.dec.is_free(last)
        && config.forest.degree(last) <= config.bounds[last]
        && config.dirty[last]
    {
        Err(ChainFailure::Dirty)
    } else {
        Err(ChainFailure::LastNotEligible)
    }
}

fn check_augmenting(
    g: &Graph,
    config: &Configuration,
    w: &[usize],
    z: &[usize],
) -> Result<Vec<HashSet<usize>>, ChainFailure> {
    check_distinct(&interleave(w, z))?;
    let l = w.len() - 1;
    let blocks = check_alternating(g, config, w, &z[..l])?;
    let last = z[l];
    if let Some(j) = blocks.iter().position(|b| b.contains(&last)) {
        return Err(ChainFailure::LastInsideBlock(j));
    }
    check_last(g, config, w[l], last, l)?;
    Ok(blocks)
}

/// Checks `w0 z1 w1 … zl wl`.
pub fn is_alternating_chain(
    g: &Graph,
    config: &Configuration,
    seq: &[usize],
) -> Result<(), ChainFailure> {
    if seq.is_empty() || seq.len().is_multiple_of(2) {
        return Err(ChainFailure::Shape);
    }
    check_distinct(seq)?;
    let w: Vec<usize> = seq.iter().step_by(2).copied().collect();
    let z: Vec<usize> = seq.iter().skip(1).step_by(2).copied().collect();
    check_alternating(g, config, &w, &z).map(|_| ())
}

/// Checks `w0 z1 w1 … zl wl z(l+1)`.
pub fn is_augmenting_chain(
    g: &Graph,
    config: &Configuration,
    seq: &[usize],
) -> Result<(), ChainFailure> {
    let (w, z) = split(seq)?;
    check_augmenting(g, config, &w, &z).map(|_| ())
}

/// Checks the relaxed conditions of a pseudo-chain: repeats allowed, block
/// exclusion dropped, but the last node may not share an atom with `wl`.
pub fn is_pseudo_chain(
    g: &Graph,
    config: &Configuration,
    seq: &[usize],
) -> Result<(), ChainFailure> {
    let (w, z) = split(seq)?;
    let dec = &config.dec;
    if !dec.is_reducible(w[0]) || config.special_of(w[0]).is_none() {
        return Err(ChainFailure::FirstNotInSpecialAtom);
    }
    let l = w.len() - 1;
    for i in 1..=l {
        if !config.is_non_forest_edge(g, w[i - 1], z[i - 1]) {
            return Err(ChainFailure::NotNonForestEdge(i - 1));
        }
        if !dec.is_reducible(w[i]) {
            return Err(ChainFailure::NotInAtom(i));
        }
        if block(config, w[i], z[i - 1]).is_none() {
            return Err(ChainFailure::NotBlock(i));
        }
    }
    check_last(g, config, w[l], z[l], l)?;
    if dec.atom_of(w[l]).is_some() && dec.atom_of(w[l]) == dec.atom_of(z[l]) {
        return Err(ChainFailure::LastSharesAtom(l));
    }
    Ok(())
}

/// Shortens a pseudo-chain until it is a genuine augmenting chain.
pub fn normalize_pseudo_chain(
    g: &Graph,
    config: &Configuration,
    seq: &[usize],
) -> Result<AugmentingChain, ChainFailure> {
    is_pseudo_chain(g, config, seq)?;
    let (mut w, mut z) = split(seq)?;
    loop {
        if check_augmenting(g, config, &w, &z).is_ok() {
            return AugmentingChain::resolve(g, config, &interleave(&w, &z));
        }
        let before = z.len();
        rewrite_once(config, &mut w, &mut z);
        assert!(z.len() < before, "rewrite must shorten the sequence");
    }
}

fn rewrite_once(config: &Configuration, w: &mut Vec<usize>, z: &mut Vec<usize>) {
    let k = w.len() - 1;
    // Repeated w: keep the earlier copy and skip the loop between them.
    for i in 1..=k {
        if let Some(j) = (0..i).find(|&j| w[j] == w[i]) {
            w.drain(j + 1..=i);
            z.drain(j..i);
            return;
        }
    }
    // Repeated z (1-based zj = zi): jump from w(j-1) straight to zi.
    for i in 1..=k + 1 {
        if let Some(j) = (1..i).find(|&j| z[j - 1] == z[i - 1]) {
            w.drain(j..i);
            z.drain(j - 1..i - 1);
            return;
        }
    }
    // Last node equals some wi: end at w(i) and use wk as the last node.
    let last = z[k];
    if let Some(i) = (0..k).find(|&i| w[i] == last) {
        let wk = w[k];
        w.truncate(i + 1);
        z.truncate(i);
        z.push(wk);
        return;
    }
    // Last node inside block j < k: it becomes wj, and wk the last node.
    let blocks = blocks_of(config, w, z);
    if let Some(j) = (0..k).find(|&j| blocks[j].contains(&last)) {
        let wk = w[k];
        w.truncate(j + 1);
        w[j] = last;
        z.truncate(j);
        z.push(wk);
        return;
    }
    // wi inside an earlier block j: splice wi in place of wj.
    for i in 1..=k {
        if let Some(j) = (0..i).find(|&j| blocks[j].contains(&w[i])) {
            w.drain(j..i);
            z.drain(j..i);
            return;
        }
    }
}

fn blocks_of(config: &Configuration, w: &[usize], z: &[usize]) -> Vec<HashSet<usize>> {
    let mut out = Vec::with_capacity(w.len());
    let sm = config.special_of(w[0]).expect("pseudo-chain starts in a special molecule");
    out.push(config.dec.molecule(sm).nodes.iter().copied().collect());
    for i in 1..w.len() {
        out.push(block(config, w[i], z[i - 1]).expect("pseudo-chain blocks exist"));
    }
    out
}

/// Forest edits made by one chain application.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainEdits {
    /// Edits made by degree reduction inside critical atoms.
    pub reductions: Vec<Edit>,
    /// `(zi, yi)` deletions.
    pub deleted: Vec<(usize, usize)>,
    /// `(w(i-1), zi)` insertions.
    pub inserted: Vec<(usize, usize)>,
    /// Molecules removed from the decomposition.
    pub affected: Vec<usize>,
    /// Nodes added to the dirty set.
    pub new_dirty: Vec<usize>,
}

impl ChainEdits {
    /// `CHAIN l w0 z1 … | deleted: u-v … | inserted: u-v …`, with
    /// degree-reduction edits listed before the chain's own.
    pub fn trace_line(&self, chain: &AugmentingChain) -> String {
        let mut s = format!("CHAIN {}", chain.len());
        for v in chain.sequence() {
            let _ = write!(s, " {v}");
        }
        s.push_str(" | deleted:");
        let red_del = self.reductions.iter().filter_map(|e| match *e {
            Edit::Delete { u, v, .. } => Some((u, v)),
            Edit::Insert { .. } => None,
        });
        for (u, v) in red_del.chain(self.deleted.iter().copied()) {
            let _ = write!(s, " {u}-{v}");
        }
        s.push_str(" | inserted:");
        let red_ins = self.reductions.iter().filter_map(|e| match *e {
            Edit::Insert { u, v, .. } => Some((u, v)),
            Edit::Delete { .. } => None,
        });
        for (u, v) in red_ins.chain(self.inserted.iter().copied()) {
            let _ = write!(s, " {u}-{v}");
        }
        s
    }
}

/// Applies `chain`: reduce degrees in the critical atoms, detach each block
/// from its root, re-attach it below the previous `w`, drop every molecule
/// that held a `w` or the last node, and mark non-reducible `y` nodes dirty.
/// The forest loses exactly one component.
pub fn apply_chain(
    g: &Graph,
    config: &mut Configuration,
    chain: &AugmentingChain,
    work: &mut WorkCounters,
) -> Result<ChainEdits, ChainError> {
    if config.verify_chains {
        let fresh = AugmentingChain::resolve(g, config, &chain.sequence())
            .map_err(ChainError::Stale)?;
        debug_assert_eq!(fresh.y, chain.y, "stale y nodes");
    }
    let l = chain.w.len() - 1;
    let last = chain.z[l];
    let dec = &config.dec;
    let new_dirty: Vec<usize> = chain
        .y
        .iter()
        .copied()
        .filter(|&y| dec.is_non_reducible(y))
        .collect();
    let mut affected: Vec<usize> = chain
        .w
        .iter()
        .chain(std::iter::once(&last))
        .filter_map(|&v| dec.molecule_of(v))
        .collect();
    affected.sort_unstable();
    affected.dedup();

    let mut reductions = Vec::new();
    let reduce_last = dec.is_reducible(last).then_some(last);
    for &v in chain.w.iter().chain(reduce_last.iter()) {
        let edits = reduce_degree(g, &mut config.forest, &config.dec, &config.bounds, v, work)
            .expect("critical nodes are reducible");
        reductions.extend(edits);
    }
    let mut deleted = Vec::with_capacity(l);
    for i in 0..l {
        let (zi, yi) = (chain.z[i], chain.y[i]);
        let e = g.edge_between(zi, yi).expect("block edge exists");
        config.forest.cut(e).expect("block edge is a forest edge");
        deleted.push((zi, yi));
    }
    let mut inserted = Vec::with_capacity(l + 1);
    for i in 0..=l {
        let (a, b) = (chain.w[i], chain.z[i]);
        let e = g.edge_between(a, b).expect("chain edge exists");
        config.forest.link_unchecked(e);
        inserted.push((a, b));
    }
    for &mid in &affected {
        config.dec.remove_molecule(mid);
    }
    for &y in &new_dirty {
        config.dirty[y] = true;
    }
    Ok(ChainEdits {
        reductions,
        deleted,
        inserted,
        affected,
        new_dirty,
    })
}
