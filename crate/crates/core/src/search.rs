//! Turning an ℓ-configuration into an (ℓ+1)-configuration.
//!
//! Phase I grows layers `Z_0 … Z_(ℓ-1)` of candidate block roots. Phase II
//! looks for last edges `(w(ℓ-1), z(ℓ))` and walks back down the layers to a
//! special molecule, applying every chain it completes.
//!
//! Subtrees `T_x` are read from a rooted snapshot of the molecules: each
//! molecule is rooted at its attach node, which hangs from the normal root
//! (depth 0) or, for special molecules, sits at depth 1 below an implicit
//! dummy root. Applying a chain only ever deletes molecules, so the snapshot
//! stays exact for every live molecule and can be shared by all calls within
//! one round.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::chains::{apply_chain, AugmentingChain, Configuration};
use crate::counters::WorkCounters;
use crate::forest::RootedForest;
use crate::graph::Graph;

const NONE: usize = usize::MAX;

/// Molecule rooting taken from a configuration.
#[derive(Debug, Clone)]
pub struct Snapshot {
    rooted: RootedForest,
    children: Vec<Vec<usize>>,
    specials: Vec<usize>,
}

impl Snapshot {
    pub fn new(config: &Configuration) -> Snapshot {
        let n = config.n();
        let dec = &config.dec;
        let mut parent = vec![None; n];
        let mut root_depth = vec![0; n];
        let mut children = vec![Vec::new(); n];
        let mut specials = Vec::new();
        let mut seen = vec![false; n];
        for (mid, m) in dec.molecules() {
            match m.root {
                Some(r) => {
                    parent[m.attach] = Some(r);
                    children[r].push(m.attach);
                }
                None => {
                    root_depth[m.attach] = 1;
                    specials.push(mid);
                }
            }
            seen[m.attach] = true;
            let mut queue = vec![m.attach];
            let mut i = 0;
            while i < queue.len() {
                let u = queue[i];
                i += 1;
                for &(v, _) in config.forest.neighbors(u) {
                    if !seen[v] && dec.molecule_of(v) == Some(mid) {
                        seen[v] = true;
                        parent[v] = Some(u);
                        children[u].push(v);
                        queue.push(v);
                    }
                }
            }
        }
        Snapshot {
            rooted: RootedForest::new(parent, root_depth),
            children,
            specials,
        }
    }

    pub fn rooted(&self) -> &RootedForest {
        &self.rooted
    }
}

/// One line of the search trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    /// Subtree of a layer node scanned; `None` stands for a dummy root.
    Scan { t: usize, x: Option<usize> },
    Admit { t: usize, v: usize },
    Prune { t: usize, v: usize },
    IneffectiveNode { t: usize, x: usize },
    IneffectiveEdge { t: usize, y: usize, x: usize },
    /// A chain was applied; `line` is its `CHAIN …` record.
    Chain { sequence: Vec<usize>, line: String },
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Scan { t, x: Some(x) } => write!(f, "SCAN {t} {x}"),
            TraceEvent::Scan { t, x: None } => write!(f, "SCAN {t} -"),
            TraceEvent::Admit { t, v } => write!(f, "ADMIT {t} {v}"),
            TraceEvent::Prune { t, v } => write!(f, "PRUNE {t} {v}"),
            TraceEvent::IneffectiveNode { t, x } => write!(f, "INEFFECTIVE-NODE {t} {x}"),
            TraceEvent::IneffectiveEdge { t, y, x } => {
                write!(f, "INEFFECTIVE-EDGE {t} {y}-{x}")
            }
            TraceEvent::Chain { line, .. } => f.write_str(line),
        }
    }
}

fn emit(trace: &mut Option<&mut Vec<TraceEvent>>, ev: impl FnOnce() -> TraceEvent) {
    if let Some(t) = trace.as_deref_mut() {
        t.push(ev());
    }
}

/// Layers `Z_1 … Z_(ℓ-1)` plus the scanned flags left by Phase I.
/// `Z_0` is the set of dummy roots, kept as special-molecule ids.
#[derive(Debug, Clone)]
pub struct LayerSet {
    ell: usize,
    zero: Vec<usize>,
    layers: Vec<Vec<usize>>,
    layer_of: Vec<usize>,
    scanned: Vec<bool>,
    exhausted: bool,
}

impl LayerSet {
    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Special molecules whose dummy roots form `Z_0`.
    pub fn dummy_roots(&self) -> &[usize] {
        &self.zero
    }

    /// `Z_t` for `t >= 1`; empty for `t = 0` and for layers never built.
    pub fn layer(&self, t: usize) -> &[usize] {
        self.layers.get(t).map_or(&[], |l| l.as_slice())
    }

    pub fn layer_of(&self, v: usize) -> Option<usize> {
        (self.layer_of[v] != NONE).then_some(self.layer_of[v])
    }

    pub fn is_scanned(&self, v: usize) -> bool {
        self.scanned[v]
    }

    /// Some layer below `ℓ` came out empty, so no chain of length `ℓ` or
    /// more can exist until the configuration changes.
    pub fn is_exhausted(&self) -> bool {
        self.exhausted
    }
}

#[derive(Debug, Clone, Copy)]
enum Root {
    Dummy(usize),
    Node(usize),
}

fn roots_of(layers: &LayerSet, t: usize) -> Vec<Root> {
    if t == 0 {
        layers.zero.iter().map(|&m| Root::Dummy(m)).collect()
    } else {
        layers.layer(t).iter().map(|&x| Root::Node(x)).collect()
    }
}

/// Start of a subtree scan: depth of the root and its children. Returns
/// `None` when the root no longer roots any block.
fn open_root(config: &Configuration, snap: &Snapshot, root: Root) -> Option<(usize, Vec<usize>)> {
    let dec = &config.dec;
    match root {
        Root::Dummy(mid) => dec.is_alive(mid).then(|| (0, vec![dec.molecule(mid).attach])),
        Root::Node(x) => (dec.is_non_reducible(x) || dec.is_normal_root(x))
            .then(|| (snap.rooted.depth(x), snap.children[x].clone())),
    }
}

/// Whether `v` lies in `T(u←x)` for the block root `x` at depth `dx`
/// above `u`.
fn in_block(config: &Configuration, snap: &Snapshot, v: usize, u: usize, dx: usize) -> bool {
    config.dec.molecule_of(v).is_some()
        && config.dec.molecule_of(v) == config.dec.molecule_of(u)
        && snap.rooted.same_branch(v, u, dx)
}

/// Phase I: builds `Z_1 … Z_(ℓ-1)`.
pub fn build_layers(
    g: &Graph,
    config: &Configuration,
    snap: &Snapshot,
    ell: usize,
    work: &mut WorkCounters,
    mut trace: Option<&mut Vec<TraceEvent>>,
) -> LayerSet {
    assert!(ell >= 1, "chain length starts at 1");
    let n = config.n();
    let dec = &config.dec;
    let hops = snap.rooted.hops();
    let mut ls = LayerSet {
        ell,
        zero: snap
            .specials
            .iter()
            .copied()
            .filter(|&m| dec.is_alive(m))
            .collect(),
        layers: vec![Vec::new()],
        layer_of: vec![NONE; n],
        scanned: vec![false; n],
        exhausted: false,
    };
    let mut seen = vec![NONE; n];
    for t in 0..ell - 1 {
        let mut cand = Vec::new();
        for root in roots_of(&ls, t) {
            if let Root::Node(x) = root {
                ls.scanned[x] = true;
            }
            emit(&mut trace, || TraceEvent::Scan {
                t,
                x: match root {
                    Root::Node(x) => Some(x),
                    Root::Dummy(_) => None,
                },
            });
            let Some((dx, mut stack)) = open_root(config, snap, root) else {
                continue;
            };
            while let Some(u) = stack.pop() {
                if ls.scanned[u] || dec.molecule_of(u).is_none() {
                    continue;
                }
                ls.scanned[u] = true;
                stack.extend_from_slice(&snap.children[u]);
                if !dec.is_reducible(u) {
                    continue;
                }
                for &(v, e) in g.neighbors(u) {
                    work.edge_scans += 1;
                    if !config.forest.contains(e) && !in_block(config, snap, v, u, dx) {
                        cand.push(v);
                    }
                }
            }
        }
        let mut next = Vec::new();
        for v in cand {
            if seen[v] == t + 1 {
                continue;
            }
            seen[v] = t + 1;
            if ls.scanned[v] || !(dec.molecule_of(v).is_some() || dec.is_normal_root(v)) {
                emit(&mut trace, || TraceEvent::Prune { t: t + 1, v });
                continue;
            }
            ls.layer_of[v] = t + 1;
            next.push(v);
            emit(&mut trace, || TraceEvent::Admit { t: t + 1, v });
        }
        let empty = next.is_empty();
        ls.layers.push(next);
        if empty {
            ls.exhausted = true;
            break;
        }
    }
    if ell == 1 && ls.zero.is_empty() {
        ls.exhausted = true;
    }
    work.ancestor_hops += snap.rooted.hops() - hops;
    ls
}

/// Outcome of one Phase II run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RaiseStats {
    pub ell: usize,
    /// Chains applied, each of length exactly `ell`.
    pub chains: usize,
    /// `|Z_t|` for `t = 1 … ` as far as layers were built.
    pub layer_sizes: Vec<usize>,
    /// Chains found but refused by the validator; always 0 when the search
    /// is sound.
    pub rejected: usize,
    /// A layer came out empty; larger `ell` cannot succeed either.
    pub exhausted: bool,
    pub work: WorkCounters,
}

struct Backward<'s> {
    g: &'s Graph,
    snap: &'s Snapshot,
    layer_of: &'s [usize],
    cursor: Vec<usize>,
    ineffective: Vec<bool>,
    nearest: HashMap<(usize, usize), usize>,
    work: WorkCounters,
}

impl Backward<'_> {
    /// Nearest node of `Z_t` among `v` and its ancestors.
    fn nearest_in_layer(&mut self, v: Option<usize>, t: usize) -> Option<usize> {
        let mut path = Vec::new();
        let mut a = v;
        let found = loop {
            let Some(x) = a else { break NONE };
            if let Some(&r) = self.nearest.get(&(x, t)) {
                break r;
            }
            if self.layer_of[x] == t {
                break x;
            }
            path.push(x);
            self.work.ancestor_hops += 1;
            a = self.snap.rooted.parent(x);
        };
        for x in path {
            self.nearest.insert((x, t), found);
        }
        (found != NONE).then_some(found)
    }

    /// Tries to extend `(w_t, …)` down to layer 0. On success pushes the
    /// pairs `(w(t-1), z_t)`, lowest layer first.
    fn search(
        &mut self,
        config: &Configuration,
        t: usize,
        w: usize,
        pairs: &mut Vec<(usize, usize)>,
        trace: &mut Option<&mut Vec<TraceEvent>>,
    ) -> bool {
        let dec = &config.dec;
        let mut next = self.nearest_in_layer(self.snap.rooted.parent(w), t);
        while let Some(x) = next {
            if self.ineffective[x] {
                break;
            }
            if dec.is_non_reducible(x) || dec.is_normal_root(x) {
                let adj = self.g.neighbors(x);
                while self.cursor[x] < adj.len() {
                    let (y, e) = adj[self.cursor[x]];
                    self.work.edge_scans += 1;
                    if dec.is_reducible(y) && !config.forest.contains(e) {
                        let ok = if t == 1 {
                            let mid = dec.molecule_of(y).expect("reducible is covered");
                            dec.molecule(mid).is_special()
                        } else {
                            self.search(config, t - 1, y, pairs, trace)
                        };
                        if ok {
                            pairs.push((y, x));
                            return true;
                        }
                    }
                    emit(trace, || TraceEvent::IneffectiveEdge { t, y, x });
                    self.cursor[x] += 1;
                }
                self.ineffective[x] = true;
                emit(trace, || TraceEvent::IneffectiveNode { t, x });
            }
            next = self.nearest_in_layer(self.snap.rooted.parent(x), t);
        }
        false
    }
}

/// Phase II: applies chains of length `ℓ` until none is left.
pub fn find_chains_and_apply(
    g: &Graph,
    config: &mut Configuration,
    snap: &Snapshot,
    mut layers: LayerSet,
    mut trace: Option<&mut Vec<TraceEvent>>,
) -> RaiseStats {
    let ell = layers.ell;
    let n = config.n();
    let hops = snap.rooted.hops();
    let mut stats = RaiseStats {
        ell,
        layer_sizes: layers.layers.iter().skip(1).map(Vec::len).collect(),
        exhausted: layers.exhausted,
        ..RaiseStats::default()
    };
    let built = layers.layers.len();
    if layers.exhausted || built < ell {
        return stats;
    }
    let roots = roots_of(&layers, ell - 1);
    let layer_of = std::mem::take(&mut layers.layer_of);
    let mut back = Backward {
        g,
        snap,
        layer_of: &layer_of,
        cursor: vec![0; n],
        ineffective: vec![false; n],
        nearest: HashMap::new(),
        work: WorkCounters::default(),
    };
    let scanned = &mut layers.scanned;
    for root in roots {
        if let Root::Node(x) = root {
            scanned[x] = true;
        }
        emit(&mut trace, || TraceEvent::Scan {
            t: ell - 1,
            x: match root {
                Root::Node(x) => Some(x),
                Root::Dummy(_) => None,
            },
        });
        let Some((dx, mut stack)) = open_root(config, snap, root) else {
            continue;
        };
        while let Some(u) = stack.pop() {
            if scanned[u] || config.dec.molecule_of(u).is_none() {
                continue;
            }
            scanned[u] = true;
            stack.extend_from_slice(&snap.children[u]);
            let adj = g.neighbors(u);
            let mut i = 0;
            while i < adj.len() && config.dec.is_reducible(u) {
                let (v, e) = adj[i];
                i += 1;
                back.work.edge_scans += 1;
                if config.forest.contains(e)
                    || !config.can_end_chain(v)
                    || in_block(config, snap, v, u, dx)
                {
                    continue;
                }
                let mut pairs = Vec::with_capacity(ell);
                if ell > 1 && !back.search(config, ell - 1, u, &mut pairs, &mut trace) {
                    continue;
                }
                let mut w: Vec<usize> = pairs.iter().map(|p| p.0).collect();
                let mut z: Vec<usize> = pairs.iter().map(|p| p.1).collect();
                w.push(u);
                z.push(v);
                let y = (1..w.len())
                    .map(|i| {
                        let d = snap.rooted.depth(z[i - 1]) + 1;
                        snap.rooted.ancestor_at(w[i], d).expect("block root is an ancestor")
                    })
                    .collect();
                let chain = AugmentingChain { w, z, y };
                match apply_chain(g, config, &chain, &mut back.work) {
                    Ok(edits) => {
                        stats.chains += 1;
                        emit(&mut trace, || TraceEvent::Chain {
                            sequence: chain.sequence(),
                            line: edits.trace_line(&chain),
                        });
                    }
                    Err(_) => stats.rejected += 1,
                }
            }
        }
    }
    stats.work = back.work;
    stats.work.ancestor_hops += snap.rooted.hops() - hops;
    stats
}

/// Phase I then Phase II against a snapshot shared with earlier calls.
pub fn raise_configuration_with(
    g: &Graph,
    config: &mut Configuration,
    snap: &Snapshot,
    ell: usize,
    mut trace: Option<&mut Vec<TraceEvent>>,
) -> RaiseStats {
    let mut work = WorkCounters::default();
    let layers = build_layers(g, config, snap, ell, &mut work, trace.as_deref_mut());
    let mut stats = find_chains_and_apply(g, config, snap, layers, trace);
    stats.work.add(&work);
    stats
}

/// Turns an ℓ-configuration into an (ℓ+1)-configuration by applying chains
/// of length exactly `ℓ`.
pub fn raise_configuration(
    g: &Graph,
    config: &mut Configuration,
    ell: usize,
    trace: Option<&mut Vec<TraceEvent>>,
) -> RaiseStats {
    let snap = Snapshot::new(config);
    raise_configuration_with(g, config, &snap, ell, trace)
}
