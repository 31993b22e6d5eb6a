//! Molecular decompositions of a valid forest, their atoms, and local degree
//! reduction inside an atom.
//!
//! A normal molecule is a subtree hanging off a single forest edge
//! `(attach, root)` with the root outside it; a special molecule is a whole
//! tree. Within each molecule, nodes of degree at most their bound seed
//! singleton atoms; any graph edge joining two atoms merges every atom on the
//! tree path between its ends, absorbing the over-full ("bad") nodes on that
//! path. Each merge is logged so degree reduction can replay it.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::counters::WorkCounters;
use crate::dsu::Dsu;
use crate::forest::Forest;
use crate::graph::Graph;

const NONE: usize = usize::MAX;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecompError {
    #[error("node {0} is not in an atom")]
    NotReducible(usize),
    #[error("node {0} appears in two molecules")]
    Overlap(usize),
    #[error("molecule {0}: {1}")]
    BadMolecule(usize, String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MoleculeKind {
    Normal,
    Special,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Molecule {
    pub kind: MoleculeKind,
    /// The outside endpoint of the attaching edge; `None` for special
    /// molecules, which hang from a synthetic root instead.
    pub root: Option<usize>,
    /// For normal molecules the inside endpoint of the attaching edge; for
    /// special molecules the smallest node, where the synthetic root attaches.
    pub attach: usize,
    /// Sorted.
    pub nodes: Vec<usize>,
}

impl Molecule {
    pub fn normal(root: usize, attach: usize, mut nodes: Vec<usize>) -> Molecule {
        nodes.sort_unstable();
        Molecule {
            kind: MoleculeKind::Normal,
            root: Some(root),
            attach,
            nodes,
        }
    }

    pub fn special(mut nodes: Vec<usize>) -> Molecule {
        nodes.sort_unstable();
        Molecule {
            kind: MoleculeKind::Special,
            root: None,
            attach: nodes[0],
            nodes,
        }
    }

    pub fn is_special(&self) -> bool {
        self.kind == MoleculeKind::Special
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeStatus {
    Free,
    NonReducible,
    Reducible(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MergeCause {
    ForestEdge,
    NonForestEdge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeEvent {
    pub cause: MergeCause,
    pub x: usize,
    pub y: usize,
    pub edge: usize,
    /// Bad nodes on the path that joined the atom, in the order reached.
    pub absorbed: Vec<usize>,
    /// Representatives of the atoms that were merged.
    pub merged: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    /// Sorted.
    pub nodes: Vec<usize>,
    pub molecule: usize,
    /// Indices into [`Decomposition::events`], oldest first.
    pub events: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edit {
    Insert { edge: usize, u: usize, v: usize },
    Delete { edge: usize, u: usize, v: usize },
}

impl Edit {
    pub fn endpoints(&self) -> (usize, usize) {
        match *self {
            Edit::Insert { u, v, .. } | Edit::Delete { u, v, .. } => (u, v),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    molecules: Vec<Molecule>,
    alive: Vec<bool>,
    mol_of: Vec<Option<usize>>,
    atom_of: Vec<Option<usize>>,
    atoms: Vec<Atom>,
    events: Vec<MergeEvent>,
    absorbed_at: Vec<Option<usize>>,
    root_count: Vec<usize>,
    theta: Option<usize>,
}

impl Decomposition {
    /// Every tree of the forest is one special molecule.
    pub fn trivial(
        g: &Graph,
        forest: &Forest,
        bounds: &[usize],
        work: &mut WorkCounters,
    ) -> Decomposition {
        let mols = forest.components().into_iter().map(Molecule::special).collect();
        Self::build(g, forest, bounds, mols, None, work)
    }

    /// Decomposition where trees of at most `2θ` nodes are special molecules
    /// and larger trees are covered bottom-up by normal molecules of at most
    /// `θ` nodes.
    pub fn with_theta(
        g: &Graph,
        forest: &Forest,
        bounds: &[usize],
        theta: usize,
        work: &mut WorkCounters,
    ) -> Decomposition {
        assert!(theta >= 1);
        let mols = theta_molecules(forest, theta);
        Self::build(g, forest, bounds, mols, Some(theta), work)
    }

    /// Checks that `molecules` form a decomposition of `forest`, then computes
    /// atoms.
    pub fn from_molecules(
        g: &Graph,
        forest: &Forest,
        bounds: &[usize],
        molecules: Vec<Molecule>,
        work: &mut WorkCounters,
    ) -> Result<Decomposition, DecompError> {
        let n = forest.n();
        let mut owner = vec![None; n];
        for (i, m) in molecules.iter().enumerate() {
            for &v in &m.nodes {
                if owner[v].replace(i).is_some() {
                    return Err(DecompError::Overlap(v));
                }
            }
        }
        for (i, m) in molecules.iter().enumerate() {
            let bad = |s: &str| Err(DecompError::BadMolecule(i, s.to_string()));
            if m.nodes.is_empty() || !m.nodes.contains(&m.attach) {
                return bad("attach node outside molecule");
            }
            let expect = match m.root {
                None => {
                    let ids = forest.component_ids();
                    let c = ids[m.attach];
                    (0..n).filter(|&v| ids[v] == c).collect::<Vec<_>>()
                }
                Some(r) => {
                    if owner[r].is_some() {
                        return bad("root lies inside a molecule");
                    }
                    if !forest.neighbors(m.attach).iter().any(|&(w, _)| w == r) {
                        return bad("attach and root are not forest neighbors");
                    }
                    match forest.subtree_of(m.attach, r) {
                        Ok(s) => s.nodes().to_vec(),
                        Err(_) => return bad("root not in the same tree"),
                    }
                }
            };
            if expect != m.nodes {
                return bad("node set does not match the forest");
            }
        }
        Ok(Self::build(g, forest, bounds, molecules, None, work))
    }

    fn build(
        g: &Graph,
        forest: &Forest,
        bounds: &[usize],
        molecules: Vec<Molecule>,
        theta: Option<usize>,
        work: &mut WorkCounters,
    ) -> Decomposition {
        let n = forest.n();
        let mut d = Decomposition {
            alive: vec![true; molecules.len()],
            mol_of: vec![None; n],
            atom_of: vec![None; n],
            atoms: Vec::new(),
            events: Vec::new(),
            absorbed_at: vec![None; n],
            root_count: vec![0; n],
            theta,
            molecules,
        };
        for (i, m) in d.molecules.iter().enumerate() {
            for &v in &m.nodes {
                d.mol_of[v] = Some(i);
            }
            if let Some(r) = m.root {
                d.root_count[r] += 1;
            }
        }
        let mut s = Scratch {
            dsu: Dsu::new(n),
            top: (0..n).collect(),
            is_atom: vec![false; n],
            parent: vec![NONE; n],
            depth: vec![0; n],
        };
        for mid in 0..d.molecules.len() {
            d.atoms_for(g, forest, bounds, mid, &mut s, work);
        }
        d
    }

    fn atoms_for(
        &mut self,
        g: &Graph,
        forest: &Forest,
        bounds: &[usize],
        mid: usize,
        s: &mut Scratch,
        work: &mut WorkCounters,
    ) {
        let nodes = self.molecules[mid].nodes.clone();
        let attach = self.molecules[mid].attach;
        let inside = |v: usize, mol_of: &[Option<usize>]| mol_of[v] == Some(mid);

        s.parent[attach] = NONE;
        s.depth[attach] = 1;
        let mut queue = VecDeque::from([attach]);
        while let Some(u) = queue.pop_front() {
            for &(w, _) in forest.neighbors(u) {
                work.edge_scans += 1;
                if inside(w, &self.mol_of) && w != s.parent[u] && w != attach {
                    s.parent[w] = u;
                    s.depth[w] = s.depth[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        for &v in &nodes {
            s.is_atom[v] = forest.degree(v) <= bounds[v];
        }
        let mut edges = Vec::new();
        for &v in &nodes {
            for &(w, e) in g.neighbors(v) {
                work.edge_scans += 1;
                if w > v && inside(w, &self.mol_of) && s.is_atom[v] && s.is_atom[w] {
                    edges.push(e);
                }
            }
        }
        edges.sort_unstable();
        let mut queue: VecDeque<usize> = edges.into();
        let first_event = self.events.len();

        while let Some(e) = queue.pop_front() {
            let (x, y) = g.edge(e);
            let (mut a, mut b) = (s.dsu.find(x), s.dsu.find(y));
            if a == b {
                continue;
            }
            let mut touched = vec![a, b];
            while a != b {
                if s.depth[s.top[a]] >= s.depth[s.top[b]] {
                    a = s.dsu.find(s.parent[s.top[a]]);
                    touched.push(a);
                } else {
                    b = s.dsu.find(s.parent[s.top[b]]);
                    touched.push(b);
                }
                work.ancestor_hops += 1;
            }
            let lca_top = s.top[a];
            let mut merged = Vec::new();
            let mut absorbed = Vec::new();
            let mut seen = HashSet::new();
            for &t in &touched {
                if !seen.insert(t) {
                    continue;
                }
                if s.is_atom[t] {
                    merged.push(t);
                } else {
                    absorbed.push(t);
                }
            }
            let ev = self.events.len();
            let mut rep = touched[0];
            for &t in &touched[1..] {
                if let Some(r) = s.dsu.union(rep, t) {
                    rep = r;
                }
            }
            let rep = s.dsu.find(rep);
            s.is_atom[rep] = true;
            s.top[rep] = lca_top;
            for &z in &absorbed {
                self.absorbed_at[z] = Some(ev);
                for &(w, f) in g.neighbors(z) {
                    work.edge_scans += 1;
                    if inside(w, &self.mol_of) {
                        let rw = s.dsu.find(w);
                        if rw != rep && s.is_atom[rw] {
                            queue.push_back(f);
                        }
                    }
                }
            }
            let cause = if forest.contains(e) {
                MergeCause::ForestEdge
            } else {
                MergeCause::NonForestEdge
            };
            self.events.push(MergeEvent {
                cause,
                x,
                y,
                edge: e,
                absorbed,
                merged,
            });
        }

        let mut id_of_rep: HashMap<usize, usize> = HashMap::new();
        for &v in &nodes {
            let r = s.dsu.find(v);
            if !s.is_atom[r] {
                continue;
            }
            let aid = *id_of_rep.entry(r).or_insert_with(|| {
                self.atoms.push(Atom {
                    nodes: Vec::new(),
                    molecule: mid,
                    events: Vec::new(),
                });
                self.atoms.len() - 1
            });
            self.atoms[aid].nodes.push(v);
            self.atom_of[v] = Some(aid);
        }
        for ev in first_event..self.events.len() {
            let aid = self.atom_of[self.events[ev].x].expect("event inside an atom");
            self.atoms[aid].events.push(ev);
        }
    }

    pub fn n(&self) -> usize {
        self.mol_of.len()
    }

    pub fn theta(&self) -> Option<usize> {
        self.theta
    }

    pub fn status(&self, v: usize) -> NodeStatus {
        match (self.mol_of[v], self.atom_of[v]) {
            (None, _) => NodeStatus::Free,
            (Some(_), Some(a)) => NodeStatus::Reducible(a),
            (Some(_), None) => NodeStatus::NonReducible,
        }
    }

    pub fn is_free(&self, v: usize) -> bool {
        self.mol_of[v].is_none()
    }

    pub fn is_reducible(&self, v: usize) -> bool {
        self.atom_of[v].is_some()
    }

    pub fn is_non_reducible(&self, v: usize) -> bool {
        self.mol_of[v].is_some() && self.atom_of[v].is_none()
    }

    pub fn molecule_of(&self, v: usize) -> Option<usize> {
        self.mol_of[v]
    }

    pub fn atom_of(&self, v: usize) -> Option<usize> {
        self.atom_of[v]
    }

    /// True if some live normal molecule hangs from `v`.
    pub fn is_normal_root(&self, v: usize) -> bool {
        self.root_count[v] > 0
    }

    pub fn molecule(&self, mid: usize) -> &Molecule {
        &self.molecules[mid]
    }

    pub fn is_alive(&self, mid: usize) -> bool {
        self.alive[mid]
    }

    pub fn molecule_count(&self) -> usize {
        self.molecules.len()
    }

    /// Live molecules with their ids.
    pub fn molecules(&self) -> impl Iterator<Item = (usize, &Molecule)> {
        self.molecules
            .iter()
            .enumerate()
            .filter(|&(i, _)| self.alive[i])
    }

    pub fn atom(&self, aid: usize) -> &Atom {
        &self.atoms[aid]
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    /// Atoms of live molecules with their ids.
    pub fn atoms(&self) -> impl Iterator<Item = (usize, &Atom)> {
        self.atoms
            .iter()
            .enumerate()
            .filter(|(_, a)| self.alive[a.molecule])
    }

    pub fn events(&self) -> &[MergeEvent] {
        &self.events
    }

    /// The merge event that absorbed `v` as a bad node, if any.
    pub fn absorbed_at(&self, v: usize) -> Option<usize> {
        self.absorbed_at[v]
    }

    /// Drops a molecule; its nodes become free and its atoms disappear.
    pub fn remove_molecule(&mut self, mid: usize) {
        if !self.alive[mid] {
            return;
        }
        self.alive[mid] = false;
        let m = &self.molecules[mid];
        for &v in &m.nodes {
            self.mol_of[v] = None;
            self.atom_of[v] = None;
        }
        if let Some(r) = m.root {
            self.root_count[r] -= 1;
        }
    }

    /// Text dump of live molecules then atoms, each sorted by smallest node.
    ///
    /// Molecule lines are `kind root size nodes...` (root `-` for special
    /// molecules); atom lines are `atom-id molecule-id nodes...`, with ids
    /// counting from 0 in dump order.
    pub fn dump(&self) -> String {
        let mut mols: Vec<usize> = self.molecules().map(|(i, _)| i).collect();
        mols.sort_by_key(|&i| self.molecules[i].nodes[0]);
        let pos: HashMap<usize, usize> = mols.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let mut out = String::new();
        for &i in &mols {
            let m = &self.molecules[i];
            let (kind, root) = match m.root {
                Some(r) => ("normal", r.to_string()),
                None => ("special", "-".to_string()),
            };
            let _ = write!(out, "{kind} {root} {}", m.nodes.len());
            for v in &m.nodes {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        let mut atoms: Vec<&Atom> = self.atoms().map(|(_, a)| a).collect();
        atoms.sort_by_key(|a| a.nodes[0]);
        for (k, a) in atoms.iter().enumerate() {
            let _ = write!(out, "{k} {}", pos[&a.molecule]);
            for v in &a.nodes {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }
}

struct Scratch {
    dsu: Dsu,
    top: Vec<usize>,
    is_atom: Vec<bool>,
    parent: Vec<usize>,
    depth: Vec<usize>,
}

/// Atoms of a single molecule, as computed by the merge procedure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoleculeAtoms {
    pub atoms: Vec<Vec<usize>>,
    pub events: Vec<MergeEvent>,
}

/// Runs the merge procedure on one molecule of `forest`.
pub fn compute_atoms(
    g: &Graph,
    forest: &Forest,
    bounds: &[usize],
    molecule: Molecule,
) -> Result<MoleculeAtoms, DecompError> {
    let mut work = WorkCounters::default();
    let d = Decomposition::from_molecules(g, forest, bounds, vec![molecule], &mut work)?;
    Ok(MoleculeAtoms {
        atoms: d.atoms.into_iter().map(|a| a.nodes).collect(),
        events: d.events,
    })
}

fn theta_molecules(forest: &Forest, theta: usize) -> Vec<Molecule> {
    let n = forest.n();
    let mut out = Vec::new();
    let mut parent = vec![NONE; n];
    let mut size = vec![0usize; n];
    let mut cnt = vec![0usize; n];
    for comp in forest.components() {
        if comp.len() <= 2 * theta {
            out.push(Molecule::special(comp));
            continue;
        }
        let total = comp.len();
        let root = comp[0];
        let mut order = vec![root];
        parent[root] = NONE;
        let mut i = 0;
        while i < order.len() {
            let u = order[i];
            i += 1;
            for &(w, _) in forest.neighbors(u) {
                if w != parent[u] {
                    parent[w] = u;
                    order.push(w);
                }
            }
        }
        for &u in order.iter().rev() {
            size[u] = 1 + forest
                .neighbors(u)
                .iter()
                .filter(|&&(w, _)| w != parent[u])
                .map(|&(w, _)| size[w])
                .sum::<usize>();
        }
        // Size of the side containing `u` when the edge to neighbor `v` is cut.
        let side = |u: usize, v: usize| {
            if parent[u] == v {
                size[u]
            } else {
                total - size[v]
            }
        };
        for &u in &comp {
            cnt[u] = forest
                .neighbors(u)
                .iter()
                .filter(|&&(v, _)| side(u, v) <= theta)
                .count();
        }
        // A side of at most θ nodes becomes a molecule exactly when it is not
        // swallowed by a larger side of at most θ nodes across its root.
        for &u in &comp {
            for &(v, _) in forest.neighbors(u) {
                if side(u, v) <= theta && cnt[v] == 0 {
                    let nodes = forest.subtree_of(u, v).expect("adjacent").nodes().to_vec();
                    out.push(Molecule::normal(v, u, nodes));
                }
            }
        }
    }
    out.sort_by_key(|m| m.nodes[0]);
    out
}

/// Lowers `deg(u)` to at most `b(u)` by replaying the merges that put `u`
/// into its atom. Every edit has both ends in that atom.
pub fn reduce_degree(
    g: &Graph,
    forest: &mut Forest,
    dec: &Decomposition,
    bounds: &[usize],
    u: usize,
    work: &mut WorkCounters,
) -> Result<Vec<Edit>, DecompError> {
    let atom = dec.atom_of(u).ok_or(DecompError::NotReducible(u))?;
    let mut edits = Vec::new();
    let mut original: HashMap<usize, usize> = HashMap::new();
    enum Step {
        Enter(usize),
        Finish(usize, usize),
    }
    let mut stack = vec![Step::Enter(u)];
    while let Some(step) = stack.pop() {
        match step {
            Step::Enter(v) => {
                if forest.degree(v) <= bounds[v] {
                    continue;
                }
                let ev = dec.absorbed_at(v).ok_or(DecompError::NotReducible(v))?;
                work.witness_replays += 1;
                let e = &dec.events[ev];
                stack.push(Step::Finish(v, ev));
                stack.push(Step::Enter(e.y));
                stack.push(Step::Enter(e.x));
            }
            Step::Finish(v, ev) => {
                let e = &dec.events[ev];
                let path = atom_path(forest, dec, atom, e.x, e.y, work);
                let i = path
                    .iter()
                    .position(|&p| p == v)
                    .expect("absorbed node stays on its witness path");
                // Cut on the side whose neighbor has not already lost an
                // edge in this call, so no degree drops by two.
                let (a, b) = (path[i - 1], path[i + 1]);
                for x in [a, b, v, e.x, e.y] {
                    original.entry(x).or_insert_with(|| forest.degree(x));
                }
                let dropped = |x: usize| forest.degree(x) < original[&x];
                let p = if dropped(a) && !dropped(b) { b } else { a };
                let cut = g.edge_between(p, v).expect("path edge");
                forest.cut(cut).expect("path edge is in the forest");
                forest.link_unchecked(e.edge);
                edits.push(Edit::Delete { edge: cut, u: p, v });
                edits.push(Edit::Insert {
                    edge: e.edge,
                    u: e.x,
                    v: e.y,
                });
            }
        }
    }
    Ok(edits)
}

fn atom_path(
    forest: &Forest,
    dec: &Decomposition,
    atom: usize,
    from: usize,
    to: usize,
    work: &mut WorkCounters,
) -> Vec<usize> {
    let mut prev = HashMap::from([(from, from)]);
    let mut queue = VecDeque::from([from]);
    while let Some(x) = queue.pop_front() {
        if x == to {
            break;
        }
        for &(y, _) in forest.neighbors(x) {
            work.edge_scans += 1;
            if dec.atom_of(y) == Some(atom) && !prev.contains_key(&y) {
                prev.insert(y, x);
                queue.push_back(y);
            }
        }
    }
    let mut out = vec![to];
    let mut c = to;
    while c != from {
        c = prev[&c];
        out.push(c);
    }
    out.reverse();
    out
}
