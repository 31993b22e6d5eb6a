//! From-scratch checkers. Nothing here reuses the library's own bookkeeping
//! beyond reading the structures under test.

use std::collections::{BTreeSet, HashSet, VecDeque};

use mdst_core::chains::Configuration;
use mdst_core::decomposition::{Decomposition, MoleculeKind};
use mdst_core::dsu::Dsu;
use mdst_core::forest::Forest;
use mdst_core::Graph;

pub fn forest_pairs(g: &Graph, f: &Forest) -> BTreeSet<(usize, usize)> {
    f.edge_ids()
        .into_iter()
        .map(|e| {
            let (u, v) = g.edge(e);
            (u.min(v), u.max(v))
        })
        .collect()
}

fn adjacency(n: usize, pairs: &BTreeSet<(usize, usize)>) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in pairs {
        adj[u].push(v);
        adj[v].push(u);
    }
    adj
}

/// Acyclic, made of graph edges, every degree at most `b + 1`.
pub fn forest_valid(g: &Graph, f: &Forest, b: &[usize]) -> Result<(), String> {
    let pairs = forest_pairs(g, f);
    let mut d = Dsu::new(g.n());
    let mut deg = vec![0; g.n()];
    for &(u, v) in &pairs {
        if g.edge_between(u, v).is_none() {
            return Err(format!("{u}-{v} not in graph"));
        }
        if d.union(u, v).is_none() {
            return Err(format!("{u}-{v} closes a cycle"));
        }
        deg[u] += 1;
        deg[v] += 1;
    }
    for u in 0..g.n() {
        if deg[u] != f.degree(u) {
            return Err(format!("degree of {u} is {} but forest reports {}", deg[u], f.degree(u)));
        }
        if deg[u] > b[u] + 1 {
            return Err(format!("deg({u}) = {} > b + 1 = {}", deg[u], b[u] + 1));
        }
    }
    Ok(())
}

pub fn components(g: &Graph, f: &Forest) -> usize {
    let mut d = Dsu::new(g.n());
    let joins = forest_pairs(g, f)
        .into_iter()
        .filter(|&(u, v)| d.union(u, v).is_some())
        .count();
    g.n() - joins
}

/// Nodes reachable from `x` without stepping onto `block`.
pub fn side(adj: &[Vec<usize>], x: usize, block: Option<usize>) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([x]);
    let mut q = VecDeque::from([x]);
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            if Some(v) != block && seen.insert(v) {
                q.push_back(v);
            }
        }
    }
    seen
}

/// Node path from `a` to `b` in the forest, if connected.
pub fn forest_path(g: &Graph, f: &Forest, a: usize, b: usize) -> Option<Vec<usize>> {
    let adj = adjacency(g.n(), &forest_pairs(g, f));
    let mut prev = vec![usize::MAX; g.n()];
    prev[a] = a;
    let mut q = VecDeque::from([a]);
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            if prev[v] == usize::MAX {
                prev[v] = u;
                q.push_back(v);
            }
        }
    }
    if prev[b] == usize::MAX {
        return None;
    }
    let mut p = vec![b];
    while *p.last().unwrap() != a {
        p.push(prev[*p.last().unwrap()]);
    }
    p.reverse();
    Some(p)
}

/// Atoms of one molecule by rescanning every edge until nothing changes:
/// low-degree nodes start as singletons; an edge between two atoms merges
/// them, and a non-forest edge also absorbs its whole forest path.
pub fn naive_atoms(
    g: &Graph,
    f: &Forest,
    b: &[usize],
    nodes: &BTreeSet<usize>,
) -> BTreeSet<Vec<usize>> {
    let n = g.n();
    let mut label: Vec<Option<usize>> = vec![None; n];
    for &v in nodes {
        if f.degree(v) <= b[v] {
            label[v] = Some(v);
        }
    }
    let fp = forest_pairs(g, f);
    loop {
        let mut changed = false;
        for &(x, y) in g.edges() {
            if !nodes.contains(&x) || !nodes.contains(&y) {
                continue;
            }
            let (Some(lx), Some(ly)) = (label[x], label[y]) else {
                continue;
            };
            if lx == ly {
                continue;
            }
            let mut hit: HashSet<usize> = HashSet::from([lx, ly]);
            let mut absorb = Vec::new();
            if !fp.contains(&(x.min(y), x.max(y))) {
                let path = forest_path(g, f, x, y).expect("molecule is connected");
                for p in path {
                    match label[p] {
                        Some(l) => {
                            hit.insert(l);
                        }
                        None => absorb.push(p),
                    }
                }
            }
            for &v in nodes {
                if label[v].is_some_and(|l| hit.contains(&l)) {
                    label[v] = Some(lx);
                }
            }
            for v in absorb {
                label[v] = Some(lx);
            }
            changed = true;
        }
        if !changed {
            break;
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for &v in nodes {
        if let Some(l) = label[v] {
            groups.entry(l).or_default().push(v);
        }
    }
    groups.into_values().collect()
}

/// Molecules are disjoint forest pieces of the right shape, normal roots
/// are free, statuses agree with membership, and every molecule's atoms are
/// exactly the from-scratch fixed point.
pub fn decomposition_valid(
    g: &Graph,
    f: &Forest,
    dec: &Decomposition,
    b: &[usize],
) -> Result<(), String> {
    let n = g.n();
    let adj = adjacency(n, &forest_pairs(g, f));
    let mut owner = vec![None; n];
    for (mid, m) in dec.molecules() {
        for &v in &m.nodes {
            if owner[v].replace(mid).is_some() {
                return Err(format!("node {v} in two molecules"));
            }
        }
    }
    for (mid, m) in dec.molecules() {
        let nodes: BTreeSet<usize> = m.nodes.iter().copied().collect();
        let expect = match m.kind {
            MoleculeKind::Special => side(&adj, m.nodes[0], None),
            MoleculeKind::Normal => {
                let root = m.root.ok_or("normal molecule without root")?;
                if !adj[m.attach].contains(&root) {
                    return Err(format!("molecule {mid}: {}-{root} not a forest edge", m.attach));
                }
                if owner[root].is_some() {
                    return Err(format!("molecule {mid}: root {root} is covered"));
                }
                side(&adj, m.attach, Some(root))
            }
        };
        if expect != nodes {
            return Err(format!("molecule {mid}: nodes {nodes:?} but forest gives {expect:?}"));
        }
        let want = naive_atoms(g, f, b, &nodes);
        let mut have: BTreeSet<Vec<usize>> = BTreeSet::new();
        for (_, a) in dec.atoms().filter(|(_, a)| a.molecule == mid) {
            let mut s = a.nodes.clone();
            s.sort_unstable();
            have.insert(s);
        }
        if want != have {
            return Err(format!("molecule {mid}: atoms {have:?}, fixed point {want:?}"));
        }
    }
    for v in 0..n {
        if dec.molecule_of(v) != owner[v] {
            return Err(format!("molecule_of({v}) disagrees with membership"));
        }
        if dec.is_reducible(v) && owner[v].is_none() {
            return Err(format!("{v} reducible but free"));
        }
        if let Some(a) = dec.atom_of(v) {
            if !dec.atom(a).nodes.contains(&v) {
                return Err(format!("{v} not listed in its atom"));
            }
        }
    }
    Ok(())
}

/// Forest, decomposition and dirty-set invariants of a configuration.
pub fn config_valid(g: &Graph, c: &Configuration) -> Result<(), String> {
    forest_valid(g, &c.forest, &c.bounds)?;
    decomposition_valid(g, &c.forest, &c.dec, &c.bounds)?;
    for v in 0..g.n() {
        if c.dirty[v] {
            if !c.dec.is_free(v) {
                return Err(format!("dirty node {v} is covered"));
            }
            if c.forest.degree(v) != c.bounds[v] {
                return Err(format!("dirty node {v} has degree {}", c.forest.degree(v)));
            }
        }
    }
    Ok(())
}

/// The three size properties of a θ-decomposition, checked against every
/// candidate subtree: each side of each forest edge, and each whole tree.
pub fn theta_properties(g: &Graph, f: &Forest, dec: &Decomposition, theta: usize) -> Result<(), String> {
    let n = g.n();
    let pairs = forest_pairs(g, f);
    let adj = adjacency(n, &pairs);
    let members: HashSet<Vec<usize>> = dec.molecules().map(|(_, m)| m.nodes.clone()).collect();
    let free = |s: &BTreeSet<usize>| s.iter().any(|&v| dec.is_free(v));
    let mut seen_tree = vec![false; n];
    for v in 0..n {
        if seen_tree[v] {
            continue;
        }
        let tree = side(&adj, v, None);
        for &u in &tree {
            seen_tree[u] = true;
        }
        let as_vec: Vec<usize> = tree.iter().copied().collect();
        if tree.len() <= 2 * theta && !members.contains(&as_vec) {
            return Err(format!("small tree {as_vec:?} is not a special molecule"));
        }
        if !members.contains(&as_vec) && free(&tree) && tree.len() <= theta {
            return Err(format!("non-member tree {as_vec:?} with a free node is small"));
        }
    }
    for (_, m) in dec.molecules() {
        if m.kind == MoleculeKind::Normal && m.nodes.len() > theta {
            return Err(format!("normal molecule of {} nodes", m.nodes.len()));
        }
    }
    for &(a, b) in &pairs {
        for (x, y) in [(a, b), (b, a)] {
            let s = side(&adj, x, Some(y));
            let as_vec: Vec<usize> = s.iter().copied().collect();
            if !members.contains(&as_vec) && free(&s) && s.len() <= theta {
                return Err(format!("candidate {as_vec:?} hanging from {y} is small and has a free node"));
            }
        }
    }
    Ok(())
}
