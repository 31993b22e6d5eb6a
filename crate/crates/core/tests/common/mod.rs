//! Instance builders and independent checkers shared by integration tests.
#![allow(dead_code)]

pub mod check;

use mdst_core::chains::Configuration;
use mdst_core::decomposition::Decomposition;
use mdst_core::dsu::Dsu;
use mdst_core::forest::Forest;
use mdst_core::generate::gnm;
use mdst_core::{Graph, WorkCounters};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random connected graph with `n` nodes and a random edge count.
pub fn random_graph(r: &mut ChaCha8Rng, n: usize, max_extra: usize) -> Graph {
    let hi = n * (n - 1) / 2;
    let m = (n - 1 + r.gen_range(0..=max_extra)).min(hi);
    gnm(n, m, r.gen()).unwrap()
}

/// Adds edges in random order while they keep the forest acyclic and within
/// `b + 1`, stopping after `k` edges.
pub fn random_valid_forest(r: &mut ChaCha8Rng, g: &Graph, b: &[usize], k: usize) -> Forest {
    let mut order: Vec<usize> = (0..g.m()).collect();
    order.shuffle(r);
    // Edges at a few random hubs go first, so many nodes end up full.
    let hub: Vec<bool> = (0..g.n()).map(|_| r.gen_bool(0.25)).collect();
    order.sort_by_key(|&e| {
        let (u, v) = g.edge(e);
        !(hub[u] || hub[v])
    });
    let mut deg = vec![0; g.n()];
    let mut d = Dsu::new(g.n());
    let mut chosen = Vec::new();
    for e in order {
        if chosen.len() == k {
            break;
        }
        let (u, v) = g.edge(e);
        if deg[u] <= b[u] && deg[v] <= b[v] && !d.same(u, v) {
            d.union(u, v);
            deg[u] += 1;
            deg[v] += 1;
            chosen.push(e);
        }
    }
    Forest::from_edges(g, &chosen).unwrap()
}

/// Graph containing a hidden Hamiltonian path plus `extra` random edges, so
/// `b = 2` is feasible.
pub fn hidden_path_graph(r: &mut ChaCha8Rng, n: usize, extra: usize) -> Graph {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(r);
    let mut pairs: Vec<(usize, usize)> = perm.windows(2).map(|w| (w[0], w[1])).collect();
    for _ in 0..extra {
        let (a, b) = (r.gen_range(0..n), r.gen_range(0..n));
        if a != b {
            pairs.push((a, b));
        }
    }
    pairs.shuffle(r);
    Graph::new(n, pairs).unwrap().0
}

/// Random valid configuration with a θ-decomposition and an empty dirty set.
pub fn random_config(r: &mut ChaCha8Rng, n: usize) -> (Graph, Configuration) {
    let extra = r.gen_range(0..=2 * n);
    let (g, b) = if r.gen_bool(0.5) {
        (hidden_path_graph(r, n, extra), vec![2; n])
    } else {
        (random_graph(r, n, extra), vec![r.gen_range(1..=2); n])
    };
    let k = r.gen_range(n / 2..n);
    let f = random_valid_forest(r, &g, &b, k);
    let theta = r.gen_range(1..=2);
    let d = Decomposition::with_theta(&g, &f, &b, theta, &mut WorkCounters::default());
    let mut c = Configuration::new(f, d, b);
    c.verify_chains = true;
    (g, c)
}

/// Spanning-tree check: `n - 1` edges of `g`, no cycle.
pub fn is_spanning_tree(g: &Graph, tree: &[(usize, usize)]) -> bool {
    let mut d = Dsu::new(g.n());
    tree.len() + 1 == g.n()
        && tree
            .iter()
            .all(|&(u, v)| g.edge_between(u, v).is_some() && d.union(u, v).is_some())
}

pub fn max_degree(n: usize, tree: &[(usize, usize)]) -> usize {
    let mut deg = vec![0; n];
    for &(u, v) in tree {
        deg[u] += 1;
        deg[v] += 1;
    }
    deg.into_iter().max().unwrap_or(0)
}

/// Components of the forest recomputed from scratch.
pub fn component_count(g: &Graph, f: &Forest) -> usize {
    let mut d = Dsu::new(g.n());
    let joins = f
        .edge_ids()
        .into_iter()
        .filter(|&e| {
            let (u, v) = g.edge(e);
            d.union(u, v).is_some()
        })
        .count();
    g.n() - joins
}

/// Chains of path gadgets with `b = 1`. Gadget `i` is the path
/// `s - t - u - v` whose pair `{s, t}` is a normal molecule hanging from `u`,
/// with `t` full. Random edges `start–t`, `s–t'` and `s–end` are added,
/// where starts are special singletons and ends are isolated free nodes.
/// With few edges the shortest chain threads many gadgets.
pub fn gadget_config(
    r: &mut ChaCha8Rng,
    starts: usize,
    ends: usize,
    gadgets: usize,
    links: usize,
) -> (Graph, Configuration) {
    use mdst_core::decomposition::Molecule;
    let n = starts + ends + 4 * gadgets;
    let s = |i: usize| starts + ends + 4 * i;
    let mut pairs = Vec::new();
    let mut forest_pairs = Vec::new();
    for i in 0..gadgets {
        let b0 = s(i);
        forest_pairs.extend([(b0, b0 + 1), (b0 + 1, b0 + 2), (b0 + 2, b0 + 3)]);
    }
    pairs.extend_from_slice(&forest_pairs);
    for i in 0..gadgets {
        // A simple path of gadgets keeps at least one long chain around.
        let from = if i == 0 { r.gen_range(0..starts) } else { s(i - 1) };
        pairs.push((from, s(i) + 1));
    }
    pairs.push((s(gadgets - 1), starts + r.gen_range(0..ends)));
    for v in 0..starts {
        pairs.push((v, s(r.gen_range(0..gadgets)) + 1));
    }
    for v in starts..starts + ends {
        pairs.push((s(r.gen_range(0..gadgets)), v));
    }
    for _ in 0..links {
        let to = s(r.gen_range(0..gadgets));
        match r.gen_range(0..3) {
            0 => pairs.push((r.gen_range(0..starts), to + 1)),
            1 => pairs.push((s(r.gen_range(0..gadgets)), to + 1)),
            _ => pairs.push((to, starts + r.gen_range(0..ends))),
        }
    }
    let (g, _) = Graph::new(n, pairs).unwrap();
    let tree: Vec<usize> = forest_pairs
        .iter()
        .map(|&(u, v)| g.edge_between(u, v).unwrap())
        .collect();
    let f = Forest::from_edges(&g, &tree).unwrap();
    let b = vec![1; n];
    let mut mols: Vec<Molecule> = (0..starts).map(|v| Molecule::special(vec![v])).collect();
    for i in 0..gadgets {
        mols.push(Molecule::normal(s(i) + 2, s(i) + 1, vec![s(i), s(i) + 1]));
    }
    let d = Decomposition::from_molecules(&g, &f, &b, mols, &mut WorkCounters::default()).unwrap();
    let mut c = Configuration::new(f, d, b);
    c.verify_chains = true;
    (g, c)
}
