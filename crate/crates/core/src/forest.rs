//! The mutable spanning forest and a rooted, read-only view with ancestor
//! queries.

use std::cell::Cell;
use std::collections::VecDeque;

use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ForestError {
    #[error("edge {0} would close a cycle")]
    Cycle(usize),
    #[error("edge {0} is already in the forest")]
    Present(usize),
    #[error("edge {0} is not a forest edge")]
    NotForestEdge(usize),
    #[error("nodes {0} and {1} lie in different components")]
    DifferentComponents(usize, usize),
    #[error("node {0} is not a strict ancestor of node {1}")]
    NotAncestor(usize, usize),
}

/// A subforest of the input graph. Degrees count real edges only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Forest {
    ends: Vec<(usize, usize)>,
    in_forest: Vec<bool>,
    adj: Vec<Vec<(usize, usize)>>,
    components: usize,
}

impl Forest {
    /// The forest with no edges: `n` singleton components.
    pub fn empty(g: &Graph) -> Forest {
        Forest {
            ends: g.edges().to_vec(),
            in_forest: vec![false; g.m()],
            adj: vec![Vec::new(); g.n()],
            components: g.n(),
        }
    }

    pub fn from_edges(g: &Graph, edges: &[usize]) -> Result<Forest, ForestError> {
        let mut f = Forest::empty(g);
        for &e in edges {
            f.link(e)?;
        }
        Ok(f)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn component_count(&self) -> usize {
        self.components
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn contains(&self, e: usize) -> bool {
        self.in_forest[e]
    }

    /// Forest neighbors of `u` as `(neighbor, edge id)`.
    pub fn neighbors(&self, u: usize) -> &[(usize, usize)] {
        &self.adj[u]
    }

    pub fn edge_ids(&self) -> Vec<usize> {
        (0..self.in_forest.len())
            .filter(|&e| self.in_forest[e])
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.n() - self.components
    }

    /// Inserts `e` after checking that its endpoints are in different trees.
    pub fn link(&mut self, e: usize) -> Result<(), ForestError> {
        if self.in_forest[e] {
            return Err(ForestError::Present(e));
        }
        let (u, v) = self.ends[e];
        if self.path(u, v).is_some() {
            return Err(ForestError::Cycle(e));
        }
        self.link_unchecked(e);
        Ok(())
    }

    /// Inserts `e` without the cycle check. Callers must know the endpoints
    /// are in different trees.
    pub fn link_unchecked(&mut self, e: usize) {
        debug_assert!(!self.in_forest[e]);
        let (u, v) = self.ends[e];
        self.in_forest[e] = true;
        self.adj[u].push((v, e));
        self.adj[v].push((u, e));
        self.components -= 1;
    }

    pub fn cut(&mut self, e: usize) -> Result<(), ForestError> {
        if !self.in_forest[e] {
            return Err(ForestError::NotForestEdge(e));
        }
        let (u, v) = self.ends[e];
        self.in_forest[e] = false;
        self.adj[u].retain(|&(_, x)| x != e);
        self.adj[v].retain(|&(_, x)| x != e);
        self.components += 1;
        Ok(())
    }

    /// Component id per node, numbered in order of each component's smallest
    /// node.
    pub fn component_ids(&self) -> Vec<usize> {
        let n = self.n();
        let mut id = vec![usize::MAX; n];
        let mut next = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if id[s] != usize::MAX {
                continue;
            }
            id[s] = next;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &(v, _) in &self.adj[u] {
                    if id[v] == usize::MAX {
                        id[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        id
    }

    /// Node lists of all components, each sorted, ordered by smallest node.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let ids = self.component_ids();
        let k = ids.iter().copied().max().map_or(0, |x| x + 1);
        let mut out = vec![Vec::new(); k];
        for (v, &c) in ids.iter().enumerate() {
            out[c].push(v);
        }
        out
    }

    /// The nodes of the tree path from `u` to `v`, or `None` if they are in
    /// different trees.
    pub fn path(&self, u: usize, v: usize) -> Option<Vec<usize>> {
        if u == v {
            return Some(vec![u]);
        }
        let mut prev = std::collections::HashMap::new();
        prev.insert(u, u);
        let mut queue = VecDeque::from([u]);
        while let Some(x) = queue.pop_front() {
            for &(y, _) in &self.adj[x] {
                if prev.contains_key(&y) {
                    continue;
                }
                prev.insert(y, x);
                if y == v {
                    let mut out = vec![v];
                    let mut c = v;
                    while c != u {
                        c = prev[&c];
                        out.push(c);
                    }
                    out.reverse();
                    return Some(out);
                }
                queue.push_back(y);
            }
        }
        None
    }

    /// The tree containing `u` once the edge at `v` on the `u`–`v` path is
    /// removed.
    pub fn subtree_of(&self, u: usize, v: usize) -> Result<Subtree, ForestError> {
        if u == v {
            return Err(ForestError::DifferentComponents(u, v));
        }
        let mut seen = std::collections::HashSet::from([u]);
        let mut stack = vec![u];
        let mut touches_v = false;
        while let Some(x) = stack.pop() {
            for &(y, _) in &self.adj[x] {
                if y == v {
                    touches_v = true;
                } else if seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        if !touches_v {
            return Err(ForestError::DifferentComponents(u, v));
        }
        let mut nodes: Vec<usize> = seen.into_iter().collect();
        nodes.sort_unstable();
        Ok(Subtree { nodes })
    }

    /// Roots every tree at its smallest node, depth 0.
    pub fn rooted(&self) -> RootedForest {
        let n = self.n();
        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &(v, _) in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        parent[v] = Some(u);
                        stack.push(v);
                    }
                }
            }
        }
        RootedForest::new(parent, vec![0; n])
    }
}

/// Sorted node set of a subtree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subtree {
    nodes: Vec<usize>,
}

impl Subtree {
    pub fn contains(&self, v: usize) -> bool {
        self.nodes.binary_search(&v).is_ok()
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

const NONE: usize = usize::MAX;

/// Rooted forest with depth and binary-lifting ancestor tables.
///
/// Roots may start at a positive depth; that is how a synthetic root one
/// level above a tree is modelled without giving it a node id.
#[derive(Debug, Clone)]
pub struct RootedForest {
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    jump: Vec<Vec<usize>>,
    hops: Cell<u64>,
}

impl RootedForest {
    /// `parent[v]` is the parent of `v`; `root_depth[v]` is used only when
    /// `v` has no parent.
    ///
    /// # Panics
    /// Panics if the parent pointers contain a cycle.
    pub fn new(parent: Vec<Option<usize>>, root_depth: Vec<usize>) -> RootedForest {
        let n = parent.len();
        let mut children = vec![Vec::new(); n];
        let mut queue = VecDeque::new();
        let mut depth = vec![NONE; n];
        for v in 0..n {
            match parent[v] {
                Some(p) => children[p].push(v),
                None => {
                    depth[v] = root_depth[v];
                    queue.push_back(v);
                }
            }
        }
        let mut reached = 0;
        while let Some(u) = queue.pop_front() {
            reached += 1;
            for &c in &children[u] {
                depth[c] = depth[u] + 1;
                queue.push_back(c);
            }
        }
        assert_eq!(reached, n, "parent pointers contain a cycle");
        let mut levels = 1;
        let max_depth = depth.iter().copied().max().unwrap_or(0);
        while (1usize << levels) <= max_depth {
            levels += 1;
        }
        let mut jump = Vec::with_capacity(levels);
        jump.push(parent.iter().map(|p| p.unwrap_or(NONE)).collect::<Vec<_>>());
        for i in 1..levels {
            let prev = &jump[i - 1];
            let row = (0..n)
                .map(|v| {
                    let mid = prev[v];
                    if mid == NONE {
                        NONE
                    } else {
                        prev[mid]
                    }
                })
                .collect();
            jump.push(row);
        }
        RootedForest {
            parent,
            depth,
            jump,
            hops: Cell::new(0),
        }
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    /// Number of jump-table steps taken so far.
    pub fn hops(&self) -> u64 {
        self.hops.get()
    }

    /// The ancestor of `v` at depth `d` (or `v` itself when `d` is its depth).
    pub fn ancestor_at(&self, v: usize, d: usize) -> Option<usize> {
        if d > self.depth[v] {
            return None;
        }
        let mut k = self.depth[v] - d;
        let mut x = v;
        let mut i = 0;
        while k > 0 {
            if k & 1 == 1 {
                self.hops.set(self.hops.get() + 1);
                x = *self.jump.get(i)?.get(x)?;
                if x == NONE {
                    return None;
                }
            }
            k >>= 1;
            i += 1;
        }
        Some(x)
    }

    pub fn is_strict_ancestor(&self, x: usize, u: usize) -> bool {
        self.depth[u] > self.depth[x] && self.ancestor_at(u, self.depth[x]) == Some(x)
    }

    /// Whether `q` lies in the subtree hanging below an ancestor at depth
    /// `dx` that contains `u`, i.e. the depth-`dx + 1` ancestors agree.
    pub fn same_branch(&self, q: usize, u: usize, dx: usize) -> bool {
        if self.depth[q] <= dx || self.depth[u] <= dx {
            return false;
        }
        let a = self.ancestor_at(q, dx + 1);
        a.is_some() && a == self.ancestor_at(u, dx + 1)
    }

    /// Whether `q` lies in the subtree containing `u` that is cut off when
    /// the edge below `x` on the path to `u` is removed.
    pub fn in_subtree(&self, q: usize, u: usize, x: usize) -> Result<bool, ForestError> {
        if !self.is_strict_ancestor(x, u) {
            return Err(ForestError::NotAncestor(x, u));
        }
        Ok(self.same_branch(q, u, self.depth[x]))
    }
}
