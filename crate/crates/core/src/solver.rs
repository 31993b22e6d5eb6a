//! Solvers: the one-edge-at-a-time local search baseline, the two-stage
//! chain-based algorithm, bounded-degree mode, and a binary search over a
//! uniform bound for when the optimum is unknown.

use std::time::Instant;

use serde::Serialize;

use crate::chains::Configuration;
use crate::counters::WorkCounters;
use crate::decomposition::{reduce_degree, Decomposition, Edit};
use crate::forest::Forest;
use crate::graph::Graph;
use crate::search::{raise_configuration_with, Snapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Fr,
    Fast,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Fr => "fr",
            Algo::Fast => "fast",
        }
    }
}

/// Tunable constants. Defaults follow the analysis.
#[derive(Debug, Clone)]
pub struct Params {
    /// `H = θ = ⌈h_factor · n / f⌉`.
    pub h_factor: f64,
    /// Expected chains per round: `⌈f³ / (progress_divisor · n²)⌉`.
    pub progress_divisor: f64,
    /// Stage I runs only while `f >= max(n^(3/4), stage_one_floor)`.
    pub stage_one_floor: f64,
    /// Stop with [`Status::BudgetExhausted`] once total work passes this.
    pub work_budget: Option<u64>,
    /// Collect trace lines.
    pub trace: bool,
    /// Override for chain re-validation before application; `None` keeps
    /// the build default (on in debug builds).
    pub verify_chains: Option<bool>,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            h_factor: 20.0,
            progress_divisor: 1e5,
            stage_one_floor: 20.0,
            work_budget: None,
            trace: false,
            verify_chains: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    TreeFound,
    /// No spanning tree satisfies `deg(u) <= b(u)` for every `u`.
    InfeasibleCertified,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundStats {
    /// Components at round start.
    pub f: usize,
    #[serde(rename = "H")]
    pub h: usize,
    pub theta: usize,
    /// Chains applied for `ℓ = 1 … H`.
    pub chains_per_ell: Vec<usize>,
    pub chains: usize,
    /// `⌈f³ / (divisor · n²)⌉`, the progress a feasible instance must show.
    pub required: usize,
    pub rejected: usize,
    /// Largest work total of a single chain-search call in this round.
    pub max_raise_work: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stats {
    pub n: usize,
    pub m: usize,
    pub algo: String,
    pub status: Status,
    pub max_degree: usize,
    pub rounds: Vec<RoundStats>,
    pub fr_iterations: usize,
    pub work_counters: WorkCounters,
    /// Uniform bound chosen by the binary search, when used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_star: Option<usize>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    /// Tree edges as node pairs, ordered by edge id.
    pub tree: Option<Vec<(usize, usize)>>,
    pub max_degree: usize,
    pub status: Status,
    pub stats: Stats,
    pub trace: Vec<String>,
}

/// Outcome of one local-search step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrStep {
    /// The edge `(u, v)` was added after the listed degree reductions.
    Merged { u: usize, v: usize, edits: Vec<Edit> },
    /// No edge joins reducible nodes of two different trees.
    Stuck,
}

/// One local-search step: recompute atoms over whole trees, find a
/// non-forest edge between two reducible nodes of different trees, make room
/// at both ends and add it.
pub fn fr_iteration(
    g: &Graph,
    forest: &mut Forest,
    bounds: &[usize],
    work: &mut WorkCounters,
) -> FrStep {
    let dec = Decomposition::trivial(g, forest, bounds, work);
    let mut found = None;
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        work.edge_scans += 1;
        if forest.contains(e) || !dec.is_reducible(u) || !dec.is_reducible(v) {
            continue;
        }
        if dec.molecule_of(u) != dec.molecule_of(v) {
            found = Some((e, u, v));
            break;
        }
    }
    let Some((e, u, v)) = found else {
        return FrStep::Stuck;
    };
    let mut edits = reduce_degree(g, forest, &dec, bounds, u, work).expect("u is reducible");
    edits.extend(reduce_degree(g, forest, &dec, bounds, v, work).expect("v is reducible"));
    forest.link_unchecked(e);
    debug_assert!(forest.degree(u) <= bounds[u] + 1 && forest.degree(v) <= bounds[v] + 1);
    FrStep::Merged { u, v, edits }
}

fn edit_line(prefix: String, edits: &[Edit], extra_insert: Option<(usize, usize)>) -> String {
    let mut s = prefix;
    s.push_str(" | deleted:");
    for e in edits {
        if let Edit::Delete { u, v, .. } = *e {
            s.push_str(&format!(" {u}-{v}"));
        }
    }
    s.push_str(" | inserted:");
    for e in edits {
        if let Edit::Insert { u, v, .. } = *e {
            s.push_str(&format!(" {u}-{v}"));
        }
    }
    if let Some((u, v)) = extra_insert {
        s.push_str(&format!(" {u}-{v}"));
    }
    s
}

struct Run<'a> {
    g: &'a Graph,
    bounds: &'a [usize],
    params: &'a Params,
    work: WorkCounters,
    rounds: Vec<RoundStats>,
    fr_iterations: usize,
    trace: Vec<String>,
    start: Instant,
}

impl Run<'_> {
    fn over_budget(&self) -> bool {
        self.params.work_budget.is_some_and(|b| self.work.total() > b)
    }

    /// Local search until one tree remains, the search is stuck, or the
    /// budget runs out.
    fn stage_two(&mut self, forest: &mut Forest) -> Status {
        while forest.component_count() > 1 {
            if self.over_budget() {
                return Status::BudgetExhausted;
            }
            match fr_iteration(self.g, forest, self.bounds, &mut self.work) {
                FrStep::Stuck => return Status::InfeasibleCertified,
                FrStep::Merged { u, v, edits } => {
                    self.fr_iterations += 1;
                    if self.params.trace {
                        self.trace
                            .push(edit_line(format!("FR {u} {v}"), &edits, Some((u, v))));
                    }
                }
            }
        }
        Status::TreeFound
    }

    /// One round of chain search with `ℓ = 1 … H`. Returns chains applied.
    fn round(&mut self, forest: Forest) -> (Forest, usize) {
        let g = self.g;
        let n = g.n();
        let f = forest.component_count();
        let h = (self.params.h_factor * n as f64 / f as f64).ceil().max(1.0) as usize;
        let dec = Decomposition::with_theta(g, &forest, self.bounds, h, &mut self.work);
        let mut config = Configuration::new(forest, dec, self.bounds.to_vec());
        if let Some(v) = self.params.verify_chains {
            config.verify_chains = v;
        }
        let snap = Snapshot::new(&config);
        let mut stats = RoundStats {
            f,
            h,
            theta: h,
            chains_per_ell: Vec::with_capacity(h),
            chains: 0,
            required: ((f as f64).powi(3) / (self.params.progress_divisor * (n as f64).powi(2)))
                .ceil() as usize,
            rejected: 0,
            max_raise_work: 0,
        };
        let mut events = Vec::new();
        for ell in 1..=h {
            if self.over_budget() {
                break;
            }
            let trace = self.params.trace.then_some(&mut events);
            let st = raise_configuration_with(g, &mut config, &snap, ell, trace);
            self.work.add(&st.work);
            stats.max_raise_work = stats.max_raise_work.max(st.work.total());
            stats.chains_per_ell.push(st.chains);
            stats.chains += st.chains;
            stats.rejected += st.rejected;
            debug_assert!(
                (0..n).all(|u| config.forest.degree(u) <= self.bounds[u] + 1),
                "forest left the degree bound"
            );
            if st.exhausted && st.chains == 0 {
                break;
            }
        }
        stats.chains_per_ell.resize(h, 0);
        self.trace.extend(events.iter().map(ToString::to_string));
        let applied = stats.chains;
        self.rounds.push(stats);
        (config.forest, applied)
    }

    fn finish(self, algo: &str, forest: Forest, status: Status) -> SolveResult {
        let g = self.g;
        let tree = (status == Status::TreeFound)
            .then(|| forest.edge_ids().into_iter().map(|e| g.edge(e)).collect::<Vec<_>>());
        let max_degree = forest.max_degree();
        let stats = Stats {
            n: g.n(),
            m: g.m(),
            algo: algo.to_string(),
            status,
            max_degree,
            rounds: self.rounds,
            fr_iterations: self.fr_iterations,
            work_counters: self.work,
            k_star: None,
            wall_ms: self.start.elapsed().as_secs_f64() * 1e3,
        };
        SolveResult {
            tree,
            max_degree,
            status,
            stats,
            trace: self.trace,
        }
    }
}

fn new_run<'a>(g: &'a Graph, bounds: &'a [usize], params: &'a Params) -> Run<'a> {
    assert_eq!(bounds.len(), g.n(), "one bound per node");
    Run {
        g,
        bounds,
        params,
        work: WorkCounters::default(),
        rounds: Vec::new(),
        fr_iterations: 0,
        trace: Vec::new(),
        start: Instant::now(),
    }
}

/// Local search from the empty forest, one merge per step.
pub fn solve_fr(g: &Graph, bounds: &[usize], params: &Params) -> SolveResult {
    let mut run = new_run(g, bounds, params);
    let mut forest = Forest::empty(g);
    let status = run.stage_two(&mut forest);
    run.finish("fr", forest, status)
}

/// Chain rounds while many trees remain, then local search.
pub fn solve_fast(g: &Graph, bounds: &[usize], params: &Params) -> SolveResult {
    let mut run = new_run(g, bounds, params);
    let mut forest = Forest::empty(g);
    let gate = (g.n() as f64).powf(0.75).max(params.stage_one_floor);
    while forest.component_count() as f64 >= gate && !run.over_budget() {
        let (next, applied) = run.round(forest);
        forest = next;
        if applied == 0 {
            break;
        }
    }
    let status = if run.over_budget() {
        Status::BudgetExhausted
    } else {
        run.stage_two(&mut forest)
    };
    run.finish("fast", forest, status)
}

/// Spanning tree with `deg(u) <= bounds[u] + 1`, or a certificate that none
/// with `deg(u) <= bounds[u]` exists.
pub fn solve_bdst(g: &Graph, bounds: &[usize], algo: Algo, params: &Params) -> SolveResult {
    match algo {
        Algo::Fr => solve_fr(g, bounds, params),
        Algo::Fast => solve_fast(g, bounds, params),
    }
}

/// Binary search for the smallest uniform bound `k` that yields a tree.
/// The returned tree has degree at most `k + 1`, and every failed probe
/// certifies the optimum exceeds that probe's `k`, so the degree is at most
/// one above optimal.
pub fn solve_auto(g: &Graph, algo: Algo, params: &Params) -> SolveResult {
    let n = g.n();
    let start = Instant::now();
    if n == 1 {
        let mut r = solve_bdst(g, &[0], algo, params);
        r.stats.k_star = Some(0);
        r.stats.algo = "auto".into();
        return r;
    }
    let (mut lo, mut hi) = (1, n - 1);
    let mut best: Option<(usize, SolveResult)> = None;
    let mut work = WorkCounters::default();
    let mut last = None;
    while lo <= hi {
        let k = lo + (hi - lo) / 2;
        let r = solve_bdst(g, &vec![k; n], algo, params);
        work.add(&r.stats.work_counters);
        if r.status == Status::TreeFound {
            best = Some((k, r));
            hi = k - 1;
        } else {
            lo = k + 1;
            last = Some(r);
        }
    }
    let (k, mut r) = match best {
        Some((k, r)) => (Some(k), r),
        None => (None, last.expect("at least one probe ran")),
    };
    r.stats.k_star = k;
    r.stats.algo = "auto".into();
    r.stats.work_counters = work;
    r.stats.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    r
}
