//! `mdst`: solve, verify, generate and benchmark degree-bounded spanning trees.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mdst_core::dsu::Dsu;
use mdst_core::generate::{generate, lot, GenSpec};
use mdst_core::graph::{parse_edge_list, write_pairs};
use mdst_core::solver::{solve_auto, solve_bdst, Algo, Params, SolveResult, Status};
use mdst_core::{load_graph, write_edge_list, Graph, GraphError};
use serde::Serialize;
use thiserror::Error;

#[derive(Parser)]
#[command(name = "mdst", version, about = "Minimum-degree and bounded-degree spanning trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a spanning tree.
    Solve(SolveArgs),
    /// Check a tree file against a graph and optional bounds.
    Verify(VerifyArgs),
    /// Generate an instance in edge-list format.
    Gen(GenArgs),
    /// Run both algorithms over a grid of instances and print CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Fast,
    Fr,
    Auto,
}

#[derive(Args, Clone)]
#[group(multiple = false)]
struct BoundArgs {
    /// Uniform degree bound.
    #[arg(long)]
    delta: Option<usize>,
    /// File of `u b` lines; nodes not listed get bound n-1.
    #[arg(long)]
    bounds: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct Tuning {
    /// Factor in the per-round search depth `⌈h·n/f⌉`.
    #[arg(long, default_value_t = 20.0)]
    h_factor: f64,
    /// Divisor in the per-round progress target.
    #[arg(long, default_value_t = 1e5)]
    progress_divisor: f64,
    /// Minimum tree count for chain rounds.
    #[arg(long, default_value_t = 20.0)]
    stage_one_floor: f64,
    /// Give up once total work exceeds this many units.
    #[arg(long)]
    work_budget: Option<u64>,
}

impl Tuning {
    fn params(&self, trace: bool) -> Params {
        Params {
            h_factor: self.h_factor,
            progress_divisor: self.progress_divisor,
            stage_one_floor: self.stage_one_floor,
            work_budget: self.work_budget,
            trace,
            verify_chains: None,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Graph in edge-list format.
    #[arg(long, short)]
    input: PathBuf,
    /// Tree output; stdout if omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "auto")]
    algo: AlgoArg,
    #[command(flatten)]
    bound: BoundArgs,
    /// Write run statistics as JSON.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Print search events to stderr.
    #[arg(long)]
    trace: bool,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args)]
struct VerifyArgs {
    /// Graph in edge-list format.
    #[arg(long, short)]
    graph: PathBuf,
    /// Tree in edge-list format.
    #[arg(long, short)]
    tree: PathBuf,
    #[command(flatten)]
    bound: BoundArgs,
    /// Allowed excess over each bound (1 accepts solver output).
    #[arg(long, default_value_t = 0)]
    slack: usize,
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    family: Family,
    /// Output file; stdout if omitted.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Clone)]
enum Family {
    /// Random connected graph with n nodes and m edges
    Gnm {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Path on n nodes
    Path {
        #[arg(long)]
        n: usize,
    },
    /// Cycle on n nodes
    Cycle {
        #[arg(long)]
        n: usize,
    },
    /// Node 0 joined to all others
    Star {
        #[arg(long)]
        n: usize,
    },
    /// rows x cols grid
    Grid {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
    },
    /// Recursive apex graph of depth q
    Lot {
        #[arg(long)]
        q: usize,
        /// Also write the degree-q tree.
        #[arg(long)]
        bad_tree: Option<PathBuf>,
        /// Also write the degree-3 tree.
        #[arg(long)]
        good_tree: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BenchFamily {
    Gnm,
    Lot,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum, default_value = "gnm")]
    family: BenchFamily,
    /// Node counts for gnm, depths for lot.
    #[arg(long, value_delimiter = ',', default_values_t = [1024usize, 2048, 4096])]
    sizes: Vec<usize>,
    /// Edges per node for gnm.
    #[arg(long, default_value_t = 4)]
    density: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seeds per size, starting at --seed.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [AlgoName::Fast, AlgoName::Fr])]
    algos: Vec<AlgoName>,
    /// Uniform bound; without it each cell searches for the smallest bound.
    #[arg(long)]
    delta: Option<usize>,
    /// CSV output; stdout if omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgoName {
    Fast,
    Fr,
}

impl AlgoName {
    fn algo(self) -> Algo {
        match self {
            AlgoName::Fast => Algo::Fast,
            AlgoName::Fr => Algo::Fr,
        }
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Graph { path: String, source: GraphError },
    #[error("{0}")]
    Input(String),
    #[error("writing output: {0}")]
    Output(#[from] io::Error),
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<Graph, CliError> {
    let text = read(path)?;
    let loaded = load_graph(&text).map_err(|source| CliError::Graph {
        path: path.display().to_string(),
        source,
    })?;
    if loaded.dropped > 0 {
        eprintln!(
            "{}: dropped {} duplicate or self-loop edge(s)",
            path.display(),
            loaded.dropped
        );
    }
    Ok(loaded.graph)
}

/// Per-node bounds from `--delta` or a bounds file, if either was given.
fn bounds_for(n: usize, bound: &BoundArgs) -> Result<Option<Vec<usize>>, CliError> {
    if let Some(d) = bound.delta {
        return Ok(Some(vec![d; n]));
    }
    let Some(path) = &bound.bounds else {
        return Ok(None);
    };
    let text = read(path)?;
    let mut b = vec![n.saturating_sub(1); n];
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || CliError::Input(format!("{}:{}: expected `u b`", path.display(), i + 1));
        let mut it = line.split_whitespace();
        let u: usize = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
        let v: usize = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
        if it.next().is_some() {
            return Err(bad());
        }
        if u >= n {
            return Err(CliError::Input(format!(
                "{}:{}: node {u} out of range for n = {n}",
                path.display(),
                i + 1
            )));
        }
        b[u] = v;
    }
    Ok(Some(b))
}

fn run_solve(g: &Graph, bounds: Option<&[usize]>, algo: AlgoArg, params: &Params) -> SolveResult {
    let engine = match algo {
        AlgoArg::Fr => Algo::Fr,
        AlgoArg::Fast | AlgoArg::Auto => Algo::Fast,
    };
    match bounds {
        Some(b) => solve_bdst(g, b, engine, params),
        None => solve_auto(g, engine, params),
    }
}

fn cmd_solve(a: &SolveArgs) -> Result<ExitCode, CliError> {
    let g = load(&a.input)?;
    let bounds = bounds_for(g.n(), &a.bound)?;
    let params = a.tuning.params(a.trace);
    let r = run_solve(&g, bounds.as_deref(), a.algo, &params);
    if a.trace {
        let mut err = io::stderr().lock();
        for line in &r.trace {
            writeln!(err, "{line}")?;
        }
    }
    if let Some(path) = &a.stats {
        let json = serde_json::to_string_pretty(&r.stats).expect("stats serialize");
        write_out(Some(path), &(json + "\n"))?;
    }
    match r.status {
        Status::TreeFound => {
            let tree = r.tree.as_deref().unwrap_or(&[]);
            write_out(a.output.as_deref(), &write_pairs(g.n(), tree))?;
            Ok(ExitCode::SUCCESS)
        }
        Status::InfeasibleCertified => {
            eprintln!("infeasible: no spanning tree meets the bounds");
            Ok(ExitCode::from(2))
        }
        Status::BudgetExhausted => {
            eprintln!("work budget exhausted");
            Ok(ExitCode::from(3))
        }
    }
}

/// Why a tree file fails verification.
#[derive(Debug, Error, PartialEq, Eq)]
enum Reject {
    #[error("tree declares {0} nodes, graph has {1}")]
    NodeCount(usize, usize),
    #[error("tree has {0} edges, expected {1}")]
    EdgeCount(usize, usize),
    #[error("{0}-{1} is not a graph edge")]
    NotAnEdge(usize, usize),
    #[error("{0}-{1} closes a cycle")]
    Cycle(usize, usize),
    #[error("node {node} has degree {deg}, allowed {allowed}")]
    Degree { node: usize, deg: usize, allowed: usize },
}

/// Maximum degree of `pairs` if they form a spanning tree of `g` within the
/// given bounds plus `slack`.
fn check_tree(
    g: &Graph,
    declared_n: usize,
    pairs: &[(usize, usize)],
    bounds: Option<&[usize]>,
    slack: usize,
) -> Result<usize, Reject> {
    let n = g.n();
    if declared_n != n {
        return Err(Reject::NodeCount(declared_n, n));
    }
    if pairs.len() + 1 != n {
        return Err(Reject::EdgeCount(pairs.len(), n - 1));
    }
    let mut dsu = Dsu::new(n);
    let mut deg = vec![0; n];
    for &(u, v) in pairs {
        if u >= n || v >= n || g.edge_between(u, v).is_none() {
            return Err(Reject::NotAnEdge(u, v));
        }
        if dsu.union(u, v).is_none() {
            return Err(Reject::Cycle(u, v));
        }
        deg[u] += 1;
        deg[v] += 1;
    }
    // n-1 edges without a cycle span the graph.
    if let Some(b) = bounds {
        for (node, (&d, &cap)) in deg.iter().zip(b).enumerate() {
            if d > cap + slack {
                return Err(Reject::Degree {
                    node,
                    deg: d,
                    allowed: cap + slack,
                });
            }
        }
    }
    Ok(deg.into_iter().max().unwrap_or(0))
}

fn cmd_verify(a: &VerifyArgs) -> Result<ExitCode, CliError> {
    let g = load(&a.graph)?;
    let bounds = bounds_for(g.n(), &a.bound)?;
    let (declared_n, pairs) =
        parse_edge_list(&read(&a.tree)?).map_err(|source| CliError::Graph {
            path: a.tree.display().to_string(),
            source,
        })?;
    match check_tree(&g, declared_n, &pairs, bounds.as_deref(), a.slack) {
        Ok(d) => {
            println!("ok max-degree {d}");
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => {
            println!("reject: {e}");
            Ok(ExitCode::FAILURE)
        }
    }
}

fn cmd_gen(a: &GenArgs) -> Result<ExitCode, CliError> {
    let spec = match a.family.clone() {
        Family::Gnm { n, m, seed } => GenSpec::Gnm { n, m, seed },
        Family::Path { n } => GenSpec::Path { n },
        Family::Cycle { n } => GenSpec::Cycle { n },
        Family::Star { n } => GenSpec::Star { n },
        Family::Grid { rows, cols } => GenSpec::Grid { rows, cols },
        Family::Lot {
            q,
            bad_tree,
            good_tree,
        } => {
            let l = lot(q).map_err(|e| CliError::Input(e.to_string()))?;
            let n = l.graph.n();
            if let Some(p) = &bad_tree {
                write_out(Some(p), &write_pairs(n, &l.bad_tree))?;
            }
            if let Some(p) = &good_tree {
                write_out(Some(p), &write_pairs(n, &l.good_tree))?;
            }
            write_out(a.output.as_deref(), &write_edge_list(&l.graph))?;
            return Ok(ExitCode::SUCCESS);
        }
    };
    let g = generate(&spec).map_err(|e| CliError::Input(e.to_string()))?;
    write_out(a.output.as_deref(), &write_edge_list(&g))?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct BenchRow<'a> {
    family: &'a str,
    n: usize,
    m: usize,
    seed: u64,
    algo: &'a str,
    status: Status,
    edge_scans: u64,
    witness_replays: u64,
    ancestor_hops: u64,
    total_work: u64,
    wall_ms: f64,
    max_degree: usize,
}

fn cmd_bench(a: &BenchArgs) -> Result<ExitCode, CliError> {
    let mut sizes = a.sizes.clone();
    sizes.sort_unstable();
    let mut csv = csv::Writer::from_writer(Vec::new());
    for &size in &sizes {
        for seed in a.seed..a.seed + a.seeds {
            let (family, g) = match a.family {
                BenchFamily::Gnm => {
                    let m = (a.density * size).min(size * size.saturating_sub(1) / 2);
                    let g = generate(&GenSpec::Gnm { n: size, m, seed })
                        .map_err(|e| CliError::Input(e.to_string()))?;
                    ("gnm", g)
                }
                BenchFamily::Lot => {
                    let g = lot(size).map_err(|e| CliError::Input(e.to_string()))?.graph;
                    ("lot", g)
                }
            };
            let bounds = a.delta.map(|d| vec![d; g.n()]);
            for algo in &a.algos {
                let params = a.tuning.params(false);
                let r = match &bounds {
                    Some(b) => solve_bdst(&g, b, algo.algo(), &params),
                    None => solve_auto(&g, algo.algo(), &params),
                };
                let w = r.stats.work_counters;
                csv.serialize(BenchRow {
                    family,
                    n: g.n(),
                    m: g.m(),
                    seed,
                    algo: algo.algo().name(),
                    status: r.status,
                    edge_scans: w.edge_scans,
                    witness_replays: w.witness_replays,
                    ancestor_hops: w.ancestor_hops,
                    total_work: w.total(),
                    wall_ms: r.stats.wall_ms,
                    max_degree: r.max_degree,
                })
                .map_err(|e| CliError::Input(e.to_string()))?;
            }
            if a.family == BenchFamily::Lot {
                break;
            }
        }
    }
    let bytes = csv.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
    write_out(a.output.as_deref(), &String::from_utf8(bytes).expect("csv is utf-8"))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    // Usage errors exit 1; exit 2 is reserved for certified infeasibility.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Bench(a) => cmd_bench(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::FAILURE
    })
}
