//! Additive-one approximations for minimum-degree and bounded-degree spanning
//! trees.
//!
//! The solvers grow a forest from `n` singletons and merge components while
//! keeping every degree within `b(u) + 1`. [`solver::solve_fr`] merges one
//! component per linear-time pass; [`solver::solve_fast`] first applies many
//! shortest augmenting chains per round before finishing with the same
//! single-merge step.

pub mod chains;
pub mod counters;
pub mod decomposition;
pub mod dsu;
pub mod forest;
pub mod generate;
pub mod graph;
pub mod oracle;
pub mod search;
pub mod solver;

pub use counters::WorkCounters;
pub use graph::{load_graph, write_edge_list, Graph, GraphError};
