//! Exact minimum distance preservers of simple unweighted graphs.
//!
//! A distance preserver of `(G, terminals)` is a subgraph `H` of `G` whose
//! shortest-path distances agree with `G` on every required terminal pair.
//! This crate computes minimum-size preservers with four exact algorithms
//! (exhaustive reference oracle, branch and bound, Hanan-grid segment search
//! for full grids, and a connectivity-table dynamic program over nice tree
//! decompositions), plus a vertex-cover-parameterized solver for the
//! subsetwise variant and generators for several hardness-reduction
//! instance families with small brute-force oracles of the source problems.

pub mod corpus;
pub mod error;
pub mod graph;
pub mod grid;
pub mod io;
pub mod oracle;
pub mod reductions;
pub mod twdp;
pub mod vc;

pub use error::{Error, Result};
pub use graph::{
    all_pairs_distances, canonical, pairs_of, prune_minimal, shortest_path_edge_union,
    verify_preserver, DistanceMatrix, Edge, Graph, Instance, Preserver, TerminalSpec, UNREACHABLE,
};

/// A solver outcome: the optimum size together with a witness preserver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub size: usize,
    pub witness: Preserver,
}

impl Solution {
    pub fn new(witness: Preserver) -> Self {
        Solution {
            size: witness.len(),
            witness,
        }
    }
}

/// Search-effort counters reported by the solvers.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolveStats {
    /// Branch-and-bound nodes or enumerated candidates, solver dependent.
    pub nodes: u64,
    /// Stored DP tables (treewidth solver only).
    pub tables: u64,
    /// Size of the candidate edge or segment set.
    pub candidates: u64,
}
