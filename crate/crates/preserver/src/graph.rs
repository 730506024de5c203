//! Core graph representation and the distance-preservation primitives that
//! every solver in this crate builds on: BFS distances, terminal pair
//! normalization, preserver verification and minimality pruning.

use std::collections::BTreeMap;
use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Sentinel distance for disconnected vertex pairs.
pub const UNREACHABLE: u32 = u32::MAX;

/// Canonical undirected edge: `(min, max)`.
pub type Edge = (u32, u32);

/// Returns the canonical encoding of an edge.
#[inline]
pub fn canonical(u: u32, v: u32) -> Edge {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Simple undirected unweighted graph over vertex ids `0..n`.
///
/// Neighbor lists are kept sorted; no self-loops or parallel edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<u32>>,
    m: usize,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph {
            n,
            adj: vec![Vec::new(); n],
            m: 0,
        }
    }

    pub fn from_edges<I: IntoIterator<Item = Edge>>(n: usize, edges: I) -> Result<Self> {
        let mut g = Graph::new(n);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: u32, v: u32) -> Result<()> {
        if u as usize >= self.n || v as usize >= self.n {
            return Err(Error::InvalidInstance(format!(
                "edge ({u}, {v}) out of range for n = {}",
                self.n
            )));
        }
        if u == v {
            return Err(Error::InvalidInstance(format!("self-loop at {u}")));
        }
        if self.has_edge(u, v) {
            return Err(Error::InvalidInstance(format!("parallel edge ({u}, {v})")));
        }
        let pos = self.adj[u as usize].partition_point(|&x| x < v);
        self.adj[u as usize].insert(pos, v);
        let pos = self.adj[v as usize].partition_point(|&x| x < u);
        self.adj[v as usize].insert(pos, u);
        self.m += 1;
        Ok(())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn neighbors(&self, u: u32) -> &[u32] {
        &self.adj[u as usize]
    }

    #[inline]
    pub fn degree(&self, u: u32) -> usize {
        self.adj[u as usize].len()
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        if u as usize >= self.n || v as usize >= self.n {
            return false;
        }
        self.adj[u as usize].binary_search(&v).is_ok()
    }

    /// All edges in canonical order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.m);
        for u in 0..self.n as u32 {
            for &v in self.neighbors(u) {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// BFS levels from `src`; `UNREACHABLE` where no path exists.
    pub fn bfs(&self, src: u32) -> Vec<u32> {
        let mut dist = vec![UNREACHABLE; self.n];
        dist[src as usize] = 0;
        let mut queue = VecDeque::new();
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &v in self.neighbors(u) {
                if dist[v as usize] == UNREACHABLE {
                    dist[v as usize] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

/// Which distances an instance must preserve: all pairs within a subset
/// (SDP) or an explicit pair list (PDP).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TerminalSpec {
    Subset(Vec<u32>),
    Pairs(Vec<Edge>),
}

impl TerminalSpec {
    /// Sorted, deduplicated subset.
    pub fn subset<I: IntoIterator<Item = u32>>(vs: I) -> Self {
        let mut v: Vec<u32> = vs.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        TerminalSpec::Subset(v)
    }

    /// Canonically ordered, deduplicated pair list. Degenerate pairs (u, u)
    /// are rejected by `validate`, not silently dropped.
    pub fn pairs<I: IntoIterator<Item = (u32, u32)>>(ps: I) -> Self {
        let mut v: Vec<Edge> = ps.into_iter().map(|(u, v)| canonical(u, v)).collect();
        v.sort_unstable();
        v.dedup();
        TerminalSpec::Pairs(v)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            TerminalSpec::Subset(s) => {
                for &v in s {
                    if v as usize >= n {
                        return Err(Error::InvalidInstance(format!("terminal {v} out of range")));
                    }
                }
            }
            TerminalSpec::Pairs(ps) => {
                for &(u, v) in ps {
                    if u as usize >= n || v as usize >= n {
                        return Err(Error::InvalidInstance(format!(
                            "terminal pair ({u}, {v}) out of range"
                        )));
                    }
                    if u == v {
                        return Err(Error::InvalidInstance(format!(
                            "terminal pair with equal endpoints ({u}, {u})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// The set of vertices that occur as terminals.
    pub fn terminal_vertices(&self) -> Vec<u32> {
        match self {
            TerminalSpec::Subset(s) => s.clone(),
            TerminalSpec::Pairs(ps) => {
                let mut v: Vec<u32> = ps.iter().flat_map(|&(a, b)| [a, b]).collect();
                v.sort_unstable();
                v.dedup();
                v
            }
        }
    }
}

/// Expands a terminal spec to its canonical pair list: all pairs of the
/// subset in the SDP case, the deduplicated list itself in the PDP case.
pub fn pairs_of(spec: &TerminalSpec) -> Vec<Edge> {
    match spec {
        TerminalSpec::Subset(s) => {
            let mut out = Vec::new();
            for i in 0..s.len() {
                for j in (i + 1)..s.len() {
                    out.push((s[i], s[j]));
                }
            }
            out
        }
        TerminalSpec::Pairs(ps) => ps.clone(),
    }
}

/// A distance preserver instance: host graph, terminals, optional budget.
#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: Graph,
    pub terminals: TerminalSpec,
    pub budget: Option<u64>,
}

impl Instance {
    pub fn new(graph: Graph, terminals: TerminalSpec) -> Result<Self> {
        terminals.validate(graph.n())?;
        Ok(Instance {
            graph,
            terminals,
            budget: None,
        })
    }

    pub fn with_budget(mut self, k: u64) -> Self {
        self.budget = Some(k);
        self
    }

    pub fn pairs(&self) -> Vec<Edge> {
        pairs_of(&self.terminals)
    }
}

/// BFS distance rows for a set of source vertices.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    rows: BTreeMap<u32, Vec<u32>>,
}

impl DistanceMatrix {
    pub fn row(&self, src: u32) -> Option<&[u32]> {
        self.rows.get(&src).map(|r| r.as_slice())
    }

    /// Distance between `u` and `v`, provided at least one of them is a
    /// source (symmetry of BFS levels on undirected graphs).
    pub fn dist(&self, u: u32, v: u32) -> Option<u32> {
        if let Some(r) = self.rows.get(&u) {
            return Some(r[v as usize]);
        }
        self.rows.get(&v).map(|r| r[u as usize])
    }

    pub fn sources(&self) -> impl Iterator<Item = u32> + '_ {
        self.rows.keys().copied()
    }
}

/// Exact BFS levels from every vertex in `sources`.
pub fn all_pairs_distances(g: &Graph, sources: &[u32]) -> Result<DistanceMatrix> {
    let mut rows = BTreeMap::new();
    for &s in sources {
        if s as usize >= g.n() {
            return Err(Error::InvalidInstance(format!("source {s} out of range")));
        }
        rows.entry(s).or_insert_with(|| g.bfs(s));
    }
    Ok(DistanceMatrix { rows })
}

/// An edge subset of a host graph; the solution object of all solvers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Preserver {
    edges: Vec<Edge>,
}

impl Preserver {
    pub fn empty() -> Self {
        Preserver { edges: Vec::new() }
    }

    /// Builds a preserver from edges, canonicalizing and deduplicating.
    pub fn from_edges<I: IntoIterator<Item = (u32, u32)>>(edges: I) -> Self {
        let mut e: Vec<Edge> = edges.into_iter().map(|(u, v)| canonical(u, v)).collect();
        e.sort_unstable();
        e.dedup();
        Preserver { edges: e }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    #[inline]
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn contains(&self, u: u32, v: u32) -> bool {
        self.edges.binary_search(&canonical(u, v)).is_ok()
    }

    /// True when every edge exists in `g`.
    pub fn is_subgraph_of(&self, g: &Graph) -> bool {
        self.edges.iter().all(|&(u, v)| g.has_edge(u, v))
    }

    /// Adjacency lists of the preserver over the host vertex set.
    pub fn adjacency(&self, n: usize) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &self.edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        adj
    }
}

fn bfs_adj(adj: &[Vec<u32>], src: u32) -> Vec<u32> {
    let mut dist = vec![UNREACHABLE; adj.len()];
    dist[src as usize] = 0;
    let mut queue = VecDeque::new();
    queue.push_back(src);
    while let Some(u) = queue.pop_front() {
        let du = dist[u as usize];
        for &v in &adj[u as usize] {
            if dist[v as usize] == UNREACHABLE {
                dist[v as usize] = du + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Union of all edges lying on some shortest path between a required pair.
///
/// Edge `uv` qualifies for pair `{p, q}` exactly when
/// `d(p,u) + 1 + d(v,q) = d(p,q)` in either orientation, finite distances
/// only. By the all-edges-needed observation, an optimal preserver never
/// uses edges outside this set.
pub fn shortest_path_edge_union(g: &Graph, pairs: &[Edge]) -> Vec<Edge> {
    let mut sources: Vec<u32> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    sources.sort_unstable();
    sources.dedup();
    let dm = all_pairs_distances(g, &sources).expect("terminals validated");

    let mut out = Vec::new();
    for (u, v) in g.edges() {
        let mut onpath = false;
        for &(p, q) in pairs {
            let dp = dm.row(p).unwrap();
            let dq = dm.row(q).unwrap();
            let d = dp[q as usize];
            if d == UNREACHABLE {
                continue;
            }
            let (du_p, dv_p) = (dp[u as usize], dp[v as usize]);
            let (du_q, dv_q) = (dq[u as usize], dq[v as usize]);
            if du_p != UNREACHABLE && dv_q != UNREACHABLE && du_p + 1 + dv_q == d {
                onpath = true;
                break;
            }
            if dv_p != UNREACHABLE && du_q != UNREACHABLE && dv_p + 1 + du_q == d {
                onpath = true;
                break;
            }
        }
        if onpath {
            out.push((u, v));
        }
    }
    out
}

/// True iff `h` preserves the exact graph distance of every required pair.
///
/// Pairs that are unreachable in the host graph count as preserved by any
/// subgraph (they cannot become more disconnected).
pub fn verify_preserver(inst: &Instance, h: &Preserver) -> bool {
    debug_assert!(h.is_subgraph_of(&inst.graph));
    let pairs = inst.pairs();
    if pairs.is_empty() {
        return true;
    }
    let mut sources: Vec<u32> = pairs.iter().map(|&(a, _)| a).collect();
    sources.sort_unstable();
    sources.dedup();

    let adj = h.adjacency(inst.graph.n());
    let mut hrows: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for &s in &sources {
        hrows.insert(s, bfs_adj(&adj, s));
    }
    let grows = all_pairs_distances(&inst.graph, &sources).expect("validated");

    for &(p, q) in &pairs {
        let dg = grows.row(p).unwrap()[q as usize];
        if dg == UNREACHABLE {
            continue;
        }
        if hrows[&p][q as usize] != dg {
            return false;
        }
    }
    true
}

/// First required pair whose distance `h` fails to preserve, with the host
/// and subgraph distances. `None` when `h` is a preserver.
pub fn first_violated_pair(inst: &Instance, h: &Preserver) -> Option<(Edge, u32, u32)> {
    let pairs = inst.pairs();
    let adj = h.adjacency(inst.graph.n());
    for &(p, q) in &pairs {
        let dg = inst.graph.bfs(p)[q as usize];
        if dg == UNREACHABLE {
            continue;
        }
        let dh = bfs_adj(&adj, p)[q as usize];
        if dh != dg {
            return Some(((p, q), dg, dh));
        }
    }
    None
}

/// Shrinks a preserver to a 1-edge-minimal one: removing any single edge of
/// the result breaks some pair's distance. Edges are tried in descending
/// canonical order, so the witness is deterministic.
pub fn prune_minimal(inst: &Instance, h: &Preserver) -> Result<Preserver> {
    if !verify_preserver(inst, h) {
        return Err(Error::Precondition(
            "prune_minimal requires a valid preserver".into(),
        ));
    }
    let mut edges = h.edges().to_vec();
    let mut i = edges.len();
    while i > 0 {
        i -= 1;
        let e = edges.remove(i);
        let candidate = Preserver::from_edges(edges.iter().copied());
        if !verify_preserver(inst, &candidate) {
            edges.insert(i, e);
        }
    }
    Ok(Preserver::from_edges(edges))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    fn cycle(n: u32) -> Graph {
        Graph::from_edges(n as usize, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    #[test]
    fn bfs_distances_on_path() {
        let g = path3();
        let dm = all_pairs_distances(&g, &[0]).unwrap();
        assert_eq!(dm.dist(0, 2), Some(2));
    }

    #[test]
    fn bfs_distances_on_c4() {
        let g = cycle(4);
        let dm = all_pairs_distances(&g, &[0]).unwrap();
        assert_eq!(dm.dist(0, 2), Some(2));
    }

    #[test]
    fn bfs_unreachable_sentinel() {
        let g = Graph::new(2);
        let dm = all_pairs_distances(&g, &[0]).unwrap();
        assert_eq!(dm.dist(0, 1), Some(UNREACHABLE));
    }

    #[test]
    fn source_out_of_range_is_an_error() {
        let g = path3();
        assert!(all_pairs_distances(&g, &[7]).is_err());
    }

    #[test]
    fn pairs_of_subset_and_dedup() {
        assert_eq!(pairs_of(&TerminalSpec::subset([0, 1, 2])).len(), 3);
        assert_eq!(pairs_of(&TerminalSpec::subset([0])).len(), 0);
        assert_eq!(
            pairs_of(&TerminalSpec::pairs([(1, 0), (0, 1)])),
            vec![(0, 1)]
        );
    }

    #[test]
    fn edge_union_c4_both_paths() {
        let g = cycle(4);
        let u = shortest_path_edge_union(&g, &[(0, 2)]);
        assert_eq!(u.len(), 4);
    }

    #[test]
    fn edge_union_c5_unique_path() {
        let g = cycle(5);
        let u = shortest_path_edge_union(&g, &[(0, 2)]);
        assert_eq!(u, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn edge_union_path_endpoints() {
        let g = path3();
        let u = shortest_path_edge_union(&g, &[(0, 2)]);
        assert_eq!(u, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn verify_full_graph_and_partial() {
        let g = cycle(4);
        let inst = Instance::new(g.clone(), TerminalSpec::pairs([(0, 2)])).unwrap();
        assert!(verify_preserver(
            &inst,
            &Preserver::from_edges(g.edges())
        ));
        assert!(verify_preserver(
            &inst,
            &Preserver::from_edges([(0, 1), (1, 2)])
        ));
        assert!(!verify_preserver(&inst, &Preserver::from_edges([(0, 1)])));
    }

    #[test]
    fn unreachable_pairs_count_as_preserved() {
        let g = Graph::new(2);
        let inst = Instance::new(g, TerminalSpec::pairs([(0, 1)])).unwrap();
        assert!(verify_preserver(&inst, &Preserver::empty()));
    }

    #[test]
    fn prune_c4_to_single_path() {
        let g = cycle(4);
        let inst = Instance::new(g.clone(), TerminalSpec::pairs([(0, 2)])).unwrap();
        let pruned = prune_minimal(&inst, &Preserver::from_edges(g.edges())).unwrap();
        assert_eq!(pruned.len(), 2);
        assert!(verify_preserver(&inst, &pruned));
    }

    #[test]
    fn prune_star_keeps_all_edges() {
        let g = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let inst = Instance::new(g.clone(), TerminalSpec::subset([1, 2, 3])).unwrap();
        let h = Preserver::from_edges(g.edges());
        let pruned = prune_minimal(&inst, &h).unwrap();
        assert_eq!(pruned, h);
    }

    #[test]
    fn prune_is_a_fixpoint_on_minimal_input() {
        let g = cycle(4);
        let inst = Instance::new(g, TerminalSpec::pairs([(0, 2)])).unwrap();
        let h = Preserver::from_edges([(0, 1), (1, 2)]);
        assert_eq!(prune_minimal(&inst, &h).unwrap(), h);
    }

    #[test]
    fn prune_rejects_non_preserver() {
        let g = cycle(4);
        let inst = Instance::new(g, TerminalSpec::pairs([(0, 2)])).unwrap();
        assert!(prune_minimal(&inst, &Preserver::empty()).is_err());
    }

    #[test]
    fn graph_rejects_loops_and_duplicates() {
        let mut g = Graph::new(3);
        assert!(g.add_edge(0, 0).is_err());
        g.add_edge(0, 1).unwrap();
        assert!(g.add_edge(1, 0).is_err());
        assert!(g.add_edge(0, 5).is_err());
    }
}
