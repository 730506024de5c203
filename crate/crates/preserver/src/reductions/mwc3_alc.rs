//! The two-step chain from three-terminal multiway cut to pairwise
//! preservers on bipartite graphs with vertex cover three.
//!
//! Step one blows each vertex up into an m-clique and each edge into a
//! connector vertex adjacent to both endpoint cliques; terminal cliques
//! are pinned to a single color. A minimum cut of size `c` corresponds to
//! a minimum list-coloring of total size `(n+1)m + c`. Step two encodes
//! each color as one left-side vertex and each source vertex as one
//! right-side vertex, with one distance-2 terminal pair per source edge;
//! a color assignment of total size `k` corresponds edge-for-edge to a
//! preserver with `k` edges.

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Instance, TerminalSpec, UNREACHABLE};

#[derive(Debug, Clone)]
pub struct Mwc3Instance {
    pub graph: Graph,
    pub terminals: [u32; 3],
    pub budget: Option<u64>,
}

impl Mwc3Instance {
    pub fn new(graph: Graph, terminals: [u32; 3]) -> Result<Self> {
        if graph.n() < 3 {
            return Err(Error::InvalidInstance("fewer than 3 vertices".into()));
        }
        let dist = graph.bfs(0);
        if dist.iter().any(|&d| d == UNREACHABLE) {
            return Err(Error::InvalidInstance("graph is disconnected".into()));
        }
        let mut t = terminals;
        t.sort_unstable();
        if t[0] == t[1] || t[1] == t[2] {
            return Err(Error::InvalidInstance("terminals are not distinct".into()));
        }
        if t[2] as usize >= graph.n() {
            return Err(Error::InvalidInstance("terminal out of range".into()));
        }
        Ok(Mwc3Instance {
            graph,
            terminals,
            budget: None,
        })
    }

    pub fn with_budget(mut self, k: u64) -> Self {
        self.budget = Some(k);
        self
    }
}

/// Minimum number of edges whose removal pairwise-disconnects the three
/// terminals, by exhaustive enumeration over edge subsets.
pub fn mwc3_brute(src: &Mwc3Instance) -> Result<u64> {
    let edges = src.graph.edges();
    let m = edges.len();
    if m > 20 {
        return Err(Error::OracleCapExceeded(format!(
            "{m} edges exceed the multiway-cut oracle cap"
        )));
    }
    let separated = |mask: u64| -> bool {
        let mut g = Graph::new(src.graph.n());
        for (i, &(u, v)) in edges.iter().enumerate() {
            if mask >> i & 1 == 0 {
                g.add_edge(u, v).unwrap();
            }
        }
        let [s1, s2, s3] = src.terminals;
        let d1 = g.bfs(s1);
        let d2 = g.bfs(s2);
        d1[s2 as usize] == UNREACHABLE
            && d1[s3 as usize] == UNREACHABLE
            && d2[s3 as usize] == UNREACHABLE
    };
    let mut best = m as u32;
    for mask in 0u64..(1 << m) {
        let size = mask.count_ones();
        if size < best && separated(mask) {
            best = size;
        }
    }
    Ok(best as u64)
}

/// Agreement list coloring with colors from `{1, 2, 3}`.
#[derive(Debug, Clone)]
pub struct AlcInstance {
    pub graph: Graph,
    /// Allowed colors per vertex, each a nonempty subset of {1, 2, 3}.
    pub lists: Vec<Vec<u8>>,
    pub budget: Option<u64>,
}

impl AlcInstance {
    pub fn new(graph: Graph, lists: Vec<Vec<u8>>) -> Result<Self> {
        if lists.len() != graph.n() {
            return Err(Error::InvalidInstance("one color list per vertex required".into()));
        }
        let mut lists = lists;
        for l in &mut lists {
            l.sort_unstable();
            l.dedup();
            if l.is_empty() {
                return Err(Error::InvalidInstance("empty color list".into()));
            }
            if l.iter().any(|&c| !(1..=3).contains(&c)) {
                return Err(Error::InvalidInstance("color outside {1, 2, 3}".into()));
            }
        }
        Ok(AlcInstance {
            graph,
            lists,
            budget: None,
        })
    }

    pub fn with_budget(mut self, k: u64) -> Self {
        self.budget = Some(k);
        self
    }
}

/// Minimum total size of a valid color assignment, `None` if infeasible.
/// Exhaustive over per-vertex nonempty list subsets with pruning.
pub fn alc_brute(src: &AlcInstance) -> Result<Option<u64>> {
    let n = src.graph.n();
    if n > 12 {
        return Err(Error::OracleCapExceeded(format!(
            "{n} vertices exceed the list-coloring oracle cap"
        )));
    }
    // Nonempty subsets of each list as color bitmasks, cheapest first.
    let choices: Vec<Vec<u8>> = src
        .lists
        .iter()
        .map(|l| {
            let mask = l.iter().fold(0u8, |m, &c| m | 1 << (c - 1));
            let mut subs: Vec<u8> = (1u8..8).filter(|s| s & !mask == 0).collect();
            subs.sort_by_key(|s| s.count_ones());
            subs
        })
        .collect();
    let mut best: Option<u64> = None;
    let mut assigned: Vec<u8> = vec![0; n];
    fn dfs(
        v: usize,
        cost: u64,
        g: &Graph,
        choices: &[Vec<u8>],
        assigned: &mut Vec<u8>,
        best: &mut Option<u64>,
    ) {
        if best.is_some_and(|b| cost >= b) {
            return;
        }
        if v == g.n() {
            *best = Some(cost);
            return;
        }
        for &sub in &choices[v] {
            let ok = g
                .neighbors(v as u32)
                .iter()
                .all(|&u| u as usize > v || assigned[u as usize] & sub != 0);
            if ok {
                assigned[v] = sub;
                dfs(v + 1, cost + sub.count_ones() as u64, g, choices, assigned, best);
                assigned[v] = 0;
            }
        }
    }
    dfs(0, 0, &src.graph, &choices, &mut assigned, &mut best);
    Ok(best)
}

/// Multiway cut to agreement list coloring. The returned budget is
/// `(n+1)m + k` when the source carries a budget `k`.
pub fn mwc3_to_alc(src: &Mwc3Instance) -> Result<(AlcInstance, Option<u64>)> {
    let n = src.graph.n();
    let m = src.graph.m();
    let clique = |v: usize, i: usize| (v * m + i) as u32;
    let mut g = Graph::new(n * m + m);
    for v in 0..n {
        for i in 0..m {
            for j in (i + 1)..m {
                g.add_edge(clique(v, i), clique(v, j))?;
            }
        }
    }
    let edges = src.graph.edges();
    for (e, &(u, v)) in edges.iter().enumerate() {
        let w = (n * m + e) as u32;
        for i in 0..m {
            g.add_edge(w, clique(u as usize, i))?;
            g.add_edge(w, clique(v as usize, i))?;
        }
    }
    let mut lists = vec![vec![1u8, 2, 3]; n * m + m];
    for (c, &t) in src.terminals.iter().enumerate() {
        for i in 0..m {
            lists[clique(t as usize, i) as usize] = vec![c as u8 + 1];
        }
    }
    let budget = src.budget.map(|k| ((n + 1) * m) as u64 + k);
    let mut alc = AlcInstance::new(g, lists)?;
    alc.budget = budget;
    Ok((alc, budget))
}

/// Outcome of the coloring-to-preserver step: either a bipartite
/// vertex-cover-3 instance, or a certified infeasibility when some pair
/// has no common color at all.
#[derive(Debug, Clone)]
pub enum VcThreeReduction {
    Instance { instance: Instance, budget: Option<u64> },
    CertifiedNo { edge: Edge },
}

/// Agreement list coloring to pairwise preserver: colors on the left,
/// source vertices on the right, one distance-2 pair per source edge.
pub fn alc_to_vc3bipdp(src: &AlcInstance) -> Result<VcThreeReduction> {
    let n = src.graph.n();
    let right = |v: u32| 3 + v;
    let mut g = Graph::new(3 + n);
    for v in 0..n {
        for &c in &src.lists[v] {
            g.add_edge((c - 1) as u32, right(v as u32))?;
        }
    }
    let mut pairs = Vec::new();
    for (u, v) in src.graph.edges() {
        let common = src.lists[u as usize]
            .iter()
            .any(|c| src.lists[v as usize].contains(c));
        if !common {
            return Ok(VcThreeReduction::CertifiedNo { edge: (u, v) });
        }
        pairs.push((right(u), right(v)));
    }
    let mut instance = Instance::new(g, TerminalSpec::pairs(pairs))?;
    instance.budget = src.budget;
    Ok(VcThreeReduction::Instance {
        instance,
        budget: src.budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::bb_min;
    use crate::vc::min_vertex_cover;

    fn star() -> Mwc3Instance {
        // Center 0, leaves 1, 2, 3 as terminals.
        let g = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        Mwc3Instance::new(g, [1, 2, 3]).unwrap()
    }

    #[test]
    fn star_cut_is_two() {
        assert_eq!(mwc3_brute(&star()).unwrap(), 2);
    }

    #[test]
    fn triangle_cut_is_three() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        let src = Mwc3Instance::new(g, [0, 1, 2]).unwrap();
        assert_eq!(mwc3_brute(&src).unwrap(), 3);
        let (alc, budget) = mwc3_to_alc(&src.with_budget(3)).unwrap();
        assert_eq!(budget, Some(15));
        assert_eq!(alc.graph.n(), 12);
    }

    #[test]
    fn star_alc_counts() {
        let (alc, budget) = mwc3_to_alc(&star().with_budget(2)).unwrap();
        assert_eq!(alc.graph.n(), 15);
        assert_eq!(budget, Some(17));
    }

    #[test]
    fn alc_shared_color_pair() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let alc = AlcInstance::new(g, vec![vec![1], vec![1, 2]]).unwrap();
        let VcThreeReduction::Instance { instance, .. } = alc_to_vc3bipdp(&alc).unwrap() else {
            panic!("feasible instance expected");
        };
        let (sol, _) = bb_min(&instance).unwrap();
        assert_eq!(sol.size, 2);
    }

    #[test]
    fn alc_disjoint_lists_certified_no() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let alc = AlcInstance::new(g, vec![vec![1], vec![2]]).unwrap();
        assert!(matches!(
            alc_to_vc3bipdp(&alc).unwrap(),
            VcThreeReduction::CertifiedNo { edge: (0, 1) }
        ));
        assert_eq!(alc_brute(&alc).unwrap(), None);
    }

    #[test]
    fn target_has_cover_at_most_three() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (1, 3)]).unwrap();
        let lists = vec![
            vec![1, 2],
            vec![1, 2, 3],
            vec![2, 3],
            vec![1, 3],
            vec![1, 2],
        ];
        let alc = AlcInstance::new(g, lists).unwrap();
        let VcThreeReduction::Instance { instance, .. } = alc_to_vc3bipdp(&alc).unwrap() else {
            panic!("feasible instance expected");
        };
        assert_eq!(instance.pairs().len(), 6);
        assert!(min_vertex_cover(&instance.graph).len() <= 3);
    }

    #[test]
    fn chained_value_identity_on_the_star() {
        let src = star().with_budget(2);
        let c = mwc3_brute(&src).unwrap();
        let (alc, _) = mwc3_to_alc(&src).unwrap();
        let VcThreeReduction::Instance { instance, .. } = alc_to_vc3bipdp(&alc).unwrap() else {
            panic!("feasible instance expected");
        };
        let (sol, _) = bb_min(&instance).unwrap();
        let n = 4u64;
        let m = 3u64;
        assert_eq!(sol.size as u64, (n + 1) * m + c);
    }

    #[test]
    fn disconnected_source_rejected() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert!(Mwc3Instance::new(g, [0, 1, 2]).is_err());
    }
}
