//! Subsetwise solver parameterized by vertex cover: compute a minimum
//! cover, partition the independent remainder into neighborhood classes,
//! shrink each class with the two reduction rules, then exhaustively
//! branch over cover subgraphs and per-class connection sets.
//!
//! The search space is complete for the subsetwise problem: some optimal
//! preserver connects all terminals of a class identically, keeps at most
//! one non-terminal per class, and drops non-terminals entirely from
//! classes that contain a terminal.

use std::sync::atomic::{AtomicU32, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Instance, Preserver, TerminalSpec, UNREACHABLE};
use crate::oracle::PairChecker;
use crate::{pairs_of, Solution, SolveStats};

/// One neighborhood equivalence class of the independent set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverClass {
    /// Class members, ascending.
    pub members: Vec<u32>,
    /// Common neighborhood inside the cover.
    pub neighborhood: Vec<u32>,
    /// Terminals among the members.
    pub terminals: Vec<u32>,
    /// Members kept after the reduction rules: the terminals when there
    /// are any, otherwise the smallest member as representative.
    pub retained: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct CoverStructure {
    pub cover: Vec<u32>,
    pub classes: Vec<CoverClass>,
}

/// Exact minimum vertex cover by branching on an uncovered edge.
pub fn min_vertex_cover(g: &Graph) -> Vec<u32> {
    min_vertex_cover_capped(g, g.n()).expect("cap covers every graph")
}

/// Minimum vertex cover if one of size at most `cap` exists.
pub fn min_vertex_cover_capped(g: &Graph, cap: usize) -> Option<Vec<u32>> {
    let edges = g.edges();
    for k in 0..=cap.min(g.n()) {
        let mut cover = Vec::new();
        if branch_cover(&edges, &mut cover, k) {
            cover.sort_unstable();
            return Some(cover);
        }
    }
    None
}

fn branch_cover(edges: &[Edge], cover: &mut Vec<u32>, budget: usize) -> bool {
    let uncovered = edges
        .iter()
        .find(|(u, v)| !cover.contains(u) && !cover.contains(v));
    let Some(&(u, v)) = uncovered else {
        return true;
    };
    if budget == 0 {
        return false;
    }
    for pick in [u, v] {
        cover.push(pick);
        if branch_cover(edges, cover, budget - 1) {
            return true;
        }
        cover.pop();
    }
    false
}

/// Partitions the complement of `cover` into classes of equal
/// neighborhood. Terminal and retained fields are filled by
/// [`CoverStructure::apply_rules`].
pub fn neighborhood_classes(g: &Graph, cover: &[u32]) -> Result<CoverStructure> {
    let in_cover = {
        let mut m = vec![false; g.n()];
        for &c in cover {
            if c as usize >= g.n() {
                return Err(Error::Precondition(format!("cover vertex {c} out of range")));
            }
            m[c as usize] = true;
        }
        m
    };
    for (u, v) in g.edges() {
        if !in_cover[u as usize] && !in_cover[v as usize] {
            return Err(Error::Precondition(format!(
                "edge ({u}, {v}) not covered by the given set"
            )));
        }
    }
    let mut by_signature: std::collections::BTreeMap<Vec<u32>, Vec<u32>> =
        std::collections::BTreeMap::new();
    for v in 0..g.n() as u32 {
        if !in_cover[v as usize] {
            by_signature
                .entry(g.neighbors(v).to_vec())
                .or_default()
                .push(v);
        }
    }
    let classes = by_signature
        .into_iter()
        .map(|(neighborhood, members)| CoverClass {
            members,
            neighborhood,
            terminals: Vec::new(),
            retained: Vec::new(),
        })
        .collect();
    Ok(CoverStructure {
        cover: {
            let mut c = cover.to_vec();
            c.sort_unstable();
            c.dedup();
            c
        },
        classes,
    })
}

impl CoverStructure {
    /// Non-terminal Deletion and Representative Selection.
    pub fn apply_rules(&mut self, terminals: &[u32]) {
        for class in &mut self.classes {
            class.terminals = class
                .members
                .iter()
                .copied()
                .filter(|v| terminals.binary_search(v).is_ok())
                .collect();
            class.retained = if class.terminals.is_empty() {
                vec![class.members[0]]
            } else {
                class.terminals.clone()
            };
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VcSolveOpts {
    pub workers: usize,
}

impl Default for VcSolveOpts {
    fn default() -> Self {
        VcSolveOpts { workers: 1 }
    }
}

/// Exact subsetwise minimum preserver, exponential in the vertex cover.
pub fn vc_solve(inst: &Instance) -> Result<(Solution, SolveStats)> {
    vc_solve_with(inst, VcSolveOpts::default())
}

pub fn vc_solve_with(inst: &Instance, opts: VcSolveOpts) -> Result<(Solution, SolveStats)> {
    let TerminalSpec::Subset(terminals) = &inst.terminals else {
        return Err(Error::Precondition(
            "the vertex-cover solver handles subset terminals only".into(),
        ));
    };
    let g = &inst.graph;
    let cover = min_vertex_cover(g);
    let mut structure = neighborhood_classes(g, &cover)?;
    structure.apply_rules(terminals);

    let cover_edges: Vec<Edge> = g
        .edges()
        .into_iter()
        .filter(|&(u, v)| {
            structure.cover.binary_search(&u).is_ok() && structure.cover.binary_search(&v).is_ok()
        })
        .collect();
    if cover_edges.len() > 30 {
        return Err(Error::OracleCapExceeded(format!(
            "{} cover-induced edges exceed the enumeration limit",
            cover_edges.len()
        )));
    }

    let mut pairs = Vec::new();
    for (a, b) in pairs_of(&inst.terminals) {
        let d = g.bfs(a)[b as usize];
        if d != UNREACHABLE {
            pairs.push((a, b, d));
        }
    }
    if pairs.is_empty() {
        return Ok((
            Solution::new(Preserver::empty()),
            SolveStats {
                candidates: 1,
                ..Default::default()
            },
        ));
    }
    let checker = PairChecker::new(g.n(), &pairs);

    // Per class: candidate connection sets as masks over its neighborhood,
    // ascending, each with its retained-vertex edge cost. A class whose
    // retained set is a lone non-terminal may also stay unused, which the
    // empty set covers.
    let class_choices: Vec<(Vec<u32>, Vec<u32>, usize)> = structure
        .classes
        .iter()
        .map(|c| (c.neighborhood.clone(), c.retained.clone(), c.retained.len()))
        .collect();

    let full_cover_mask: u64 = (1u64 << cover_edges.len()) - 1;
    let evaluated = AtomicU32::new(0);
    let incumbent = AtomicU32::new(u32::MAX);

    let eval_cover_mask = |hc_mask: u64| -> Option<(u32, Preserver)> {
        let mut base: Vec<Edge> = Vec::new();
        let mut m = hc_mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            base.push(cover_edges[i]);
        }
        let base_cost = base.len() as u32;
        if base_cost > incumbent.load(Ordering::Relaxed) {
            return None;
        }
        let mut best: Option<(u32, Preserver)> = None;
        // Depth-first over class connection sets with cost pruning.
        let mut stack: Vec<(usize, u32, Vec<Edge>)> = vec![(0, base_cost, base)];
        while let Some((ci, cost, edges)) = stack.pop() {
            if cost > incumbent.load(Ordering::Relaxed) {
                continue;
            }
            if ci == class_choices.len() {
                evaluated.fetch_add(1, Ordering::Relaxed);
                if checker.all_preserved(&edges) {
                    incumbent.fetch_min(cost, Ordering::Relaxed);
                    let witness = Preserver::from_edges(edges.iter().copied());
                    let cand = (cost, witness);
                    if best
                        .as_ref()
                        .map_or(true, |b| (cand.0, &cand.1) < (b.0, &b.1))
                    {
                        best = Some(cand);
                    }
                }
                continue;
            }
            let (nbhd, retained, r) = &class_choices[ci];
            // Push larger masks first so the cheap branches pop first.
            for mask in (0..(1u64 << nbhd.len())).rev() {
                let extra = (mask.count_ones() as usize * r) as u32;
                if cost + extra > incumbent.load(Ordering::Relaxed) {
                    continue;
                }
                let mut next = edges.clone();
                let mut mm = mask;
                while mm != 0 {
                    let b = mm.trailing_zeros() as usize;
                    mm &= mm - 1;
                    for &v in retained {
                        next.push((v.min(nbhd[b]), v.max(nbhd[b])));
                    }
                }
                stack.push((ci + 1, cost + extra, next));
            }
        }
        best
    };

    let best = if opts.workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .expect("thread pool");
        pool.install(|| {
            (0..=full_cover_mask)
                .into_par_iter()
                .filter_map(&eval_cover_mask)
                .reduce_with(|a, b| if (a.0, &a.1) <= (b.0, &b.1) { a } else { b })
        })
    } else {
        (0..=full_cover_mask)
            .filter_map(&eval_cover_mask)
            .reduce(|a, b| if (a.0, &a.1) <= (b.0, &b.1) { a } else { b })
    };

    let (size, witness) = best.expect("the full graph is always feasible");
    debug_assert!(crate::verify_preserver(inst, &witness));
    Ok((
        Solution {
            size: size as usize,
            witness,
        },
        SolveStats {
            nodes: evaluated.load(Ordering::Relaxed) as u64,
            candidates: cover_edges.len() as u64,
            ..Default::default()
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cover_of_star_is_center() {
        let g = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(min_vertex_cover(&g), vec![0]);
    }

    #[test]
    fn cover_sizes() {
        let c4 = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(min_vertex_cover(&c4).len(), 2);
        let triangle = Graph::from_edges(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(min_vertex_cover(&triangle).len(), 2);
    }

    #[test]
    fn classes_of_star() {
        let g = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let s = neighborhood_classes(&g, &[0]).unwrap();
        assert_eq!(s.classes.len(), 1);
        assert_eq!(s.classes[0].members, vec![1, 2, 3]);
    }

    #[test]
    fn distinct_neighborhoods_distinct_classes() {
        let g = Graph::from_edges(4, [(0, 2), (1, 2), (1, 3)]).unwrap();
        // Cover {1, 2}; vertices 0 and 3 have different neighborhoods.
        let s = neighborhood_classes(&g, &[1, 2]).unwrap();
        assert_eq!(s.classes.len(), 2);
    }

    #[test]
    fn isolated_vertex_is_its_own_class() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        let s = neighborhood_classes(&g, &[0]).unwrap();
        assert!(s
            .classes
            .iter()
            .any(|c| c.members == vec![2] && c.neighborhood.is_empty()));
    }

    #[test]
    fn non_cover_rejected() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert!(neighborhood_classes(&g, &[0]).is_err());
    }

    #[test]
    fn star_leaves_subsetwise() {
        let g = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let inst = Instance::new(g, TerminalSpec::subset([1, 2, 3])).unwrap();
        let (sol, _) = vc_solve(&inst).unwrap();
        assert_eq!(sol.size, 3);
    }

    #[test]
    fn c4_antipodal_subsetwise() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let inst = Instance::new(g, TerminalSpec::subset([0, 2])).unwrap();
        let (sol, _) = vc_solve(&inst).unwrap();
        assert_eq!(sol.size, 2);
    }

    #[test]
    fn pairs_rejected() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let inst = Instance::new(g, TerminalSpec::pairs([(0, 2)])).unwrap();
        assert!(vc_solve(&inst).is_err());
    }

    #[test]
    fn workers_agree_with_sequential() {
        let g = Graph::from_edges(
            6,
            [(0, 1), (0, 2), (1, 2), (1, 3), (2, 4), (3, 5), (4, 5)],
        )
        .unwrap();
        let inst = Instance::new(g, TerminalSpec::subset([0, 3, 5])).unwrap();
        let (a, _) = vc_solve_with(&inst, VcSolveOpts { workers: 1 }).unwrap();
        let (b, _) = vc_solve_with(&inst, VcSolveOpts { workers: 4 }).unwrap();
        assert_eq!(a.size, b.size);
        assert_eq!(a.witness, b.witness);
    }
}
