//! Multicolored clique to subsetwise distance preserver.
//!
//! The target graph copies the source vertices and inter-class edges and
//! attaches one terminal per color class, adjacent to the whole class. A
//! multicolored clique of size `k` exists exactly when the target admits a
//! preserver of `k + C(k,2)` edges, one star edge per terminal plus one
//! class-pair edge each, provided every class pair is joined by at least
//! one edge (otherwise the corresponding terminal pair sits at distance
//! four or more and the budget comparison is vacuous).

use crate::error::{Error, Result};
use crate::graph::{Graph, Instance, TerminalSpec};

#[derive(Debug, Clone)]
pub struct MccInstance {
    pub graph: Graph,
    pub classes: Vec<Vec<u32>>,
}

impl MccInstance {
    pub fn new(graph: Graph, classes: Vec<Vec<u32>>) -> Result<Self> {
        let mut seen = vec![false; graph.n()];
        for class in &classes {
            for &v in class {
                if v as usize >= graph.n() {
                    return Err(Error::InvalidInstance(format!("class vertex {v} out of range")));
                }
                if std::mem::replace(&mut seen[v as usize], true) {
                    return Err(Error::InvalidInstance(format!(
                        "vertex {v} appears in two classes"
                    )));
                }
            }
            for (i, &u) in class.iter().enumerate() {
                for &v in class.iter().skip(i + 1) {
                    if graph.has_edge(u, v) {
                        return Err(Error::InvalidInstance(format!(
                            "class is not independent: edge ({u}, {v})"
                        )));
                    }
                }
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::InvalidInstance("classes do not cover every vertex".into()));
        }
        Ok(MccInstance { graph, classes })
    }

    pub fn k(&self) -> usize {
        self.classes.len()
    }
}

/// Builds the subsetwise target; returns it with the budget
/// `k' = k + C(k,2)`.
pub fn mcc_to_sdp(src: &MccInstance) -> Result<(Instance, u64)> {
    let n = src.graph.n();
    let k = src.k();
    let mut g = Graph::new(n + k);
    for (u, v) in src.graph.edges() {
        g.add_edge(u, v)?;
    }
    for (i, class) in src.classes.iter().enumerate() {
        let t = (n + i) as u32;
        for &v in class {
            g.add_edge(t, v)?;
        }
    }
    let terminals: Vec<u32> = (n as u32..(n + k) as u32).collect();
    let budget = (k + k * (k - 1) / 2) as u64;
    let inst = Instance::new(g, TerminalSpec::subset(terminals))?.with_budget(budget);
    Ok((inst, budget))
}

/// Exhaustive multicolored-clique existence check.
pub fn mcc_brute(src: &MccInstance) -> Result<bool> {
    if src.graph.n() > 12 {
        return Err(Error::OracleCapExceeded(format!(
            "{} vertices exceed the multicolored-clique oracle cap",
            src.graph.n()
        )));
    }
    let k = src.k();
    if src.classes.iter().any(|c| c.is_empty()) {
        return Ok(false);
    }
    let mut pick = vec![0usize; k];
    loop {
        let ok = (0..k).all(|i| {
            (0..i).all(|j| {
                src.graph
                    .has_edge(src.classes[i][pick[i]], src.classes[j][pick[j]])
            })
        });
        if ok {
            return Ok(true);
        }
        let mut i = 0;
        loop {
            if i == k {
                return Ok(false);
            }
            pick[i] += 1;
            if pick[i] < src.classes[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::brute_force_min;

    fn colored_triangle() -> MccInstance {
        let g = Graph::from_edges(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        MccInstance::new(g, vec![vec![0], vec![1], vec![2]]).unwrap()
    }

    #[test]
    fn triangle_counts() {
        let src = colored_triangle();
        let (inst, budget) = mcc_to_sdp(&src).unwrap();
        assert_eq!(budget, 6);
        assert_eq!(inst.graph.n(), 6);
        assert_eq!(inst.graph.m(), 6);
        assert!(mcc_brute(&src).unwrap());
        let (sol, _) = brute_force_min(&inst).unwrap();
        assert_eq!(sol.size as u64, budget);
    }

    #[test]
    fn two_classes_with_edge() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let src = MccInstance::new(g, vec![vec![0], vec![1]]).unwrap();
        let (_, budget) = mcc_to_sdp(&src).unwrap();
        assert_eq!(budget, 3);
    }

    #[test]
    fn two_classes_without_edge_is_a_no_instance() {
        let g = Graph::new(2);
        let src = MccInstance::new(g, vec![vec![0], vec![1]]).unwrap();
        assert!(!mcc_brute(&src).unwrap());
        let (inst, budget) = mcc_to_sdp(&src).unwrap();
        // The terminal pair is unreachable, so the optimum (zero) differs
        // from the yes-budget.
        let (sol, _) = brute_force_min(&inst).unwrap();
        assert_ne!(sol.size as u64, budget);
    }

    #[test]
    fn dependent_class_rejected() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        assert!(MccInstance::new(g, vec![vec![0, 1]]).is_err());
    }
}
