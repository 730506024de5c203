//! Seeded random instance families for sweeps, benchmarks, and the
//! reduction correctness tests. All generators are deterministic in the
//! seed.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, Instance, TerminalSpec};
use crate::reductions::{MccInstance, Mwc3Instance};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform simple graph with exactly `m` edges (clamped to the maximum).
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Graph {
    let mut all: Vec<(u32, u32)> = Vec::new();
    for u in 0..n as u32 {
        for v in (u + 1)..n as u32 {
            all.push((u, v));
        }
    }
    all.shuffle(rng);
    all.truncate(m.min(n * n.saturating_sub(1) / 2));
    Graph::from_edges(n, all).expect("distinct canonical edges")
}

/// Connected graph: a random spanning tree plus extra random edges up to
/// `m` total.
pub fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Graph {
    let mut g = Graph::new(n);
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(rng);
    for i in 1..n {
        let parent = order[rng.gen_range(0..i)];
        g.add_edge(order[i], parent).expect("fresh tree edge");
    }
    let mut extra: Vec<(u32, u32)> = Vec::new();
    for u in 0..n as u32 {
        for v in (u + 1)..n as u32 {
            if !g.has_edge(u, v) {
                extra.push((u, v));
            }
        }
    }
    extra.shuffle(rng);
    for (u, v) in extra {
        if g.m() >= m {
            break;
        }
        g.add_edge(u, v).expect("fresh extra edge");
    }
    g
}

pub fn random_subset(rng: &mut ChaCha8Rng, n: usize, size: usize) -> Vec<u32> {
    let mut vs: Vec<u32> = (0..n as u32).collect();
    vs.shuffle(rng);
    vs.truncate(size.min(n));
    vs.sort_unstable();
    vs
}

pub fn random_pairs(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<(u32, u32)> {
    let mut all: Vec<(u32, u32)> = Vec::new();
    for u in 0..n as u32 {
        for v in (u + 1)..n as u32 {
            all.push((u, v));
        }
    }
    all.shuffle(rng);
    all.truncate(count.min(all.len()));
    all.sort_unstable();
    all
}

/// The sweep family: random graph, random terminals, subset or pairs.
pub fn random_instance(
    rng: &mut ChaCha8Rng,
    max_n: usize,
    max_m: usize,
    max_terminals: usize,
    subset: bool,
) -> Instance {
    let n = rng.gen_range(2..=max_n.max(2));
    let max_possible = n * (n - 1) / 2;
    let m = rng.gen_range(0..=max_m.min(max_possible));
    let g = random_graph(rng, n, m);
    let spec = if subset {
        let size = rng.gen_range(0..=max_terminals.min(n));
        TerminalSpec::subset(random_subset(rng, n, size))
    } else {
        let count = rng.gen_range(0..=max_terminals);
        TerminalSpec::pairs(random_pairs(rng, n, count))
    };
    Instance::new(g, spec).expect("generated terminals in range")
}

/// Random multicolored clique instance. With `cover_class_pairs`, every
/// pair of classes is guaranteed at least one edge, which pins all
/// terminal distances in the reduced instance to three.
pub fn random_mcc(
    rng: &mut ChaCha8Rng,
    k: usize,
    max_total: usize,
    edge_prob: f64,
    cover_class_pairs: bool,
) -> MccInstance {
    let mut sizes = vec![1usize; k];
    let mut total = k;
    while total < max_total && rng.gen_bool(0.7) {
        sizes[rng.gen_range(0..k)] += 1;
        total += 1;
    }
    let mut classes = Vec::new();
    let mut next = 0u32;
    for &s in &sizes {
        classes.push((next..next + s as u32).collect::<Vec<_>>());
        next += s as u32;
    }
    let mut g = Graph::new(next as usize);
    for i in 0..k {
        for j in (i + 1)..k {
            let mut any = false;
            for &u in &classes[i] {
                for &v in &classes[j] {
                    if rng.gen_bool(edge_prob) {
                        g.add_edge(u, v).unwrap();
                        any = true;
                    }
                }
            }
            if cover_class_pairs && !any {
                let u = classes[i][rng.gen_range(0..classes[i].len())];
                let v = classes[j][rng.gen_range(0..classes[j].len())];
                g.add_edge(u, v).unwrap();
            }
        }
    }
    MccInstance::new(g, classes).expect("classes independent by construction")
}

/// Random connected multiway-cut instance with three distinct terminals.
pub fn random_mwc3(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Mwc3Instance {
    let g = random_connected_graph(rng, n.max(3), m);
    let ts = random_subset(rng, g.n(), 3);
    Mwc3Instance::new(g, [ts[0], ts[1], ts[2]]).expect("connected with distinct terminals")
}

/// Distinct random terminal placements on a grid.
pub fn random_grid_terminals(
    rng: &mut ChaCha8Rng,
    width: usize,
    height: usize,
    count: usize,
) -> Vec<u32> {
    let mut ids: Vec<u32> = (0..(width * height) as u32).collect();
    ids.shuffle(rng);
    ids.truncate(count.min(ids.len()));
    ids.sort_unstable();
    ids
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_in_seed() {
        let a = random_instance(&mut rng(7), 10, 20, 4, false);
        let b = random_instance(&mut rng(7), 10, 20, 4, false);
        assert_eq!(a.graph.edges(), b.graph.edges());
        assert_eq!(a.pairs(), b.pairs());
    }

    #[test]
    fn connected_graph_is_connected() {
        for seed in 0..20 {
            let g = random_connected_graph(&mut rng(seed), 6, 8);
            let dist = g.bfs(0);
            assert!(dist.iter().all(|&d| d != crate::UNREACHABLE));
        }
    }

    #[test]
    fn covered_mcc_has_all_class_pair_edges() {
        for seed in 0..20 {
            let src = random_mcc(&mut rng(seed), 3, 9, 0.3, true);
            for i in 0..3 {
                for j in (i + 1)..3 {
                    let any = src.classes[i].iter().any(|&u| {
                        src.classes[j].iter().any(|&v| src.graph.has_edge(u, v))
                    });
                    assert!(any);
                }
            }
        }
    }
}
