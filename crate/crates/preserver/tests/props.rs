//! Cross-module property tests: independent oracles for the edge union,
//! restriction soundness of the candidate set, reduction-rule safety,
//! solver agreement under transformations, and planarity of the gadget
//! family.

mod common;

use preserver::corpus::{self, rng};
use preserver::grid::{build_grid, solve_grid_pdp, GridSpec};
use preserver::oracle::{bb_min, brute_force_min, brute_force_min_over};
use preserver::reductions::{bmcc_to_sdp_core, BmccInstance, GadgetParams};
use preserver::twdp::solve_via_treewidth;
use preserver::vc::vc_solve;
use preserver::{
    pairs_of, prune_minimal, shortest_path_edge_union, verify_preserver, Instance, Preserver,
    TerminalSpec, UNREACHABLE,
};

use common::{complete_bipartite, complete_graph, is_planar, shortest_path_edges_by_dfs, smooth};

#[test]
fn edge_union_matches_dfs_enumeration() {
    for seed in 0..80 {
        let inst = corpus::random_instance(&mut rng(1000 + seed), 10, 18, 4, seed % 2 == 0);
        let pairs = inst.pairs();
        let union = shortest_path_edge_union(&inst.graph, &pairs);
        let dfs = shortest_path_edges_by_dfs(&inst.graph, &pairs);
        assert_eq!(union, dfs, "seed {seed}");
    }
}

#[test]
fn sdp_and_pdp_agree_on_expanded_pairs() {
    for seed in 0..40 {
        let mut r = rng(2000 + seed);
        let g = corpus::random_graph(&mut r, 9, 16);
        let s = corpus::random_subset(&mut r, g.n(), 4);
        let subset = Instance::new(g.clone(), TerminalSpec::subset(s.clone())).unwrap();
        let pairs = Instance::new(
            g,
            TerminalSpec::pairs(pairs_of(&TerminalSpec::subset(s))),
        )
        .unwrap();
        let (a, _) = bb_min(&subset).unwrap();
        let (b, _) = bb_min(&pairs).unwrap();
        assert_eq!(a.size, b.size, "seed {seed}");
    }
}

#[test]
fn prune_minimal_is_one_edge_minimal() {
    for seed in 0..40 {
        let inst = corpus::random_instance(&mut rng(3000 + seed), 9, 14, 3, seed % 2 == 0);
        let full = Preserver::from_edges(inst.graph.edges());
        let pruned = prune_minimal(&inst, &full).unwrap();
        assert!(verify_preserver(&inst, &pruned));
        for drop in 0..pruned.len() {
            let fewer = Preserver::from_edges(
                pruned
                    .edges()
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != drop)
                    .map(|(_, &e)| e),
            );
            assert!(
                !verify_preserver(&inst, &fewer),
                "seed {seed}: edge {drop} is redundant"
            );
        }
    }
}

#[test]
fn candidate_restriction_is_sound() {
    // The optimum over the shortest-path edge union equals the optimum
    // over all edges, checked by unrestricted enumeration.
    for seed in 0..30 {
        let mut r = rng(4000 + seed);
        let g = corpus::random_graph(&mut r, 8, 12);
        let spec = if seed % 2 == 0 {
            TerminalSpec::subset(corpus::random_subset(&mut r, g.n(), 3))
        } else {
            TerminalSpec::pairs(corpus::random_pairs(&mut r, g.n(), 3))
        };
        let inst = Instance::new(g, spec).unwrap();
        let pairs: Vec<(u32, u32, u32)> = inst
            .pairs()
            .iter()
            .filter_map(|&(a, b)| {
                let d = inst.graph.bfs(a)[b as usize];
                (d != UNREACHABLE).then_some((a, b, d))
            })
            .collect();
        let all_edges = inst.graph.edges();
        let (unrestricted, _) = brute_force_min_over(&inst, &all_edges, &pairs, 32).unwrap();
        let (restricted, _) = brute_force_min(&inst).unwrap();
        assert_eq!(unrestricted.size, restricted.size, "seed {seed}");
    }
}

#[test]
fn adding_a_pair_never_shrinks_the_optimum() {
    for seed in 0..40 {
        let mut r = rng(5000 + seed);
        let g = corpus::random_graph(&mut r, 9, 15);
        let mut pairs = corpus::random_pairs(&mut r, g.n(), 3);
        let base = Instance::new(g.clone(), TerminalSpec::pairs(pairs.clone())).unwrap();
        let (before, _) = bb_min(&base).unwrap();
        let extra = corpus::random_pairs(&mut r, g.n(), 4)
            .into_iter()
            .find(|p| !pairs.contains(p));
        let Some(extra) = extra else { continue };
        pairs.push(extra);
        let bigger = Instance::new(g, TerminalSpec::pairs(pairs)).unwrap();
        let (after, _) = bb_min(&bigger).unwrap();
        assert!(after.size >= before.size, "seed {seed}");
    }
}

#[test]
fn hanan_restriction_matches_unrestricted_brute_on_small_grids() {
    // Exact equality between the segment-subset optimum and the
    // unrestricted optimum over all grid edges.
    let dims = [(3usize, 3usize), (4, 3)];
    let mut cases = 0;
    for (w, h) in dims {
        for seed in 0..12 {
            let spec = GridSpec::new(w, h).unwrap();
            let terminals = corpus::random_grid_terminals(&mut rng(6000 + seed), w, h, 3);
            if terminals.len() < 2 {
                continue;
            }
            let pairs = pairs_of(&TerminalSpec::subset(terminals));
            let inst = Instance::new(build_grid(&spec), TerminalSpec::pairs(pairs.clone())).unwrap();
            let finite: Vec<(u32, u32, u32)> = pairs
                .iter()
                .map(|&(a, b)| (a, b, inst.graph.bfs(a)[b as usize]))
                .collect();
            let all_edges = inst.graph.edges();
            let (unrestricted, _) =
                brute_force_min_over(&inst, &all_edges, &finite, all_edges.len()).unwrap();
            let (hanan, _) = solve_grid_pdp(&spec, &pairs).unwrap();
            assert_eq!(hanan.size, unrestricted.size, "{w}x{h} seed {seed}");
            cases += 1;
        }
    }
    assert!(cases >= 20);
}

#[test]
fn grid_solver_invariant_under_symmetries() {
    let spec = GridSpec::new(6, 5).unwrap();
    for seed in 0..10 {
        let ts = corpus::random_grid_terminals(&mut rng(7000 + seed), 6, 5, 4);
        if ts.len() < 2 {
            continue;
        }
        let pairs = pairs_of(&TerminalSpec::subset(ts));
        let (base, _) = solve_grid_pdp(&spec, &pairs).unwrap();
        // Eight symmetries of the rectangle; transposes swap the spec.
        type Xf = fn((usize, usize), (usize, usize)) -> (usize, usize);
        let transforms: [(bool, Xf); 8] = [
            (false, |(x, y), _| (x, y)),
            (false, |(x, y), (w, _)| (w - 1 - x, y)),
            (false, |(x, y), (_, h)| (x, h - 1 - y)),
            (false, |(x, y), (w, h)| (w - 1 - x, h - 1 - y)),
            (true, |(x, y), _| (y, x)),
            (true, |(x, y), (w, _)| (y, w - 1 - x)),
            (true, |(x, y), (_, h)| (h - 1 - y, x)),
            (true, |(x, y), (w, h)| (h - 1 - y, w - 1 - x)),
        ];
        for (transpose, f) in transforms {
            let tspec = if transpose {
                GridSpec::new(spec.height, spec.width).unwrap()
            } else {
                spec
            };
            let tpairs: Vec<(u32, u32)> = pairs
                .iter()
                .map(|&(a, b)| {
                    let (ax, ay) = f(spec.coords(a), (spec.width, spec.height));
                    let (bx, by) = f(spec.coords(b), (spec.width, spec.height));
                    (tspec.id(ax, ay), tspec.id(bx, by))
                })
                .collect();
            let (sol, _) = solve_grid_pdp(&tspec, &tpairs).unwrap();
            assert_eq!(sol.size, base.size, "seed {seed}");
        }
    }
}

#[test]
fn reduction_rules_preserve_the_optimum() {
    // vc_solve searches only rule-reduced candidates; agreement with the
    // unreduced exhaustive oracle shows the rules are safe.
    for seed in 0..40 {
        let mut r = rng(8000 + seed);
        let g = corpus::random_graph(&mut r, 10, 14);
        let s = corpus::random_subset(&mut r, g.n(), 4);
        let inst = Instance::new(g, TerminalSpec::subset(s)).unwrap();
        let brute = brute_force_min(&inst);
        let Ok((b, _)) = brute else { continue };
        let (v, _) = vc_solve(&inst).unwrap();
        assert_eq!(b.size, v.size, "seed {seed}");
    }
}

#[test]
fn solvers_verify_their_witnesses() {
    for seed in 0..25 {
        let inst = corpus::random_instance(&mut rng(9000 + seed), 9, 14, 3, seed % 2 == 0);
        let (bb, _) = bb_min(&inst).unwrap();
        assert!(verify_preserver(&inst, &bb.witness));
        let (dp, _) = solve_via_treewidth(&inst).unwrap();
        assert!(verify_preserver(&inst, &dp.witness));
        assert_eq!(bb.size, dp.size);
    }
}

#[test]
fn planarity_checker_classifies_known_graphs() {
    assert!(is_planar(&complete_graph(4)));
    assert!(!is_planar(&complete_graph(5)));
    assert!(!is_planar(&complete_bipartite(3, 3)));
    assert!(is_planar(&complete_bipartite(2, 6)));
    let grid = build_grid(&GridSpec::new(5, 4).unwrap());
    assert!(is_planar(&grid));
    // Petersen graph.
    let mut petersen = preserver::Graph::new(10);
    for i in 0..5u32 {
        petersen.add_edge(i, (i + 1) % 5).unwrap();
        petersen.add_edge(i, i + 5).unwrap();
        petersen.add_edge(i + 5, (i + 2) % 5 + 5).unwrap();
    }
    assert!(!is_planar(&petersen));
    // K5 minus an edge is planar.
    let mut k5e = complete_graph(5);
    let mut g = preserver::Graph::new(5);
    for (u, v) in k5e.edges() {
        if (u, v) != (0, 1) {
            g.add_edge(u, v).unwrap();
        }
    }
    k5e = g;
    assert!(is_planar(&k5e));
    // Smoothing keeps classification: subdivide K5 and K4 heavily.
    let subdivide = |g: &preserver::Graph| {
        let edges = g.edges();
        let mut big = preserver::Graph::new(g.n() + edges.len());
        for (i, &(u, v)) in edges.iter().enumerate() {
            let mid = (g.n() + i) as u32;
            big.add_edge(u, mid).unwrap();
            big.add_edge(mid, v).unwrap();
        }
        big
    };
    assert!(!is_planar(&smooth(&subdivide(&complete_graph(5)))));
    assert!(is_planar(&smooth(&subdivide(&complete_graph(4)))));
}

#[test]
fn bmcc_gadgets_are_planar() {
    let cases = vec![
        BmccInstance::new(vec![vec![0]], vec![vec![1]], vec![(0, 1)]).unwrap(),
        BmccInstance::new(vec![vec![0]], vec![vec![1]], vec![]).unwrap(),
        BmccInstance::new(
            vec![vec![0, 1]],
            vec![vec![2, 3]],
            vec![(0, 2), (1, 2), (1, 3)],
        )
        .unwrap(),
        BmccInstance::new(
            vec![vec![0], vec![1]],
            vec![vec![2], vec![3]],
            vec![(0, 2), (0, 3), (1, 2)],
        )
        .unwrap(),
    ];
    for (i, src) in cases.iter().enumerate() {
        let params = GadgetParams {
            alpha: 6,
            ell: 6 * (src.n() + src.k()) as u32 + 8,
            delta: 7 * (src.n() + src.k()) as u32 + 8,
        };
        let (inst, _) = bmcc_to_sdp_core(src, params).unwrap();
        let (n, m) = (inst.graph.n(), inst.graph.m());
        assert!(m <= 3 * n - 6, "case {i}: Euler bound");
        let core = smooth(&inst.graph);
        assert!(is_planar(&core), "case {i}: gadget core must be planar");
    }
}

#[test]
fn bmcc_default_params_satisfy_regime() {
    for (n, k) in [(2usize, 1usize), (4, 1), (4, 2), (8, 2)] {
        let p = GadgetParams::defaults_for(n, k);
        assert!(p.validate().is_ok());
    }
}
