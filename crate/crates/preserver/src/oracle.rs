//! Exact minimum-preserver computation: an exhaustive reference oracle and
//! a branch-and-bound search, both restricted to the union of shortest-path
//! edges (an optimal preserver never uses an edge outside it).

use std::time::Instant;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Instance, Preserver, UNREACHABLE};
use crate::{shortest_path_edge_union, verify_preserver, Solution, SolveStats};

/// Default hard cap on the candidate set of the exhaustive oracle.
pub const DEFAULT_CANDIDATE_CAP: usize = 30;

/// Growable bitset over candidate edge indices.
#[derive(Clone, PartialEq, Eq, Debug)]
struct Bits {
    words: Vec<u64>,
}

impl Bits {
    fn new(len: usize) -> Self {
        Bits {
            words: vec![0; len.div_ceil(64)],
        }
    }
    #[inline]
    fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }
    #[inline]
    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }
    fn count(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }
    fn intersects(&self, other: &Bits) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }
    fn and_count(&self, other: &Bits) -> u32 {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }
    fn or_assign(&mut self, other: &Bits) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }
    fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }
}

/// Finite-distance terminal pairs of an instance. Unreachable pairs are
/// preserved by every subgraph and drop out of the search entirely.
fn finite_pairs(inst: &Instance) -> Vec<(u32, u32, u32)> {
    let mut out = Vec::new();
    for (p, q) in inst.pairs() {
        let d = inst.graph.bfs(p)[q as usize];
        if d != UNREACHABLE {
            out.push((p, q, d));
        }
    }
    out
}

/// Exhaustive reference oracle: enumerates subsets of the candidate edge
/// set in increasing cardinality (and lexicographic index order within one
/// cardinality) and returns the first preserver found, which is therefore
/// the lexicographically least witness of minimum size.
pub fn brute_force_min(inst: &Instance) -> Result<(Solution, SolveStats)> {
    brute_force_min_capped(inst, DEFAULT_CANDIDATE_CAP)
}

pub fn brute_force_min_capped(inst: &Instance, cap: usize) -> Result<(Solution, SolveStats)> {
    let pairs = finite_pairs(inst);
    let candidates = shortest_path_edge_union(&inst.graph, &inst.pairs());
    brute_force_min_over(inst, &candidates, &pairs, cap)
}

/// Exhaustive minimum over subsets of an explicit candidate edge set.
/// Used with the full edge set as an unrestricted cross-check oracle.
pub fn brute_force_min_over(
    inst: &Instance,
    candidates: &[Edge],
    pairs: &[(u32, u32, u32)],
    cap: usize,
) -> Result<(Solution, SolveStats)> {
    let mut stats = SolveStats {
        candidates: candidates.len() as u64,
        ..Default::default()
    };
    if pairs.is_empty() {
        return Ok((Solution::new(Preserver::empty()), stats));
    }
    if candidates.len() > cap {
        return Err(Error::CandidateCapExceeded {
            candidates: candidates.len(),
            cap,
        });
    }
    let checker = PairChecker::new(inst.graph.n(), pairs);
    let c = candidates.len();
    for size in 0..=c {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            stats.nodes += 1;
            let edges: Vec<Edge> = combo.iter().map(|&i| candidates[i]).collect();
            if checker.all_preserved(&edges) {
                let witness = Preserver::from_edges(edges);
                debug_assert!(verify_preserver(inst, &witness));
                return Ok((Solution::new(witness), stats));
            }
            if !next_combination(&mut combo, c) {
                break;
            }
        }
    }
    unreachable!("full candidate set preserves every finite pair");
}

/// Decision variant of the exhaustive oracle: is there a preserver with at
/// most `budget` edges? Enumerates candidate subsets only up to the budget
/// cardinality, so No-instances stay cheap.
pub fn exists_preserver_within(inst: &Instance, budget: u64, cap: usize) -> Result<bool> {
    let pairs = finite_pairs(inst);
    if pairs.is_empty() {
        return Ok(true);
    }
    let candidates = shortest_path_edge_union(&inst.graph, &inst.pairs());
    if candidates.len() > cap {
        return Err(Error::CandidateCapExceeded {
            candidates: candidates.len(),
            cap,
        });
    }
    let checker = PairChecker::new(inst.graph.n(), &pairs);
    let c = candidates.len();
    let limit = (budget.min(c as u64)) as usize;
    for size in 0..=limit {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            let edges: Vec<Edge> = combo.iter().map(|&i| candidates[i]).collect();
            if checker.all_preserved(&edges) {
                return Ok(true);
            }
            if !next_combination(&mut combo, c) {
                break;
            }
        }
    }
    Ok(false)
}

/// Advances `combo` to the next k-combination of `0..n` in lexicographic
/// order; false when exhausted.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] != i + n - k {
            combo[i] += 1;
            for j in (i + 1)..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// BFS distance checker for a fixed pair set over arbitrary edge subsets.
/// Uses bitmask frontiers when the host graph has at most 64 vertices.
pub(crate) struct PairChecker {
    n: usize,
    pairs: Vec<(u32, u32, u32)>,
}

impl PairChecker {
    pub(crate) fn new(n: usize, pairs: &[(u32, u32, u32)]) -> Self {
        PairChecker {
            n,
            pairs: pairs.to_vec(),
        }
    }

    pub(crate) fn all_preserved(&self, edges: &[Edge]) -> bool {
        if self.n <= 64 {
            let mut adj = vec![0u64; self.n];
            for &(u, v) in edges {
                adj[u as usize] |= 1 << v;
                adj[v as usize] |= 1 << u;
            }
            self.pairs.iter().all(|&(p, q, d)| {
                let target = 1u64 << q;
                let mut frontier = 1u64 << p;
                let mut seen = frontier;
                let mut level = 0;
                while frontier != 0 && level < d {
                    let mut next = 0u64;
                    let mut f = frontier;
                    while f != 0 {
                        let u = f.trailing_zeros() as usize;
                        f &= f - 1;
                        next |= adj[u];
                    }
                    frontier = next & !seen;
                    seen |= frontier;
                    level += 1;
                    if seen & target != 0 {
                        return level == d;
                    }
                }
                seen & target != 0 && d == 0
            })
        } else {
            let mut adj = vec![Vec::new(); self.n];
            for &(u, v) in edges {
                adj[u as usize].push(v);
                adj[v as usize].push(u);
            }
            self.pairs.iter().all(|&(p, q, d)| {
                let mut dist = vec![UNREACHABLE; self.n];
                dist[p as usize] = 0;
                let mut queue = std::collections::VecDeque::from([p]);
                while let Some(u) = queue.pop_front() {
                    if u == q {
                        break;
                    }
                    for &v in &adj[u as usize] {
                        if dist[v as usize] == UNREACHABLE {
                            dist[v as usize] = dist[u as usize] + 1;
                            queue.push_back(v);
                        }
                    }
                }
                dist[q as usize] == d
            })
        }
    }
}

/// Options for the branch-and-bound solver.
#[derive(Debug, Clone, Copy)]
pub struct BbOpts {
    pub deadline: Option<Instant>,
    /// Node budget for the canonical-witness refinement pass; when
    /// exhausted the first-found optimal witness is returned instead.
    pub lexmin_node_budget: u64,
}

impl Default for BbOpts {
    fn default() -> Self {
        BbOpts {
            deadline: None,
            lexmin_node_budget: 2_000_000,
        }
    }
}

/// Exact branch-and-bound minimum preserver. Same optimum as
/// `brute_force_min` wherever both run, without the candidate cap.
///
/// Edges are branched on in order of decreasing shortest-path-DAG coverage.
/// The bound adds, to the committed edges, residual needs of terminal pairs
/// whose remaining usable edge sets are pairwise disjoint. After the
/// optimum is known, a second pass refines the witness to the
/// lexicographically least optimal edge set.
pub fn bb_min(inst: &Instance) -> Result<(Solution, SolveStats)> {
    bb_min_with(inst, BbOpts::default())
}

pub fn bb_min_with(inst: &Instance, opts: BbOpts) -> Result<(Solution, SolveStats)> {
    let pairs = finite_pairs(inst);
    let mut stats = SolveStats::default();
    if pairs.is_empty() {
        return Ok((Solution::new(Preserver::empty()), stats));
    }
    let candidates = shortest_path_edge_union(&inst.graph, &inst.pairs());
    stats.candidates = candidates.len() as u64;

    let mut search = BbSearch::new(&inst.graph, &pairs, &candidates, opts);
    search.seed_incumbent(inst);
    log::debug!(
        "bb: {} candidates, {} pairs, greedy incumbent {}",
        candidates.len(),
        pairs.len(),
        search.best_size
    );
    search.run(Bits::new(candidates.len()), Bits::new(candidates.len()), None)?;
    log::debug!(
        "bb: optimum {} after {} nodes, refining witness",
        search.best_size,
        search.nodes
    );
    search.lexmin_pass()?;
    stats.nodes = search.nodes;

    let witness = search.best_witness();
    debug_assert!(verify_preserver(inst, &witness));
    Ok((Solution::new(witness), stats))
}

struct BbSearch<'a> {
    g: &'a Graph,
    pairs: Vec<(u32, u32, u32)>,
    cand: Vec<Edge>,
    /// Per-vertex incident candidate edges as (neighbor, candidate index).
    adj: Vec<Vec<(u32, u32)>>,
    /// Branch order: candidate indices by descending pair-DAG coverage.
    order: Vec<usize>,
    best_size: u32,
    best: Bits,
    nodes: u64,
    opts: BbOpts,
    lexmin_nodes: u64,
}

/// Saturation cap for shortest-path counting; forcing is skipped for pairs
/// whose path counts overflow it (sound, just less propagation).
const COUNT_SAT: u64 = 1 << 62;

struct PairScan {
    /// Distances from p and q restricted to the allowed edge set.
    dp: Vec<u32>,
    dq: Vec<u32>,
    /// Saturating counts of shortest paths from p and q.
    np: Vec<u64>,
    nq: Vec<u64>,
    dag: Bits,
}

impl<'a> BbSearch<'a> {
    fn new(g: &'a Graph, pairs: &[(u32, u32, u32)], candidates: &[Edge], opts: BbOpts) -> Self {
        let mut adj = vec![Vec::new(); g.n()];
        for (i, &(u, v)) in candidates.iter().enumerate() {
            adj[u as usize].push((v, i as u32));
            adj[v as usize].push((u, i as u32));
        }
        // Static branch order: edges covering more pair DAGs first.
        let dm = crate::all_pairs_distances(
            g,
            &pairs
                .iter()
                .flat_map(|&(p, q, _)| [p, q])
                .collect::<Vec<_>>(),
        )
        .expect("validated");
        let mut cover = vec![0u32; candidates.len()];
        for (i, &(u, v)) in candidates.iter().enumerate() {
            for &(p, q, d) in pairs {
                let dp = dm.row(p).unwrap();
                let dq = dm.row(q).unwrap();
                let fits = |a: u32, b: u32| {
                    dp[a as usize] != UNREACHABLE
                        && dq[b as usize] != UNREACHABLE
                        && dp[a as usize] + 1 + dq[b as usize] == d
                };
                if fits(u, v) || fits(v, u) {
                    cover[i] += 1;
                }
            }
        }
        let mut order: Vec<usize> = (0..candidates.len()).collect();
        order.sort_by_key(|&i| (std::cmp::Reverse(cover[i]), i));

        BbSearch {
            g,
            pairs: pairs.to_vec(),
            cand: candidates.to_vec(),
            adj,
            order,
            best_size: u32::MAX,
            best: Bits::new(candidates.len()),
            nodes: 0,
            opts,
            lexmin_nodes: 0,
        }
    }

    fn best_witness(&self) -> Preserver {
        Preserver::from_edges(self.best.iter_ones().map(|i| self.cand[i]))
    }

    /// Union of one shortest path per pair, pruned to a 1-minimal
    /// preserver, as the initial incumbent.
    fn seed_incumbent(&mut self, inst: &Instance) {
        let mut edges = Vec::new();
        for &(p, q, _) in &self.pairs {
            let dist = self.g.bfs(p);
            // Walk back from q choosing the smallest-id predecessor.
            let mut cur = q;
            while cur != p {
                let dc = dist[cur as usize];
                let pred = self
                    .g
                    .neighbors(cur)
                    .iter()
                    .copied()
                    .filter(|&w| dist[w as usize] + 1 == dc)
                    .min()
                    .expect("finite pair");
                edges.push((pred.min(cur), pred.max(cur)));
                cur = pred;
            }
        }
        let seed = Preserver::from_edges(edges);
        let seed = crate::prune_minimal(inst, &seed).expect("seed preserves");
        let mut bits = Bits::new(self.cand.len());
        for &(u, v) in seed.edges() {
            let i = self.cand.binary_search(&(u, v)).expect("seed within union");
            bits.set(i);
        }
        self.best_size = seed.len() as u32;
        self.best = bits;
    }

    /// BFS with shortest-path counting restricted to `allowed` candidates.
    fn scan_from(&self, src: u32, allowed: &Bits) -> (Vec<u32>, Vec<u64>) {
        let n = self.g.n();
        let mut dist = vec![UNREACHABLE; n];
        let mut count = vec![0u64; n];
        dist[src as usize] = 0;
        count[src as usize] = 1;
        let mut queue = std::collections::VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &(v, ei) in &self.adj[u as usize] {
                if !allowed.get(ei as usize) {
                    continue;
                }
                let dv = &mut dist[v as usize];
                if *dv == UNREACHABLE {
                    *dv = du + 1;
                    queue.push_back(v);
                }
                if dist[v as usize] == du + 1 {
                    count[v as usize] =
                        count[v as usize].saturating_add(count[u as usize]).min(COUNT_SAT);
                }
            }
        }
        (dist, count)
    }

    fn scan_pair(&self, p: u32, q: u32, allowed: &Bits) -> PairScan {
        let (dp, np) = self.scan_from(p, allowed);
        let (dq, nq) = self.scan_from(q, allowed);
        let d = dp[q as usize];
        let mut dag = Bits::new(self.cand.len());
        if d != UNREACHABLE {
            for (i, &(u, v)) in self.cand.iter().enumerate() {
                if !allowed.get(i) {
                    continue;
                }
                let fits = |a: u32, b: u32| {
                    dp[a as usize] != UNREACHABLE
                        && dq[b as usize] != UNREACHABLE
                        && dp[a as usize] + 1 + dq[b as usize] == d
                };
                if fits(u, v) || fits(v, u) {
                    dag.set(i);
                }
            }
        }
        PairScan { dp, dq, np, nq, dag }
    }

    /// Checks whether `edges` alone preserve every pair.
    fn chosen_feasible(&self, chosen: &Bits) -> bool {
        self.pairs
            .iter()
            .all(|&(p, q, d)| self.scan_from(p, chosen).0[q as usize] == d)
    }

    /// One node of the search. `limit` switches to existence mode: succeed
    /// on any preserver of size at most `limit` instead of minimizing.
    fn run(&mut self, chosen0: Bits, excluded0: Bits, limit: Option<u32>) -> Result<bool> {
        self.nodes += 1;
        if let Some(deadline) = self.opts.deadline {
            if Instant::now() > deadline {
                return Err(Error::Timeout);
            }
        }
        if limit.is_some() {
            self.lexmin_nodes += 1;
            if self.lexmin_nodes > self.opts.lexmin_node_budget {
                return Ok(false);
            }
        }
        let mut chosen = chosen0;
        let mut excluded = excluded0;

        // Propagation: per pair, distances within the allowed set must not
        // exceed the target; edges carrying every shortest path of some
        // pair are forced; edges on no pair's DAG are excluded. Exclusions
        // change the allowed set, so iterate to a fixpoint.
        let mut scans: Vec<PairScan>;
        loop {
            let mut allowed = Bits::new(self.cand.len());
            for i in 0..self.cand.len() {
                if !excluded.get(i) {
                    allowed.set(i);
                }
            }
            scans = Vec::with_capacity(self.pairs.len());
            for &(p, q, d) in &self.pairs {
                let scan = self.scan_pair(p, q, &allowed);
                if scan.dp[q as usize] > d {
                    return Ok(false);
                }
                scans.push(scan);
            }
            // Forced edges: all shortest paths of a pair run through them.
            for (k, &(_, q, d)) in self.pairs.iter().enumerate() {
                let scan = &scans[k];
                let total = scan.np[q as usize];
                if total >= COUNT_SAT {
                    continue;
                }
                for i in scan.dag.iter_ones() {
                    if chosen.get(i) {
                        continue;
                    }
                    let (u, v) = self.cand[i];
                    let through = |a: u32, b: u32| {
                        if scan.dp[a as usize] != UNREACHABLE
                            && scan.dq[b as usize] != UNREACHABLE
                            && scan.dp[a as usize] + 1 + scan.dq[b as usize] == d
                        {
                            scan.np[a as usize].saturating_mul(scan.nq[b as usize])
                        } else {
                            0
                        }
                    };
                    let t = through(u, v).max(through(v, u));
                    if t >= COUNT_SAT {
                        continue;
                    }
                    if t == total {
                        chosen.set(i);
                    }
                }
            }
            // Useless edges: on no pair's DAG and not committed.
            let mut dropped = false;
            for i in 0..self.cand.len() {
                if excluded.get(i) || chosen.get(i) {
                    continue;
                }
                if !scans.iter().any(|s| s.dag.get(i)) {
                    excluded.set(i);
                    dropped = true;
                }
            }
            if !dropped {
                break;
            }
        }

        let chosen_size = chosen.count();
        let cutoff = limit.unwrap_or(self.best_size.saturating_sub(1));
        if chosen_size > cutoff {
            return Ok(false);
        }
        if self.chosen_feasible(&chosen) {
            // Every feasible completion of this node contains the forced
            // set, so `chosen` is the node optimum.
            match limit {
                Some(_) => {
                    self.best = chosen;
                    self.best_size = chosen_size;
                    return Ok(true);
                }
                None => {
                    if chosen_size < self.best_size {
                        self.best_size = chosen_size;
                        self.best = chosen;
                    }
                    return Ok(true);
                }
            }
        }

        // Admissible bound: committed edges plus residual needs over pairs
        // with disjoint usable shortest-path edge sets.
        let mut residuals: Vec<(u32, &Bits)> = Vec::new();
        for (k, &(_, q, d)) in self.pairs.iter().enumerate() {
            let have = scans[k].dag.and_count(&chosen);
            let need = d.saturating_sub(have);
            if need > 0 && self.scan_from(self.pairs[k].0, &chosen).0[q as usize] != d {
                residuals.push((need, &scans[k].dag));
            }
        }
        residuals.sort_by(|a, b| b.0.cmp(&a.0));
        let mut bound = chosen_size;
        let mut used = Bits::new(self.cand.len());
        for (need, dag) in residuals {
            let mut fresh = dag.clone();
            for (w, c) in fresh.words.iter_mut().zip(&chosen.words) {
                *w &= !c;
            }
            if !fresh.intersects(&used) {
                bound += need;
                used.or_assign(&fresh);
            }
        }
        if bound > cutoff {
            return Ok(false);
        }

        let Some(&pick) = self
            .order
            .iter()
            .find(|&&i| !chosen.get(i) && !excluded.get(i))
        else {
            return Ok(false);
        };

        let mut with = chosen.clone();
        with.set(pick);
        let found_in = self.run(with, excluded.clone(), limit)?;
        if limit.is_some() && found_in {
            return Ok(true);
        }
        let mut without = excluded;
        without.set(pick);
        let found_out = self.run(chosen, without, limit)?;
        Ok(found_in || found_out)
    }

    /// Refines the incumbent to the lexicographically least optimal
    /// witness: greedily commit each candidate, in canonical edge order,
    /// whenever some optimum-size preserver extends the commitments.
    fn lexmin_pass(&mut self) -> Result<()> {
        let k = self.best_size;
        let mut decided_in = Bits::new(self.cand.len());
        let mut decided_out = Bits::new(self.cand.len());
        for i in 0..self.cand.len() {
            if self.best.get(i) {
                // The current witness already certifies an optimum
                // containing every committed edge plus this one.
                decided_in.set(i);
                continue;
            }
            let mut with = decided_in.clone();
            with.set(i);
            let found = self.run(with, decided_out.clone(), Some(k))?;
            if self.lexmin_nodes > self.opts.lexmin_node_budget {
                // Budget exhausted; the incumbent is optimal, just not
                // guaranteed lexicographically least.
                return Ok(());
            }
            if found {
                decided_in.set(i);
            } else {
                decided_out.set(i);
            }
        }
        Ok(())
    }
}
