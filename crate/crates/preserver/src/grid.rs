//! Grid instances, Hanan grid construction, and the exact segment-subset
//! solver for pairwise preservers on full grids.
//!
//! A minimum preserver on a full grid may be assumed to live inside the
//! Hanan grid of the terminals (the rows and columns they occupy), and a
//! minimal preserver uses each maximal straight segment between consecutive
//! intersections either completely or not at all. The solver therefore
//! searches over segment subsets: banded subset enumeration while the
//! segment count is small, and an exact weighted branch and bound above
//! that, which is what keeps five-terminal instances on large grids
//! tractable.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{canonical, Edge, Graph, Instance, Preserver, TerminalSpec};
use crate::{verify_preserver, Solution, SolveStats};

/// Segment count up to which plain banded subset enumeration is used.
const ENUM_SEGMENT_CAP: usize = 24;

/// A rectangular grid with the canonical id mapping `id = y * width + x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
}

impl GridSpec {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInstance("grid with zero dimension".into()));
        }
        Ok(GridSpec { width, height })
    }

    #[inline]
    pub fn id(&self, x: usize, y: usize) -> u32 {
        debug_assert!(x < self.width && y < self.height);
        (y * self.width + x) as u32
    }

    #[inline]
    pub fn coords(&self, id: u32) -> (usize, usize) {
        let id = id as usize;
        (id % self.width, id / self.width)
    }

    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height
    }

    pub fn vertex_count(&self) -> usize {
        self.width * self.height
    }
}

/// The 4-neighbor lattice graph of a grid spec.
pub fn build_grid(spec: &GridSpec) -> Graph {
    let mut g = Graph::new(spec.vertex_count());
    for y in 0..spec.height {
        for x in 0..spec.width {
            if x + 1 < spec.width {
                g.add_edge(spec.id(x, y), spec.id(x + 1, y)).unwrap();
            }
            if y + 1 < spec.height {
                g.add_edge(spec.id(x, y), spec.id(x, y + 1)).unwrap();
            }
        }
    }
    g
}

/// A maximal straight grid path between two consecutive Hanan intersections.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub a: (usize, usize),
    pub b: (usize, usize),
    pub len: u32,
}

/// The Hanan grid of a terminal set: occupied rows and columns, their
/// intersections, and the straight segments between consecutive
/// intersections.
#[derive(Debug, Clone)]
pub struct HananGrid {
    pub xs: Vec<usize>,
    pub ys: Vec<usize>,
    pub intersections: Vec<(usize, usize)>,
    pub segments: Vec<Segment>,
}

impl HananGrid {
    /// Index of intersection `(xs[ix], ys[iy])` in node numbering.
    #[inline]
    pub fn node(&self, ix: usize, iy: usize) -> usize {
        iy * self.xs.len() + ix
    }
}

/// Builds the Hanan grid of `terminals` (vertex ids of `spec`).
///
/// Rows and columns of the host grid without terminals are irrelevant
/// (extreme empty rows and columns never carry shortest terminal paths),
/// so the construction depends only on the occupied coordinates.
pub fn hanan_grid(spec: &GridSpec, terminals: &[u32]) -> Result<HananGrid> {
    if terminals.is_empty() {
        return Err(Error::Precondition("empty terminal set".into()));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &t in terminals {
        if t as usize >= spec.vertex_count() {
            return Err(Error::InvalidInstance(format!("terminal {t} outside grid")));
        }
        let (x, y) = spec.coords(t);
        xs.push(x);
        ys.push(y);
    }
    xs.sort_unstable();
    xs.dedup();
    ys.sort_unstable();
    ys.dedup();

    let mut intersections = Vec::with_capacity(xs.len() * ys.len());
    for &y in &ys {
        for &x in &xs {
            intersections.push((x, y));
        }
    }

    let mut segments = Vec::new();
    for &y in &ys {
        for w in xs.windows(2) {
            segments.push(Segment {
                a: (w[0], y),
                b: (w[1], y),
                len: (w[1] - w[0]) as u32,
            });
        }
    }
    for &x in &xs {
        for w in ys.windows(2) {
            segments.push(Segment {
                a: (x, w[0]),
                b: (x, w[1]),
                len: (w[1] - w[0]) as u32,
            });
        }
    }

    Ok(HananGrid {
        xs,
        ys,
        intersections,
        segments,
    })
}

/// Options for the grid solver.
#[derive(Debug, Clone, Copy)]
pub struct GridSolveOpts {
    /// Worker count for the subset-enumeration bands; 1 means sequential.
    pub workers: usize,
}

impl Default for GridSolveOpts {
    fn default() -> Self {
        GridSolveOpts { workers: 1 }
    }
}

/// Exact minimum pairwise distance preserver on a full grid.
pub fn solve_grid_pdp(spec: &GridSpec, pairs: &[Edge]) -> Result<(Solution, SolveStats)> {
    solve_grid_pdp_with(spec, pairs, GridSolveOpts::default())
}

pub fn solve_grid_pdp_with(
    spec: &GridSpec,
    pairs: &[Edge],
    opts: GridSolveOpts,
) -> Result<(Solution, SolveStats)> {
    let mut stats = SolveStats::default();
    let mut canon: Vec<Edge> = pairs.iter().map(|&(u, v)| canonical(u, v)).collect();
    canon.sort_unstable();
    canon.dedup();
    for &(u, v) in &canon {
        if u == v {
            return Err(Error::InvalidInstance(format!("degenerate pair ({u}, {u})")));
        }
        if v as usize >= spec.vertex_count() {
            return Err(Error::InvalidInstance(format!("pair vertex {v} outside grid")));
        }
    }
    if canon.is_empty() {
        return Ok((Solution::new(Preserver::empty()), stats));
    }

    let mut terminals: Vec<u32> = canon.iter().flat_map(|&(a, b)| [a, b]).collect();
    terminals.sort_unstable();
    terminals.dedup();
    let hanan = hanan_grid(spec, &terminals)?;
    if hanan.segments.len() > 64 {
        return Err(Error::OracleCapExceeded(format!(
            "{} Hanan segments exceed the 64-segment search limit",
            hanan.segments.len()
        )));
    }
    let prob = SegProblem::new(spec, &hanan, &canon);

    // Segments on no pair's shortest path can never appear in a minimum
    // preserver; drop them before searching.
    let useful: Vec<usize> = (0..prob.segs.len())
        .filter(|&s| prob.pair_dags.iter().any(|d| d >> s & 1 == 1))
        .collect();
    stats.candidates = useful.len() as u64;

    let best_mask = if useful.len() <= ENUM_SEGMENT_CAP {
        enumerate_subsets(&prob, &useful, opts.workers, &mut stats)
    } else {
        segment_branch_and_bound(&prob, &useful, &mut stats)
    };

    let witness = prob.mask_to_preserver(spec, best_mask);
    let inst = Instance::new(build_grid(spec), TerminalSpec::pairs(canon.iter().copied()))?;
    debug_assert!(verify_preserver(&inst, &witness));
    Ok((Solution::new(witness), stats))
}

/// The segment-level search problem: intersections as nodes, segments as
/// weighted edges, pair distances equal to Manhattan distances.
struct SegProblem {
    nx: usize,
    nodes: usize,
    segs: Vec<(usize, usize, u32)>,
    /// (node of p, node of q, required distance) per pair.
    pairs: Vec<(usize, usize, u32)>,
    /// Mask of segments lying on some shortest path of each pair.
    pair_dags: Vec<u64>,
    hanan: HananGrid,
}

impl SegProblem {
    fn new(spec: &GridSpec, hanan: &HananGrid, pairs: &[Edge]) -> Self {
        let nx = hanan.xs.len();
        let ny = hanan.ys.len();
        let nodes = nx * ny;
        let xpos = |x: usize| hanan.xs.binary_search(&x).unwrap();
        let ypos = |y: usize| hanan.ys.binary_search(&y).unwrap();

        let segs: Vec<(usize, usize, u32)> = hanan
            .segments
            .iter()
            .map(|s| {
                let a = ypos(s.a.1) * nx + xpos(s.a.0);
                let b = ypos(s.b.1) * nx + xpos(s.b.0);
                (a, b, s.len)
            })
            .collect();

        let coord = |node: usize| (hanan.xs[node % nx], hanan.ys[node / nx]);
        let man = |a: (usize, usize), b: (usize, usize)| {
            (a.0.abs_diff(b.0) + a.1.abs_diff(b.1)) as u32
        };

        let mut prob_pairs = Vec::new();
        let mut pair_dags = Vec::new();
        for &(u, v) in pairs {
            let (ux, uy) = spec.coords(u);
            let (vx, vy) = spec.coords(v);
            let pn = ypos(uy) * nx + xpos(ux);
            let qn = ypos(vy) * nx + xpos(vx);
            let d = man((ux, uy), (vx, vy));
            let mut dag = 0u64;
            for (i, &(a, b, len)) in segs.iter().enumerate() {
                let (pa, pb) = (coord(a), coord(b));
                let (pc, qc) = ((ux, uy), (vx, vy));
                if man(pc, pa) + len + man(pb, qc) == d || man(pc, pb) + len + man(pa, qc) == d {
                    dag |= 1 << i;
                }
            }
            prob_pairs.push((pn, qn, d));
            pair_dags.push(dag);
        }

        SegProblem {
            nx,
            nodes,
            segs,
            pairs: prob_pairs,
            pair_dags,
            hanan: hanan.clone(),
        }
    }

    fn mask_len(&self, mask: u64) -> u32 {
        let mut total = 0;
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            total += self.segs[i].2;
            m &= m - 1;
        }
        total
    }

    /// Dijkstra over the chosen segments; node counts here are tiny, so a
    /// linear-scan implementation is plenty.
    fn dist_in_mask(&self, mask: u64, from: usize, to: usize) -> u32 {
        const INF: u32 = u32::MAX;
        let mut dist = vec![INF; self.nodes];
        let mut done = vec![false; self.nodes];
        dist[from] = 0;
        loop {
            let mut u = usize::MAX;
            let mut best = INF;
            for i in 0..self.nodes {
                if !done[i] && dist[i] < best {
                    best = dist[i];
                    u = i;
                }
            }
            if u == usize::MAX {
                return INF;
            }
            if u == to {
                return dist[u];
            }
            done[u] = true;
            let mut m = mask;
            while m != 0 {
                let i = m.trailing_zeros() as usize;
                m &= m - 1;
                let (a, b, w) = self.segs[i];
                let v = if a == u {
                    b
                } else if b == u {
                    a
                } else {
                    continue;
                };
                if dist[u] != INF && dist[u] + w < dist[v] {
                    dist[v] = dist[u] + w;
                }
            }
        }
    }

    fn feasible(&self, mask: u64) -> bool {
        self.pairs
            .iter()
            .all(|&(p, q, d)| self.dist_in_mask(mask, p, q) == d)
    }

    /// Per-pair L-shaped staircase snapped to the Hanan grid; always a
    /// feasible (not necessarily optimal) subset.
    fn greedy_mask(&self) -> u64 {
        let nx = self.nx;
        let mut mask = 0u64;
        let seg_index = |a: usize, b: usize| {
            self.segs
                .iter()
                .position(|&(x, y, _)| (x == a && y == b) || (x == b && y == a))
                .unwrap()
        };
        for &(p, q, _) in &self.pairs {
            let (mut ix, mut iy) = (p % nx, p / nx);
            let (tx, ty) = (q % nx, q / nx);
            while ix != tx {
                let nxt = if ix < tx { ix + 1 } else { ix - 1 };
                mask |= 1 << seg_index(iy * nx + ix, iy * nx + nxt);
                ix = nxt;
            }
            while iy != ty {
                let nxt = if iy < ty { iy + 1 } else { iy - 1 };
                mask |= 1 << seg_index(iy * nx + ix, nxt * nx + ix);
                iy = nxt;
            }
        }
        mask
    }

    fn mask_to_preserver(&self, spec: &GridSpec, mask: u64) -> Preserver {
        let mut edges: Vec<Edge> = Vec::new();
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            let s = self.hanan.segments[i];
            if s.a.1 == s.b.1 {
                let y = s.a.1;
                for x in s.a.0..s.b.0 {
                    edges.push((spec.id(x, y), spec.id(x + 1, y)));
                }
            } else {
                let x = s.a.0;
                for y in s.a.1..s.b.1 {
                    edges.push((spec.id(x, y), spec.id(x, y + 1)));
                }
            }
        }
        Preserver::from_edges(edges)
    }
}

/// Banded subset enumeration: bands of equal segment count, in increasing
/// popcount, each band evaluated in parallel and reduced deterministically.
fn enumerate_subsets(
    prob: &SegProblem,
    useful: &[usize],
    workers: usize,
    stats: &mut SolveStats,
) -> u64 {
    let s = useful.len();
    let expand = |small: u64| -> u64 {
        let mut full = 0u64;
        let mut m = small;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            full |= 1 << useful[i];
        }
        full
    };

    let greedy = prob.greedy_mask();
    let mut best_mask = greedy;
    let mut best_size = prob.mask_len(greedy);
    let mut evaluated = 0u64;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool");

    for c in 0..=s {
        if best_size <= c as u32 {
            break;
        }
        // Collect the band's combination masks (Gosper order).
        let mut band = Vec::new();
        if c == 0 {
            band.push(0u64);
        } else {
            let mut m: u64 = (1 << c) - 1;
            while m < (1u64 << s) {
                band.push(m);
                let lo = m & m.wrapping_neg();
                let carry = m + lo;
                m = (((m ^ carry) >> 2) / lo) | carry;
            }
        }
        evaluated += band.len() as u64;
        let threshold = best_size;
        let band_best = pool.install(|| {
            band.par_chunks(4096)
                .map(|chunk| {
                    let mut local: Option<(u32, u64)> = None;
                    for &small in chunk {
                        let full = expand(small);
                        let size = prob.mask_len(full);
                        if size >= threshold {
                            continue;
                        }
                        if prob.feasible(full) {
                            let cand = (size, full);
                            if local.map_or(true, |b| cand < b) {
                                local = Some(cand);
                            }
                        }
                    }
                    local
                })
                .reduce(|| None, |a, b| match (a, b) {
                    (Some(x), Some(y)) => Some(x.min(y)),
                    (x, None) => x,
                    (None, y) => y,
                })
        });
        if let Some((size, mask)) = band_best {
            if size < best_size {
                best_size = size;
                best_mask = mask;
            }
        }
    }
    stats.nodes = evaluated;
    best_mask
}

/// Exact weighted branch and bound over segments, used when the segment
/// count makes full enumeration infeasible (five terminals on large grids).
fn segment_branch_and_bound(prob: &SegProblem, useful: &[usize], stats: &mut SolveStats) -> u64 {
    let all_useful: u64 = useful.iter().fold(0u64, |m, &i| m | 1 << i);
    let greedy = prob.greedy_mask();
    let mut bb = SegBb {
        prob,
        best_mask: greedy,
        best_size: prob.mask_len(greedy),
        nodes: 0,
    };
    bb.search(0, !all_useful);
    stats.nodes = bb.nodes;
    bb.best_mask
}

struct SegBb<'a> {
    prob: &'a SegProblem,
    best_mask: u64,
    best_size: u32,
    nodes: u64,
}

impl SegBb<'_> {
    fn search(&mut self, chosen0: u64, excluded: u64) {
        self.nodes += 1;
        let mut chosen = chosen0;
        let allowed = !excluded;

        // Every pair must still reach its required distance in the allowed
        // set; afterwards, a segment whose removal from `allowed` breaks a
        // pair belongs to every feasible completion. Forcing depends only
        // on `allowed`, so a single sweep finds all forced segments.
        for &(p, q, d) in &self.prob.pairs {
            if self.prob.dist_in_mask(allowed, p, q) > d {
                return;
            }
        }
        let mut undecided = allowed & !chosen;
        while undecided != 0 {
            let i = undecided.trailing_zeros() as usize;
            undecided &= undecided - 1;
            let without = allowed & !(1u64 << i);
            let breaks = self
                .prob
                .pairs
                .iter()
                .any(|&(p, q, d)| self.prob.dist_in_mask(without, p, q) > d);
            if breaks {
                chosen |= 1 << i;
            }
        }

        let chosen_size = self.prob.mask_len(chosen);
        if chosen_size >= self.best_size {
            return;
        }
        if self.prob.feasible(chosen) {
            // All feasible completions contain the forced set, so this node
            // is settled.
            self.best_size = chosen_size;
            self.best_mask = chosen;
            return;
        }

        // Admissible bound: chosen length plus residual needs of pairs with
        // pairwise disjoint usable shortest-path segment sets.
        let mut residuals: Vec<(u32, u64)> = Vec::new();
        for (k, &(p, q, d)) in self.prob.pairs.iter().enumerate() {
            if self.prob.dist_in_mask(chosen, p, q) == d {
                continue;
            }
            let usable = self.prob.pair_dags[k] & allowed & !chosen;
            let have = self.prob.mask_len(self.prob.pair_dags[k] & chosen);
            let need = d.saturating_sub(have);
            if need > 0 {
                residuals.push((need, usable));
            }
        }
        residuals.sort_by(|a, b| b.0.cmp(&a.0));
        let mut bound = chosen_size;
        let mut used = 0u64;
        for &(need, usable) in &residuals {
            if usable & used == 0 {
                bound += need;
                used |= usable;
            }
        }
        if bound >= self.best_size {
            return;
        }

        // Branch on the undecided segment covering the most pair DAGs.
        let undecided = allowed & !chosen;
        let mut pick = None;
        let mut pick_cover = 0usize;
        let mut m = undecided;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            let cover = self
                .prob
                .pair_dags
                .iter()
                .filter(|&&d| d >> i & 1 == 1)
                .count();
            if cover > pick_cover {
                pick_cover = cover;
                pick = Some(i);
            }
        }
        let Some(i) = pick else { return };
        self.search(chosen | 1 << i, excluded);
        self.search(chosen, excluded | 1 << i);
    }
}
