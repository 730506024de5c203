//! Rectilinear Steiner arborescence to pairwise distance preserver on the
//! grid, plus an exact RSA oracle.
//!
//! The reduction pairs every point with the origin on the bounding grid;
//! a preserver of the pair set can be reoriented (no down or left edges on
//! shortest origin paths) and de-cycled without growing, so the minimum
//! preserver size equals the minimum RSA length.

use crate::error::{Error, Result};
use crate::graph::{Instance, TerminalSpec};
use crate::grid::{build_grid, GridSpec};

#[derive(Debug, Clone)]
pub struct RsaInstance {
    pub points: Vec<(u32, u32)>,
    pub budget: Option<u64>,
}

impl RsaInstance {
    pub fn new(points: Vec<(u32, u32)>) -> Result<Self> {
        let mut sorted = points.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != points.len() {
            return Err(Error::InvalidInstance("duplicate points".into()));
        }
        if points.iter().any(|&p| p == (0, 0)) {
            return Err(Error::InvalidInstance("point at the origin".into()));
        }
        if points.is_empty() {
            return Err(Error::InvalidInstance("empty point set".into()));
        }
        Ok(RsaInstance {
            points,
            budget: None,
        })
    }

    pub fn with_budget(mut self, k: u64) -> Self {
        self.budget = Some(k);
        self
    }
}

/// Builds the grid instance with one pair per point, anchored at the
/// origin. The budget carries over unchanged.
pub fn rsa_to_pdp(src: &RsaInstance) -> Result<(GridSpec, Instance, Option<u64>)> {
    let width = src.points.iter().map(|p| p.0).max().unwrap() as usize + 1;
    let height = src.points.iter().map(|p| p.1).max().unwrap() as usize + 1;
    let spec = GridSpec::new(width, height)?;
    let origin = spec.id(0, 0);
    let pairs: Vec<(u32, u32)> = src
        .points
        .iter()
        .map(|&(x, y)| (origin, spec.id(x as usize, y as usize)))
        .collect();
    let mut inst = Instance::new(build_grid(&spec), TerminalSpec::pairs(pairs))?;
    inst.budget = src.budget;
    Ok((spec, inst, src.budget))
}

/// Exact minimum RSA length by directed Steiner dynamic programming on
/// the Hanan grid of the points and the origin: every arc points right or
/// up, so any monotone path is a shortest path.
pub fn rsa_brute(src: &RsaInstance) -> Result<u64> {
    if src.points.len() > 5 {
        return Err(Error::OracleCapExceeded(format!(
            "{} points exceed the RSA oracle cap",
            src.points.len()
        )));
    }
    let mut xs: Vec<u32> = std::iter::once(0)
        .chain(src.points.iter().map(|p| p.0))
        .collect();
    let mut ys: Vec<u32> = std::iter::once(0)
        .chain(src.points.iter().map(|p| p.1))
        .collect();
    xs.sort_unstable();
    xs.dedup();
    ys.sort_unstable();
    ys.dedup();
    let (nx, ny) = (xs.len(), ys.len());
    let node = |ix: usize, iy: usize| iy * nx + ix;
    let nodes = nx * ny;

    let terminals: Vec<usize> = src
        .points
        .iter()
        .map(|&(x, y)| {
            node(
                xs.binary_search(&x).unwrap(),
                ys.binary_search(&y).unwrap(),
            )
        })
        .collect();
    let t = terminals.len();
    let terminal_at = |v: usize| -> u32 {
        terminals
            .iter()
            .enumerate()
            .filter(|&(_, &tv)| tv == v)
            .fold(0u32, |m, (i, _)| m | 1 << i)
    };

    const INF: u64 = u64::MAX / 4;
    // f[set][node]: cheapest right/up arborescence rooted at node
    // covering the terminal subset.
    let mut f = vec![vec![INF; nodes]; 1 << t];
    for row in f[0].iter_mut() {
        *row = 0;
    }
    // Reverse topological order: larger coordinates first.
    let mut topo: Vec<usize> = (0..nodes).collect();
    topo.sort_by_key(|&v| std::cmp::Reverse(xs[v % nx] as u64 + ys[v / nx] as u64));

    for set in 1u32..(1 << t) {
        for &v in &topo {
            let mut best = INF;
            let local = terminal_at(v) & set;
            if local != 0 {
                best = best.min(f[(set & !local) as usize][v]);
            }
            // Split the demand between two sub-arborescences at v.
            let mut sub = (set.wrapping_sub(1)) & set;
            while sub != 0 {
                let other = set & !sub;
                if sub < other {
                    // Unordered splits; each partition once.
                    let a = f[sub as usize][v];
                    let b = f[other as usize][v];
                    if a < INF && b < INF {
                        best = best.min(a + b);
                    }
                }
                sub = (sub - 1) & set;
            }
            let (ix, iy) = (v % nx, v / nx);
            if ix + 1 < nx {
                let w = (xs[ix + 1] - xs[ix]) as u64;
                let next = f[set as usize][node(ix + 1, iy)];
                if next < INF {
                    best = best.min(next + w);
                }
            }
            if iy + 1 < ny {
                let w = (ys[iy + 1] - ys[iy]) as u64;
                let next = f[set as usize][node(ix, iy + 1)];
                if next < INF {
                    best = best.min(next + w);
                }
            }
            f[set as usize][v] = best;
        }
    }
    let answer = f[(1usize << t) - 1][node(0, 0)];
    debug_assert!(answer < INF);
    Ok(answer)
}
