//! Best-effort maximization over products of unit intervals and probability
//! simplexes.
//!
//! Strategy: exhaustive coarse grid, keep the top seeds, then projected
//! coordinate ascent with a scan-plus-golden-section line search per
//! coordinate. Objectives here are generally non-concave, so restarts do the
//! heavy lifting. All reductions are deterministic: ties are broken toward
//! the lexicographically smallest parameter vector, so results do not depend
//! on thread scheduling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// One block of the search space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    /// A scalar in `[0, 1]`.
    Unit,
    /// A pmf with the given number of entries.
    Simplex(usize),
}

impl Block {
    fn len(&self) -> usize {
        match self {
            Block::Unit => 1,
            Block::Simplex(k) => *k,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimOptions {
    /// Denominator of the coarse grid: each free parameter is stepped in
    /// multiples of `1/grid_resolution`.
    pub grid_resolution: usize,
    /// Number of ascent runs (grid seeds plus randomized seeds).
    pub restarts: usize,
    /// Maximum coordinate-ascent sweeps per seed.
    pub ascent_iterations: usize,
    pub seed: u64,
}

impl Default for OptimOptions {
    fn default() -> Self {
        Self {
            grid_resolution: 20,
            restarts: 8,
            ascent_iterations: 50,
            seed: 20090,
        }
    }
}

/// Grid points are capped to keep coarse enumeration bounded; the grid is
/// coarsened (halving the resolution) until it fits.
const GRID_POINT_CAP: usize = 2_000_000;

#[derive(Debug, Clone)]
pub struct Diagnostics {
    pub grid_points: usize,
    /// Resolution actually used after any coarsening.
    pub effective_resolution: usize,
    pub restarts: usize,
    /// Total improving sweeps across all ascent runs.
    pub improving_sweeps: usize,
    pub best_grid_value: f64,
}

#[derive(Debug, Clone)]
pub struct OptimOutcome {
    pub value: f64,
    pub point: Vec<f64>,
    pub diagnostics: Diagnostics,
}

/// Euclidean projection of `v` onto the probability simplex
/// (Duchi et al. sorting scheme).
pub(crate) fn project_simplex(v: &[f64], out: &mut [f64]) {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cssv = 0.0;
    let mut rho = 0usize;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cssv += ui;
        let t = (cssv - 1.0) / (i as f64 + 1.0);
        if ui - t > 0.0 {
            rho = i + 1;
            theta = t;
        }
    }
    if rho == 0 {
        let n = v.len() as f64;
        out.fill(1.0 / n);
        return;
    }
    for (o, &vi) in out.iter_mut().zip(v) {
        *o = (vi - theta).max(0.0);
    }
}

/// Lexicographic compositions of `total` into `parts` nonnegative integers.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    assert!(parts >= 1);
    let mut out = Vec::new();
    let mut cur = vec![0usize; parts];
    fn rec(total: usize, pos: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == cur.len() - 1 {
            cur[pos] = total;
            out.push(cur.clone());
            return;
        }
        for v in 0..=total {
            cur[pos] = v;
            rec(total - v, pos + 1, cur, out);
        }
    }
    rec(total, 0, &mut cur, &mut out);
    out
}

fn grid_for_block(block: Block, resolution: usize) -> Vec<Vec<f64>> {
    let g = resolution.max(1);
    match block {
        Block::Unit => (0..=g).map(|i| vec![i as f64 / g as f64]).collect(),
        Block::Simplex(1) => vec![vec![1.0]],
        Block::Simplex(k) => compositions(g, k)
            .into_iter()
            .map(|c| c.into_iter().map(|v| v as f64 / g as f64).collect())
            .collect(),
    }
}

fn assemble_point(grids: &[Vec<Vec<f64>>], mut index: usize) -> Vec<f64> {
    // Row-major decomposition: the last block varies fastest, so increasing
    // index order is lexicographic order of the assembled vector.
    let mut per_block = vec![0usize; grids.len()];
    for (slot, grid) in per_block.iter_mut().zip(grids).rev() {
        *slot = index % grid.len();
        index /= grid.len();
    }
    let mut point = Vec::new();
    for (grid, &slot) in grids.iter().zip(&per_block) {
        point.extend_from_slice(&grid[slot]);
    }
    point
}

fn block_ranges(blocks: &[Block]) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(blocks.len());
    let mut off = 0;
    for b in blocks {
        out.push((off, off + b.len()));
        off += b.len();
    }
    out
}

/// Set coordinate `coord` of the simplex slice to `t` and rescale the rest
/// to keep the slice on the simplex.
fn simplex_coordinate_move(slice: &mut [f64], coord: usize, t: f64) {
    let rest: f64 = slice
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != coord)
        .map(|(_, v)| *v)
        .sum();
    let target_rest = 1.0 - t;
    if rest > 1e-300 {
        let scale = target_rest / rest;
        for (i, v) in slice.iter_mut().enumerate() {
            if i != coord {
                *v *= scale;
            }
        }
    } else {
        let fill = target_rest / (slice.len() - 1) as f64;
        for (i, v) in slice.iter_mut().enumerate() {
            if i != coord {
                *v = fill;
            }
        }
    }
    slice[coord] = t;
}

/// Scan-then-golden-section maximization of `f` over `[0, 1]`.
fn line_search(f: &mut impl FnMut(f64) -> f64, scan_points: usize) -> (f64, f64) {
    let m = scan_points.max(3);
    let mut best_t = 0.0;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..m {
        let t = i as f64 / (m - 1) as f64;
        let v = f(t);
        if v > best_v {
            best_v = v;
            best_t = t;
        }
    }
    let step = 1.0 / (m - 1) as f64;
    let mut lo = (best_t - step).max(0.0);
    let mut hi = (best_t + step).min(1.0);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut t1 = hi - phi * (hi - lo);
    let mut t2 = lo + phi * (hi - lo);
    let mut f1 = f(t1);
    let mut f2 = f(t2);
    for _ in 0..32 {
        if f1 >= f2 {
            hi = t2;
            t2 = t1;
            f2 = f1;
            t1 = hi - phi * (hi - lo);
            f1 = f(t1);
        } else {
            lo = t1;
            t1 = t2;
            f1 = f2;
            t2 = lo + phi * (hi - lo);
            f2 = f(t2);
        }
    }
    let mid = 0.5 * (lo + hi);
    let fm = f(mid);
    if fm > best_v {
        best_v = fm;
        best_t = mid;
    }
    (best_t, best_v)
}

fn coordinate_ascent<F>(
    blocks: &[Block],
    ranges: &[(usize, usize)],
    objective: &F,
    start: &[f64],
    max_sweeps: usize,
) -> (f64, Vec<f64>, usize)
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let mut point = start.to_vec();
    let mut value = objective(&point);
    let mut sweeps_used = 0;
    let mut scratch = point.clone();
    for _ in 0..max_sweeps {
        let before = value;
        for (bi, block) in blocks.iter().enumerate() {
            let (lo, hi) = ranges[bi];
            match block {
                Block::Unit => {
                    let mut eval = |t: f64| {
                        scratch.copy_from_slice(&point);
                        scratch[lo] = t;
                        objective(&scratch)
                    };
                    let (t, v) = line_search(&mut eval, 13);
                    if v > value {
                        value = v;
                        point[lo] = t;
                    }
                }
                Block::Simplex(k) => {
                    if *k < 2 {
                        continue;
                    }
                    for coord in 0..*k {
                        let mut eval = |t: f64| {
                            scratch.copy_from_slice(&point);
                            simplex_coordinate_move(&mut scratch[lo..hi], coord, t);
                            objective(&scratch)
                        };
                        let (t, v) = line_search(&mut eval, 13);
                        if v > value {
                            value = v;
                            simplex_coordinate_move(&mut point[lo..hi], coord, t);
                        }
                    }
                    // Undo accumulated rounding drift.
                    let sum: f64 = point[lo..hi].iter().sum();
                    if (sum - 1.0).abs() > 1e-12 && sum > 0.0 {
                        for v in point[lo..hi].iter_mut() {
                            *v /= sum;
                        }
                        value = objective(&point);
                    }
                }
            }
        }
        sweeps_used += 1;
        if value - before <= 1e-13 {
            break;
        }
    }
    (value, point, sweeps_used)
}

/// Prefer higher value; on (bitwise) ties prefer the lexicographically
/// smaller point. Total order, hence associative as a max.
fn better(a: &(f64, Vec<f64>), b: &(f64, Vec<f64>)) -> bool {
    if a.0 != b.0 {
        return a.0 > b.0;
    }
    for (x, y) in a.1.iter().zip(&b.1) {
        if x != y {
            return x < y;
        }
    }
    false
}

pub fn maximize<F>(
    blocks: &[Block],
    objective: F,
    opts: &OptimOptions,
    extra_seeds: &[Vec<f64>],
) -> OptimOutcome
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let ranges = block_ranges(blocks);
    let dim: usize = blocks.iter().map(|b| b.len()).sum();

    let mut resolution = opts.grid_resolution.max(2);
    let mut grids: Vec<Vec<Vec<f64>>>;
    loop {
        grids = blocks
            .iter()
            .map(|&b| grid_for_block(b, resolution))
            .collect();
        let total: usize = grids.iter().map(|g| g.len()).product();
        if total <= GRID_POINT_CAP || resolution <= 2 {
            break;
        }
        resolution /= 2;
    }
    let total: usize = grids.iter().map(|g| g.len()).product();

    // Evaluate the grid, keeping the k best points (k = restarts), merged
    // with a deterministic comparator.
    let k = opts.restarts.max(1);
    let top: Vec<(f64, usize)> = (0..total)
        .into_par_iter()
        .fold(Vec::new, |mut acc: Vec<(f64, usize)>, idx| {
            let point = assemble_point(&grids, idx);
            let v = objective(&point);
            acc.push((v, idx));
            acc.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
            acc.truncate(k);
            acc
        })
        .reduce(Vec::new, |mut a, b| {
            a.extend(b);
            a.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap().then(x.1.cmp(&y.1)));
            a.truncate(k);
            a
        });

    let best_grid_value = top.first().map(|t| t.0).unwrap_or(f64::NEG_INFINITY);

    // Seed list: top grid points, then randomized interior points, then any
    // caller-supplied warm starts.
    let mut seeds: Vec<Vec<f64>> = top
        .iter()
        .map(|&(_, idx)| assemble_point(&grids, idx))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    while seeds.len() < opts.restarts {
        let mut p = Vec::with_capacity(dim);
        for block in blocks {
            match block {
                Block::Unit => p.push(rng.gen::<f64>()),
                Block::Simplex(k) => {
                    let mut v: Vec<f64> = (0..*k)
                        .map(|_| -(rng.gen::<f64>().max(1e-12)).ln())
                        .collect();
                    let s: f64 = v.iter().sum();
                    v.iter_mut().for_each(|x| *x /= s);
                    p.extend(v);
                }
            }
        }
        seeds.push(p);
    }
    for s in extra_seeds {
        if s.len() == dim {
            seeds.push(s.clone());
        }
    }

    let runs: Vec<(f64, Vec<f64>, usize)> = seeds
        .par_iter()
        .map(|s| coordinate_ascent(blocks, &ranges, &objective, s, opts.ascent_iterations))
        .collect();

    let mut best: (f64, Vec<f64>) = (f64::NEG_INFINITY, vec![0.0; dim]);
    let mut improving_sweeps = 0;
    for (v, p, sweeps) in runs {
        improving_sweeps += sweeps;
        let cand = (v, p);
        if better(&cand, &best) {
            best = cand;
        }
    }

    OptimOutcome {
        value: best.0,
        point: best.1,
        diagnostics: Diagnostics {
            grid_points: total,
            effective_resolution: resolution,
            restarts: seeds.len(),
            improving_sweeps,
            best_grid_value,
        },
    }
}
