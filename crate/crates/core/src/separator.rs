//! Balanced clique-based separators for disk intersection graphs.
//!
//! Construction, for `n` disks:
//!
//! 1. Find `H_0`, a 2-approximation of the smallest axis-parallel square
//!    containing `k* = max(1, ceil(n / 145))` disk centers. Every center is
//!    tried as the square's center.
//! 2. Work in normalized units where `H_0 = [-1, 1]^2`, and let `H(t)` be
//!    `H_0` scaled by `t`. Disks of radius at least 1/8 that meet `H(3)` are
//!    stabbed by points of a 1/8-spaced grid. The remaining disks meeting
//!    the annulus between `H(1)` and `H(3)` are split into size classes and
//!    grouped by the nearest point of a per-class grid.
//! 3. Each group crosses `dH(t)` for an interval of scales; a sweep picks
//!    the scale `t*` of minimum total clique weight.
//!
//! The separator is the large-disk cliques plus every group whose interval
//! contains `t*`. Disks inside `H(t*)` form part A, the rest part B.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{disk_contains, Point, Square, TransmissionPoint};
use crate::graph::NodeId;

/// Balance denominator: `k* = n / (12^2 + 1)`.
const BALANCE_DENOM: usize = 145;

/// Normalized radius at and above which a disk is "large" (diameter 1/4).
const LARGE_RADIUS: f64 = 0.125;

/// Half-extent of the grid stabbing large disks: `H(3)` inflated by 1/8.
const LARGE_GRID_HALF: i64 = 25;
const LARGE_GRID_STEP: f64 = 0.125;

#[derive(Debug, Clone, PartialEq)]
pub struct StabbedClique {
    pub members: Vec<NodeId>,
    pub stab_point: Point,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }

    fn hull(self, other: Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }
}

/// Scale range over which a candidate clique meets the boundary of `H(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingInterval {
    pub interval: Interval,
    pub clique: usize,
    pub weight: f64,
}

/// Output of the candidate-clique step.
#[derive(Debug, Clone, Default)]
pub struct CandidateCliques {
    /// Cliques of large disks meeting `H(3)`; always part of the separator.
    pub large: Vec<StabbedClique>,
    /// Size-class and singleton cliques of the remaining disks that meet the
    /// annulus between `H(1)` and `H(3)`.
    pub crossing: Vec<StabbedClique>,
}

#[derive(Debug, Clone)]
pub struct CliqueSeparator {
    pub cliques: Vec<StabbedClique>,
    pub part_a: Vec<NodeId>,
    pub part_b: Vec<NodeId>,
    pub h0: Square,
    pub t_star: f64,
    /// Total weight of `cliques` under the weight function used.
    pub weight: f64,
    /// `H_0` collapsed to a point and the single-clique fallback was used.
    pub degenerate: bool,
}

impl CliqueSeparator {
    pub fn separator_size(&self) -> usize {
        self.cliques.iter().map(|c| c.members.len()).sum()
    }
}

/// `k* = max(1, ceil(n / 145))`.
pub fn k_star(n: usize) -> usize {
    n.div_ceil(BALANCE_DENOM).max(1)
}

/// Largest part size allowed for a balanced split of `n` disks.
pub fn balance_bound(n: usize) -> usize {
    (144 * n).div_ceil(BALANCE_DENOM)
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        Err(Error::BadK { k, n })
    } else {
        Ok(())
    }
}

fn kth_smallest(values: &mut [f64], k: usize) -> f64 {
    let (_, v, _) = values.select_nth_unstable_by(k - 1, f64::total_cmp);
    *v
}

/// The smallest square centered at `q` that contains `k` of the centers:
/// its half-edge is the k-th smallest Chebyshev distance from `q`.
pub fn centered_k_enclosing_square(centers: &[Point], k: usize, q: Point) -> Result<Square> {
    check_k(centers.len(), k)?;
    let mut d: Vec<f64> = centers.iter().map(|c| c.linf_dist(q)).collect();
    Ok(Square { center: q, half_edge: kth_smallest(&mut d, k) })
}

/// Minimum of [`centered_k_enclosing_square`] over every center taken as
/// `q`; the first center in input order wins ties. Since the optimal square
/// contains some center, the result is a 2-approximation.
///
/// A candidate can only win if at least `k` centers are strictly closer
/// than the current best half-edge, so each candidate only inspects a
/// bucket grid window around itself. The answer is the same as trying
/// every candidate in full.
pub fn approx_smallest_k_enclosing_square(centers: &[Point], k: usize) -> Result<Square> {
    check_k(centers.len(), k)?;
    let mut best = centered_k_enclosing_square(centers, k, centers[0])?;
    if best.half_edge == 0.0 {
        return Ok(best);
    }
    let mut grid = BucketGrid::new(centers, best.half_edge);
    let mut near = Vec::new();
    for &q in &centers[1..] {
        if grid.should_rebuild(best.half_edge) {
            grid = BucketGrid::new(centers, best.half_edge);
        }
        near.clear();
        grid.collect_within(centers, q, best.half_edge, &mut near);
        if near.len() >= k {
            let d = kth_smallest(&mut near, k);
            if d < best.half_edge {
                best = Square { center: q, half_edge: d };
                if d == 0.0 {
                    break;
                }
            }
        }
    }
    Ok(best)
}

/// Uniform bucket grid over the centers, used to count centers near a query.
struct BucketGrid {
    min: Point,
    cell: f64,
    cols: usize,
    rows: usize,
    /// smallest cell size this grid may be shrunk to, bounded by memory
    floor: f64,
    offsets: Vec<usize>,
    items: Vec<u32>,
}

impl BucketGrid {
    fn new(centers: &[Point], target_cell: f64) -> Self {
        let min_x = centers.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        let min_y = centers.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
        let max_x = centers.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
        let max_y = centers.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
        let extent = (max_x - min_x).max(max_y - min_y);
        let side_cap = (4.0 * centers.len() as f64).sqrt().ceil().max(1.0);
        let floor = extent / side_cap;
        let cell = target_cell.max(floor).max(f64::MIN_POSITIVE);
        let cols = (((max_x - min_x) / cell) as usize + 1).max(1);
        let rows = (((max_y - min_y) / cell) as usize + 1).max(1);
        let min = Point { x: min_x, y: min_y };
        let mut grid = BucketGrid { min, cell, cols, rows, floor, offsets: Vec::new(), items: Vec::new() };
        let cells: Vec<usize> = centers.iter().map(|&p| grid.cell_index(p)).collect();
        let mut offsets = vec![0usize; cols * rows + 1];
        for &c in &cells {
            offsets[c + 1] += 1;
        }
        for i in 0..cols * rows {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut items = vec![0u32; centers.len()];
        for (i, &c) in cells.iter().enumerate() {
            items[fill[c]] = i as u32;
            fill[c] += 1;
        }
        grid.offsets = offsets;
        grid.items = items;
        grid
    }

    fn coord(&self, v: f64, lo: f64, count: usize) -> usize {
        let c = ((v - lo) / self.cell).floor();
        if c <= 0.0 {
            0
        } else {
            (c as usize).min(count - 1)
        }
    }

    fn cell_index(&self, p: Point) -> usize {
        self.coord(p.y, self.min.y, self.rows) * self.cols + self.coord(p.x, self.min.x, self.cols)
    }

    fn should_rebuild(&self, radius: f64) -> bool {
        self.cell > 2.0 * radius.max(self.floor)
    }

    /// Pushes the Chebyshev distance of every center strictly closer than
    /// `radius` to `q`.
    fn collect_within(&self, centers: &[Point], q: Point, radius: f64, out: &mut Vec<f64>) {
        let x0 = self.coord(q.x - radius, self.min.x, self.cols);
        let x1 = self.coord(q.x + radius, self.min.x, self.cols);
        let y0 = self.coord(q.y - radius, self.min.y, self.rows);
        let y1 = self.coord(q.y + radius, self.min.y, self.rows);
        for cy in y0..=y1 {
            for cx in x0..=x1 {
                let c = cy * self.cols + cx;
                for &i in &self.items[self.offsets[c]..self.offsets[c + 1]] {
                    let d = centers[i as usize].linf_dist(q);
                    if d < radius {
                        out.push(d);
                    }
                }
            }
        }
    }
}

/// Maps original coordinates to units where `H_0 = [-1, 1]^2`.
#[derive(Debug, Clone, Copy)]
struct Normalizer {
    center: Point,
    scale: f64,
}

impl Normalizer {
    fn new(h0: &Square) -> Self {
        Normalizer { center: h0.center, scale: h0.half_edge }
    }

    fn point(&self, p: Point) -> (f64, f64) {
        ((p.x - self.center.x) / self.scale, (p.y - self.center.y) / self.scale)
    }

    fn radius(&self, r: f64) -> f64 {
        r / self.scale
    }

    fn denormalize(&self, u: (f64, f64)) -> Point {
        Point { x: self.center.x + self.scale * u.0, y: self.center.y + self.scale * u.1 }
    }
}

/// Distance from `u` to the closed square `[-t, t]^2` (zero inside).
fn dist_to_square(u: (f64, f64), t: f64) -> f64 {
    let dx = (u.0.abs() - t).max(0.0);
    let dy = (u.1.abs() - t).max(0.0);
    (dx * dx + dy * dy).sqrt()
}

/// Scales `t >= 0` at which the boundary of `[-t, t]^2` meets the closed
/// disk of radius `rho` around `u`, before clipping to `[1, 3]`.
fn raw_crossing_interval(u: (f64, f64), rho: f64) -> Interval {
    let a = u.0.abs().max(u.1.abs());
    let b = u.0.abs().min(u.1.abs());
    let hi = a + rho;
    let lo = if a * a + b * b <= rho * rho {
        0.0
    } else if a - rho >= b {
        // nearest boundary point is on the side facing the far coordinate
        a - rho
    } else {
        // nearest boundary point is the corner (t, t)
        let disc = (2.0 * rho * rho - (a - b) * (a - b)).max(0.0);
        ((a + b) - disc.sqrt()) / 2.0
    };
    Interval { lo: lo.max(0.0), hi }
}

fn clip(iv: Interval) -> Option<Interval> {
    let lo = iv.lo.max(1.0);
    let hi = iv.hi.min(3.0);
    (lo <= hi).then_some(Interval { lo, hi })
}

/// Hull of the member crossing intervals, clipped to `[1, 3]`; `None` when
/// no member meets `dH(t)` for any `t` in `[1, 3]`.
pub fn clique_interval<'a>(
    members: impl IntoIterator<Item = &'a TransmissionPoint>,
    h0: &Square,
) -> Option<Interval> {
    let norm = Normalizer::new(h0);
    members
        .into_iter()
        .filter_map(|p| clip(raw_crossing_interval(norm.point(p.pos), norm.radius(p.radius))))
        .reduce(Interval::hull)
}

/// Size class `s` with normalized radius in `[2^(-s-1), 2^(-s))`.
fn size_class(rho: f64) -> i32 {
    let mut s = (-rho.log2()).ceil() as i32 - 1;
    while rho < (-(s + 1) as f64).exp2() {
        s += 1;
    }
    while rho >= (-s as f64).exp2() {
        s -= 1;
    }
    s
}

/// Finest size class that still gets grid cliques; smaller disks become
/// singletons.
fn max_size_class(n: usize) -> i32 {
    (0.5 * (n.max(1) as f64).log2()).ceil() as i32 + 2
}

/// Groups the disks that may cross some `dH(t)`, `t` in `[1, 3]`, into
/// stabbed cliques. Requires `h0.half_edge > 0`.
pub fn build_candidate_cliques(disks: &[TransmissionPoint], h0: &Square) -> CandidateCliques {
    assert!(h0.half_edge > 0.0, "candidate cliques need a non-degenerate H_0");
    let norm = Normalizer::new(h0);
    let s_max = max_size_class(disks.len());

    let mut large: Vec<&TransmissionPoint> = Vec::new();
    let mut classed: HashMap<(i32, i64, i64), usize> = HashMap::new();
    let mut crossing: Vec<StabbedClique> = Vec::new();

    for p in disks {
        let u = norm.point(p.pos);
        let rho = norm.radius(p.radius);
        if dist_to_square(u, 3.0) > rho {
            continue;
        }
        if rho >= LARGE_RADIUS {
            large.push(p);
            continue;
        }
        // entirely inside the open square H(1)
        if u.0.abs().max(u.1.abs()) + rho < 1.0 {
            continue;
        }
        let s = size_class(rho);
        if s > s_max {
            crossing.push(StabbedClique { members: vec![p.id], stab_point: p.pos });
            continue;
        }
        // The nearest point of a grid with this spacing is within 2^(-s-1)
        // of the center, hence inside the disk.
        let step = (-(s + 1) as f64).exp2() * std::f64::consts::SQRT_2;
        let ix = (u.0 / step).round() as i64;
        let iy = (u.1 / step).round() as i64;
        let stab = norm.denormalize((ix as f64 * step, iy as f64 * step));
        if !disk_contains(&p.disk(), stab) {
            crossing.push(StabbedClique { members: vec![p.id], stab_point: p.pos });
            continue;
        }
        match classed.get(&(s, ix, iy)) {
            Some(&c) => crossing[c].members.push(p.id),
            None => {
                classed.insert((s, ix, iy), crossing.len());
                crossing.push(StabbedClique { members: vec![p.id], stab_point: stab });
            }
        }
    }

    CandidateCliques { large: stab_large_disks(&large, &norm), crossing }
}

/// Greedy stabbing of the large disks by points of the 1/8 grid over `H(3)`
/// inflated by 1/8. Smaller disks pick first so the points they choose are
/// likely reused by the larger ones.
fn stab_large_disks(large: &[&TransmissionPoint], norm: &Normalizer) -> Vec<StabbedClique> {
    let side = (2 * LARGE_GRID_HALF + 1) as usize;
    let slot = |ix: i64, iy: i64| ((iy + LARGE_GRID_HALF) as usize) * side + (ix + LARGE_GRID_HALF) as usize;
    let grid_point = |ix: i64, iy: i64| {
        norm.denormalize((ix as f64 * LARGE_GRID_STEP, iy as f64 * LARGE_GRID_STEP))
    };

    let mut order: Vec<&TransmissionPoint> = large.to_vec();
    order.sort_by(|a, b| a.radius.total_cmp(&b.radius).then(a.id.cmp(&b.id)));

    let mut owner: Vec<Option<usize>> = vec![None; side * side];
    let mut chosen: Vec<(i64, i64)> = Vec::new();
    let mut cliques: Vec<StabbedClique> = Vec::new();

    for p in order {
        let disk = p.disk();
        let u = norm.point(p.pos);
        let rho = norm.radius(p.radius);
        let lo_x = ((u.0 - rho) / LARGE_GRID_STEP).ceil().max(-LARGE_GRID_HALF as f64) as i64;
        let hi_x = ((u.0 + rho) / LARGE_GRID_STEP).floor().min(LARGE_GRID_HALF as f64) as i64;
        let lo_y = ((u.1 - rho) / LARGE_GRID_STEP).ceil().max(-LARGE_GRID_HALF as f64) as i64;
        let hi_y = ((u.1 + rho) / LARGE_GRID_STEP).floor().min(LARGE_GRID_HALF as f64) as i64;
        let window = ((hi_x - lo_x + 1).max(0) * (hi_y - lo_y + 1).max(0)) as usize;

        let existing = if chosen.len() <= window {
            chosen
                .iter()
                .map(|&(ix, iy)| owner[slot(ix, iy)].expect("chosen point has a clique"))
                .find(|&c| disk_contains(&disk, cliques[c].stab_point))
        } else {
            (lo_y..=hi_y)
                .flat_map(|iy| (lo_x..=hi_x).map(move |ix| (ix, iy)))
                .filter_map(|(ix, iy)| owner[slot(ix, iy)])
                .find(|&c| disk_contains(&disk, cliques[c].stab_point))
        };
        if let Some(c) = existing {
            cliques[c].members.push(p.id);
            continue;
        }

        // A ball of radius 1/8 inside the disk, centered within 1/8 of H(3),
        // contains the grid point nearest to its center.
        let y = (u.0.clamp(-3.0, 3.0), u.1.clamp(-3.0, 3.0));
        let (vx, vy) = (u.0 - y.0, u.1 - y.1);
        let len = (vx * vx + vy * vy).sqrt();
        let shift = (len - (rho - LARGE_RADIUS)).max(0.0);
        let z = if len > 0.0 { (y.0 + vx * shift / len, y.1 + vy * shift / len) } else { y };
        let near = (
            ((z.0 / LARGE_GRID_STEP).round() as i64).clamp(-LARGE_GRID_HALF, LARGE_GRID_HALF),
            ((z.1 / LARGE_GRID_STEP).round() as i64).clamp(-LARGE_GRID_HALF, LARGE_GRID_HALF),
        );
        let pick = std::iter::once(near)
            .chain((lo_y..=hi_y).flat_map(|iy| (lo_x..=hi_x).map(move |ix| (ix, iy))))
            .find(|&(ix, iy)| disk_contains(&disk, grid_point(ix, iy)));
        match pick {
            Some((ix, iy)) => {
                owner[slot(ix, iy)] = Some(cliques.len());
                chosen.push((ix, iy));
                cliques.push(StabbedClique { members: vec![p.id], stab_point: grid_point(ix, iy) });
            }
            // only reachable through rounding; a singleton is always valid
            None => cliques.push(StabbedClique { members: vec![p.id], stab_point: p.pos }),
        }
    }
    cliques
}

/// Picks `t*` in `[1, 3]` minimizing the total weight of the intervals
/// containing it. Returns `(t*, weight)`.
///
/// The weight is piecewise constant between consecutive endpoints and an
/// endpoint never beats both of its open neighbours, so only the midpoints
/// of the open gaps are evaluated; the leftmost minimal gap wins. With no
/// intervals at all the answer is `t* = 1`.
pub fn select_t_star(intervals: &[CrossingInterval]) -> (f64, f64) {
    if intervals.is_empty() {
        return (1.0, 0.0);
    }
    // (position, kind, weight); kind 0 = interval starts, 1 = interval ends
    let mut events: Vec<(f64, u8, f64)> = Vec::with_capacity(2 * intervals.len() + 2);
    for iv in intervals {
        events.push((iv.interval.lo, 0, iv.weight));
        events.push((iv.interval.hi, 1, iv.weight));
    }
    events.push((1.0, 0, 0.0));
    events.push((3.0, 0, 0.0));
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut active = 0.0;
    let mut best: Option<(f64, f64)> = None;
    let mut i = 0;
    while i < events.len() {
        let here = events[i].0;
        while i < events.len() && events[i].0 == here {
            let (_, kind, w) = events[i];
            if kind == 0 {
                active += w;
            } else {
                active -= w;
            }
            i += 1;
        }
        if here >= 3.0 {
            break;
        }
        if here < 1.0 {
            continue;
        }
        let next = events.get(i).map_or(3.0, |e| e.0).min(3.0);
        let mid = 0.5 * (here + next);
        if best.is_none_or(|(_, w)| active < w) {
            best = Some((mid, active));
        }
    }
    let (t, w) = best.expect("the gap (1, 3) always exists");
    // running sums of non-integer weights drift; report the exact value
    let exact: f64 = intervals.iter().filter(|iv| iv.interval.contains(t)).map(|iv| iv.weight).sum();
    debug_assert!((exact - w).abs() <= 1e-9 * (1.0 + exact.abs()));
    (t, exact)
}

/// Builds a balanced clique-based separator for the intersection graph of
/// the transmission disks. `weight_fn` maps a clique size to its weight.
pub fn build_separator(disks: &[TransmissionPoint], weight_fn: impl Fn(usize) -> f64) -> Result<CliqueSeparator> {
    let n = disks.len();
    if n < 2 {
        return Err(Error::TooFewDisks(n));
    }
    let centers: Vec<Point> = disks.iter().map(|p| p.pos).collect();
    let h0 = approx_smallest_k_enclosing_square(&centers, k_star(n))?;

    if h0.half_edge == 0.0 {
        // At least k* centers coincide: cut away every disk through that point.
        let q = h0.center;
        let (members, part_a): (Vec<&TransmissionPoint>, Vec<&TransmissionPoint>) =
            disks.iter().partition(|p| disk_contains(&p.disk(), q));
        let members: Vec<NodeId> = members.iter().map(|p| p.id).collect();
        let weight = weight_fn(members.len());
        return Ok(CliqueSeparator {
            cliques: vec![StabbedClique { members, stab_point: q }],
            part_a: part_a.iter().map(|p| p.id).collect(),
            part_b: Vec::new(),
            h0,
            t_star: 1.0,
            weight,
            degenerate: true,
        });
    }

    let by_id: HashMap<NodeId, &TransmissionPoint> = disks.iter().map(|p| (p.id, p)).collect();
    let candidates = build_candidate_cliques(disks, &h0);
    let intervals: Vec<CrossingInterval> = candidates
        .crossing
        .iter()
        .enumerate()
        .filter_map(|(i, c)| {
            let iv = clique_interval(c.members.iter().map(|id| by_id[id]), &h0)?;
            Some(CrossingInterval { interval: iv, clique: i, weight: weight_fn(c.members.len()) })
        })
        .collect();
    let (t_star, _) = select_t_star(&intervals);

    let mut cliques = candidates.large;
    let mut crossing: Vec<Option<StabbedClique>> = candidates.crossing.into_iter().map(Some).collect();
    for iv in &intervals {
        if iv.interval.contains(t_star) {
            cliques.push(crossing[iv.clique].take().expect("each clique has one interval"));
        }
    }

    let mut in_separator: HashMap<NodeId, ()> = HashMap::with_capacity(n);
    for c in &cliques {
        for &m in &c.members {
            in_separator.insert(m, ());
        }
    }
    let norm = Normalizer::new(&h0);
    let mut part_a = Vec::new();
    let mut part_b = Vec::new();
    for p in disks {
        if in_separator.contains_key(&p.id) {
            continue;
        }
        let u = norm.point(p.pos);
        if u.0.abs().max(u.1.abs()) < t_star {
            part_a.push(p.id);
        } else {
            part_b.push(p.id);
        }
    }
    let weight = cliques.iter().map(|c| weight_fn(c.members.len())).sum();
    Ok(CliqueSeparator { cliques, part_a, part_b, h0, t_star, weight, degenerate: false })
}

/// Separator with every clique weighing 1, so its weight is its clique count.
pub fn build_unit_separator(disks: &[TransmissionPoint]) -> Result<CliqueSeparator> {
    build_separator(disks, |_| 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(coords: &[(f64, f64)]) -> Vec<Point> {
        coords.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    fn tp(id: usize, x: f64, y: f64, r: f64) -> TransmissionPoint {
        TransmissionPoint::at(id, x, y, r).unwrap()
    }

    fn unit_h0() -> Square {
        Square { center: Point::new(0.0, 0.0), half_edge: 1.0 }
    }

    #[test]
    fn centered_square_examples() {
        let c = pts(&[(0.0, 0.0), (1.0, 0.0), (4.0, 0.0)]);
        let sq = centered_k_enclosing_square(&c, 2, Point::new(0.0, 0.0)).unwrap();
        assert_eq!(sq.half_edge, 1.0);
        let sq = centered_k_enclosing_square(&c, 1, c[2]).unwrap();
        assert_eq!(sq.half_edge, 0.0);
        let c = pts(&[(0.0, 0.0), (2.0, 2.0)]);
        let sq = centered_k_enclosing_square(&c, 2, Point::new(1.0, 1.0)).unwrap();
        assert_eq!(sq.half_edge, 1.0);
        assert_eq!(centered_k_enclosing_square(&c, 3, c[0]), Err(Error::BadK { k: 3, n: 2 }));
        assert_eq!(centered_k_enclosing_square(&c, 0, c[0]), Err(Error::BadK { k: 0, n: 2 }));
    }

    #[test]
    fn approx_square_examples() {
        let c = pts(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (10.0, 10.0)]);
        let sq = approx_smallest_k_enclosing_square(&c, 2).unwrap();
        assert!(sq.edge() <= 2.0);
        assert_eq!(approx_smallest_k_enclosing_square(&c, 1).unwrap().edge(), 0.0);
        let same = pts(&[(3.0, 3.0); 5]);
        assert_eq!(approx_smallest_k_enclosing_square(&same, 4).unwrap().edge(), 0.0);
        assert!(approx_smallest_k_enclosing_square(&same, 6).is_err());
    }

    #[test]
    fn pruned_search_matches_full_scan() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for trial in 0..200 {
            let n = rng.gen_range(1..200);
            let spread = if trial % 2 == 0 { 100.0 } else { 1.0 };
            let c: Vec<Point> = (0..n)
                .map(|_| Point::new(rng.gen_range(0.0..spread), (rng.gen_range(0.0..spread) * 4.0f64).round()))
                .collect();
            let k = rng.gen_range(1..=n);
            let full = c
                .iter()
                .map(|&q| centered_k_enclosing_square(&c, k, q).unwrap())
                .reduce(|a, b| if b.half_edge < a.half_edge { b } else { a })
                .unwrap();
            assert_eq!(approx_smallest_k_enclosing_square(&c, k).unwrap(), full, "trial {trial}");
        }
    }

    #[test]
    fn interval_examples() {
        let d = tp(0, 2.0, 0.0, 0.5);
        let iv = clique_interval([&d], &unit_h0()).unwrap();
        assert_eq!((iv.lo, iv.hi), (1.5, 2.5));
        // small disk deep inside H(1)
        assert!(clique_interval([&tp(0, 0.2, 0.1, 0.1)], &unit_h0()).is_none());
        // centered disk of radius 0.5: dH(t) for t >= 1 never reaches it
        assert!(clique_interval([&tp(0, 0.0, 0.0, 0.5)], &unit_h0()).is_none());
        // disk outside H(3)
        assert!(clique_interval([&tp(0, 5.0, 0.0, 0.5)], &unit_h0()).is_none());
    }

    #[test]
    fn interval_corner_case() {
        // center (2, 2), radius 0.5: dH(t) first touches at the corner (t, t)
        let iv = clique_interval([&tp(0, 2.0, 2.0, 0.5)], &unit_h0()).unwrap();
        let expected_lo = 2.0 - 0.5 / std::f64::consts::SQRT_2;
        assert!((iv.lo - expected_lo).abs() < 1e-12);
        assert_eq!(iv.hi, 2.5);
    }

    #[test]
    fn interval_hull_and_clip() {
        let a = tp(0, 1.2, 0.0, 0.5);
        let b = tp(1, 2.9, 0.0, 0.5);
        let iv = clique_interval([&a, &b], &unit_h0()).unwrap();
        assert_eq!((iv.lo, iv.hi), (1.0, 3.0));
    }

    #[test]
    fn crossing_interval_matches_sampling() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let u = (rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
            let rho = rng.gen_range(0.01..1.5);
            let iv = raw_crossing_interval(u, rho);
            for step in 0..=400 {
                let t = f64::from(step) * 0.01;
                let a = u.0.abs().max(u.1.abs());
                // distance from u to the boundary of [-t, t]^2
                let d = if a <= t { t - a } else { dist_to_square(u, t) };
                let crosses = d <= rho;
                if (t - iv.lo).abs() > 1e-9 && (t - iv.hi).abs() > 1e-9 {
                    assert_eq!(crosses, iv.lo <= t && t <= iv.hi, "u={u:?} rho={rho} t={t} iv={iv:?}");
                }
            }
        }
    }

    fn ci(lo: f64, hi: f64, w: f64) -> CrossingInterval {
        CrossingInterval { interval: Interval { lo, hi }, clique: 0, weight: w }
    }

    fn weight_at(ivs: &[CrossingInterval], t: f64) -> f64 {
        ivs.iter().filter(|iv| iv.interval.contains(t)).map(|iv| iv.weight).sum()
    }

    #[test]
    fn t_star_examples() {
        let ivs = [ci(1.0, 2.0, 1.0), ci(1.5, 2.5, 1.0), ci(2.2, 3.0, 1.0)];
        let (t, w) = select_t_star(&ivs);
        assert_eq!(w, 1.0);
        assert_eq!(weight_at(&ivs, t), 1.0);
        assert!((1.0..1.5).contains(&t));
        // the band (2, 2.2) is equally good
        assert_eq!(weight_at(&ivs, 2.1), 1.0);

        assert_eq!(select_t_star(&[]), (1.0, 0.0));
        let (t, w) = select_t_star(&[ci(1.0, 3.0, 1.0)]);
        assert_eq!(w, 1.0);
        assert!((1.0..=3.0).contains(&t));
    }

    #[test]
    fn t_star_is_a_global_minimum() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let m = rng.gen_range(1..25);
            let ivs: Vec<CrossingInterval> = (0..m)
                .map(|_| {
                    let a = (rng.gen_range(1.0..3.0) * 8.0f64).round() / 8.0;
                    let b = (rng.gen_range(1.0..3.0) * 8.0f64).round() / 8.0;
                    ci(a.min(b), a.max(b), f64::from(rng.gen_range(1..4)))
                })
                .collect();
            let (t, w) = select_t_star(&ivs);
            assert_eq!(w, weight_at(&ivs, t));
            // every endpoint and midpoint is at least as heavy
            let mut probes: Vec<f64> = ivs.iter().flat_map(|iv| [iv.interval.lo, iv.interval.hi]).collect();
            probes.extend([1.0, 3.0]);
            probes.sort_by(f64::total_cmp);
            let mids: Vec<f64> = probes.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
            for &p in probes.iter().chain(&mids) {
                assert!(weight_at(&ivs, p) >= w);
            }
        }
    }

    #[test]
    fn size_classes() {
        assert_eq!(size_class(1.0 / 16.0), 3);
        assert_eq!(size_class(0.1), 3);
        assert_eq!(size_class(1.0 / 32.0), 4);
        assert_eq!(size_class(0.99 / 32.0), 5);
    }

    #[test]
    fn candidate_examples() {
        // everything large around the origin
        let disks: Vec<_> = (0..30).map(|i| tp(i, 0.01 * i as f64, 0.0, 3.0)).collect();
        let c = build_candidate_cliques(&disks, &unit_h0());
        assert!(c.crossing.is_empty());
        assert!(!c.large.is_empty() && c.large.len() <= 4);
        let covered: usize = c.large.iter().map(|q| q.members.len()).sum();
        assert_eq!(covered, 30);

        // one tiny disk on dH(2): far below the finest class for n = 1
        let tiny = [tp(0, 2.0, 0.0, 1e-6)];
        let c = build_candidate_cliques(&tiny, &unit_h0());
        assert_eq!(c.crossing, vec![StabbedClique { members: vec![0], stab_point: Point::new(2.0, 0.0) }]);

        // two equal disks of class 3 sharing a grid point
        let step = (1.0f64 / 16.0) * std::f64::consts::SQRT_2;
        let g = (2.0 / step).round() * step;
        let pair = [tp(0, g + 0.01, 0.0, 0.07), tp(1, g - 0.01, 0.005, 0.07)];
        let c = build_candidate_cliques(&pair, &unit_h0());
        assert_eq!(c.crossing.len(), 1);
        assert_eq!(c.crossing[0].members, vec![0, 1]);
        assert_eq!(c.crossing[0].stab_point, Point::new(g, 0.0));
    }

    fn check_separator(disks: &[TransmissionPoint], sep: &CliqueSeparator) {
        let by_id: HashMap<_, _> = disks.iter().map(|p| (p.id, *p)).collect();
        for a in &sep.part_a {
            for b in &sep.part_b {
                assert!(!by_id[a].disk().intersects(&by_id[b].disk()), "{a} and {b} intersect");
            }
        }
        for c in &sep.cliques {
            for m in &c.members {
                assert!(by_id[m].disk().contains(c.stab_point));
            }
        }
        let mut all: Vec<_> = sep.cliques.iter().flat_map(|c| c.members.iter().copied()).collect();
        all.extend(&sep.part_a);
        all.extend(&sep.part_b);
        all.sort_unstable();
        assert_eq!(all, (0..disks.len()).collect::<Vec<_>>());
    }

    #[test]
    fn two_far_clusters() {
        let mut disks = Vec::new();
        for c in 0..2 {
            for i in 0..40 {
                let x = 1000.0 * f64::from(c) + f64::from(i % 8) * 3.0;
                let y = f64::from(i / 8) * 3.0;
                disks.push(tp(disks.len(), x, y, 1.0));
            }
        }
        let sep = build_unit_separator(&disks).unwrap();
        check_separator(&disks, &sep);
        assert!(sep.part_a.len() <= balance_bound(80));
        assert!(sep.part_b.len() <= balance_bound(80));
    }

    #[test]
    fn common_point_disks() {
        // centers within distance 1 of the origin, radius 5
        let disks: Vec<_> = (0..300)
            .map(|i| {
                let a = f64::from(i) * 2.4;
                let d = f64::from(i) / 300.0;
                tp(i as usize, d * a.cos(), d * a.sin(), 5.0)
            })
            .collect();
        let sep = build_unit_separator(&disks).unwrap();
        check_separator(&disks, &sep);
        assert!(sep.part_a.is_empty() && sep.part_b.is_empty());
        assert!(sep.cliques.len() <= 50, "{} cliques", sep.cliques.len());
    }

    #[test]
    fn two_disjoint_disks() {
        let disks = [tp(0, 0.0, 0.0, 1.0), tp(1, 10.0, 0.0, 1.0)];
        let sep = build_unit_separator(&disks).unwrap();
        check_separator(&disks, &sep);
        assert!(build_unit_separator(&disks[..1]).is_err());
    }

    #[test]
    fn coincident_centers_fall_back() {
        let mut disks: Vec<_> = (0..200).map(|i| tp(i, 0.0, 0.0, 1.0)).collect();
        disks.push(tp(200, 50.0, 0.0, 1.0));
        let sep = build_unit_separator(&disks).unwrap();
        assert!(sep.degenerate);
        assert_eq!(sep.cliques.len(), 1);
        assert_eq!(sep.cliques[0].members.len(), 200);
        assert_eq!(sep.part_a, vec![200]);
        check_separator(&disks, &sep);
    }

    #[test]
    fn random_separators_hold_invariants() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for trial in 0..60 {
            let n = rng.gen_range(2..600);
            let side = (n as f64).sqrt() * rng.gen_range(0.5..4.0);
            let psi: f64 = [1.0, 2.0, 10.0, 1e4][trial % 4];
            let disks: Vec<_> = (0..n)
                .map(|i| {
                    let r = psi.powf(rng.gen_range(0.0..1.0));
                    tp(i, rng.gen_range(0.0..side), rng.gen_range(0.0..side), r)
                })
                .collect();
            for weight in [&(|_| 1.0) as &dyn Fn(usize) -> f64, &|s| (s as f64).sqrt()] {
                let sep = build_separator(&disks, weight).unwrap();
                check_separator(&disks, &sep);
                if n > 64 {
                    assert!(sep.part_a.len() <= balance_bound(n));
                    assert!(sep.part_b.len() <= balance_bound(n));
                }
            }
        }
    }
}
