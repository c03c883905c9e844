//! The transmission graph `G_tr(P)`: arc `(p, q)` iff `q` lies in the
//! transmission disk of `p`.
//!
//! Adjacency is stored in compressed sparse row form for both directions.
//! Besides BFS this module provides the strongly connected component
//! condensation and the min/max label propagation that backs the via-path
//! oracles.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::TransmissionPoint;

pub type NodeId = usize;

/// Raw BFS marker for an unreached node.
pub(crate) const UNREACHED: u32 = u32::MAX;

/// Below this size the pairwise scan beats building a grid.
const GRID_THRESHOLD: usize = 256;

/// Hop distance, with `Unreachable` ordered after every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HopDistance {
    Hops(u32),
    Unreachable,
}

impl HopDistance {
    pub(crate) fn from_raw(d: u32) -> Self {
        if d == UNREACHED {
            HopDistance::Unreachable
        } else {
            HopDistance::Hops(d)
        }
    }

    pub fn hops(self) -> Option<u32> {
        match self {
            HopDistance::Hops(h) => Some(h),
            HopDistance::Unreachable => None,
        }
    }

    pub fn is_reachable(self) -> bool {
        matches!(self, HopDistance::Hops(_))
    }

    /// `f64::INFINITY` for unreachable pairs.
    pub fn as_f64(self) -> f64 {
        match self {
            HopDistance::Hops(h) => f64::from(h),
            HopDistance::Unreachable => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Follow arcs from tail to head.
    Forward,
    /// Follow arcs backwards (the transposed graph).
    Reverse,
}

/// Integers extended with both infinities; the derived order is the natural one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Extended {
    NegInf,
    Finite(i64),
    PosInf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelMode {
    Min,
    Max,
}

impl LabelMode {
    pub fn identity(self) -> Extended {
        match self {
            LabelMode::Min => Extended::PosInf,
            LabelMode::Max => Extended::NegInf,
        }
    }

    fn combine(self, a: Extended, b: Extended) -> Extended {
        match self {
            LabelMode::Min => a.min(b),
            LabelMode::Max => a.max(b),
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Csr {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Csr {
    fn from_lists(lists: &[Vec<u32>]) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let mut targets = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        for l in lists {
            targets.extend_from_slice(l);
            offsets.push(targets.len());
        }
        Csr { offsets, targets }
    }

    fn row(&self, v: NodeId) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Transpose of a graph on `n` nodes; rows come out sorted.
    fn transpose(&self, n: usize) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &t in &self.targets {
            counts[t as usize + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let offsets = counts.clone();
        let mut fill = counts;
        let mut targets = vec![0u32; self.targets.len()];
        for u in 0..n {
            for &v in self.row(u) {
                let slot = &mut fill[v as usize];
                targets[*slot] = u as u32;
                *slot += 1;
            }
        }
        Csr { offsets, targets }
    }
}

#[derive(Debug, Clone)]
pub struct TransmissionGraph {
    points: Vec<TransmissionPoint>,
    out_adj: Csr,
    in_adj: Csr,
}

impl TransmissionGraph {
    /// Builds `G_tr(P)`. Ids must be exactly `0..n` in some order; the
    /// points are stored indexed by id.
    pub fn build(pts: &[TransmissionPoint]) -> Result<Self> {
        let points = order_by_id(pts)?;
        let out = if points.len() > GRID_THRESHOLD {
            arcs_grid(&points)
        } else {
            arcs_pairwise(&points)
        };
        Ok(Self::from_out_lists(points, &out))
    }

    /// Same result as [`TransmissionGraph::build`] by the plain quadratic scan.
    pub fn build_pairwise(pts: &[TransmissionPoint]) -> Result<Self> {
        let points = order_by_id(pts)?;
        let out = arcs_pairwise(&points);
        Ok(Self::from_out_lists(points, &out))
    }

    fn from_out_lists(points: Vec<TransmissionPoint>, out: &[Vec<u32>]) -> Self {
        let out_adj = Csr::from_lists(out);
        let in_adj = out_adj.transpose(points.len());
        TransmissionGraph { points, out_adj, in_adj }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[TransmissionPoint] {
        &self.points
    }

    pub fn point(&self, v: NodeId) -> &TransmissionPoint {
        &self.points[v]
    }

    pub fn arc_count(&self) -> usize {
        self.out_adj.targets.len()
    }

    pub fn successors(&self, v: NodeId) -> &[u32] {
        self.out_adj.row(v)
    }

    pub fn predecessors(&self, v: NodeId) -> &[u32] {
        self.in_adj.row(v)
    }

    pub fn neighbors(&self, v: NodeId, dir: Direction) -> &[u32] {
        match dir {
            Direction::Forward => self.successors(v),
            Direction::Reverse => self.predecessors(v),
        }
    }

    pub fn has_arc(&self, u: NodeId, v: NodeId) -> bool {
        self.successors(u).binary_search(&(v as u32)).is_ok()
    }

    /// The graph with every arc reversed.
    pub fn transpose(&self) -> Self {
        TransmissionGraph {
            points: self.points.clone(),
            out_adj: self.in_adj.clone(),
            in_adj: self.out_adj.clone(),
        }
    }

    fn check(&self, v: NodeId) -> Result<()> {
        if v < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownNode(v))
        }
    }

    /// Subgraph induced by `nodes`, renumbered densely in the given order:
    /// node `nodes[i]` becomes `i`.
    pub fn induced(&self, nodes: &[NodeId]) -> Self {
        let mut local = vec![UNREACHED; self.len()];
        for (i, &v) in nodes.iter().enumerate() {
            local[v] = i as u32;
        }
        let points = nodes
            .iter()
            .enumerate()
            .map(|(i, &v)| TransmissionPoint { id: i, ..self.points[v] })
            .collect();
        let out: Vec<Vec<u32>> = nodes
            .iter()
            .map(|&v| {
                let mut row: Vec<u32> = self
                    .successors(v)
                    .iter()
                    .map(|&w| local[w as usize])
                    .filter(|&w| w != UNREACHED)
                    .collect();
                row.sort_unstable();
                row
            })
            .collect();
        Self::from_out_lists(points, &out)
    }

    /// Raw BFS distances (`UNREACHED` for unreachable nodes).
    pub(crate) fn bfs_raw(&self, source: NodeId, dir: Direction) -> Vec<u32> {
        let mut dist = vec![UNREACHED; self.len()];
        let mut queue = Vec::with_capacity(self.len());
        dist[source] = 0;
        queue.push(source as u32);
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head] as usize;
            head += 1;
            let du = dist[u] + 1;
            for &w in self.neighbors(u, dir) {
                let w = w as usize;
                if dist[w] == UNREACHED {
                    dist[w] = du;
                    queue.push(w as u32);
                }
            }
        }
        dist
    }

    /// Exact hop distance from `s` to `t` by breadth-first search.
    pub fn hop_distance(&self, s: NodeId, t: NodeId) -> Result<HopDistance> {
        self.check(s)?;
        self.check(t)?;
        if s == t {
            return Ok(HopDistance::Hops(0));
        }
        let mut dist = vec![UNREACHED; self.len()];
        let mut queue = vec![s as u32];
        dist[s] = 0;
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head] as usize;
            head += 1;
            for &w in self.successors(u) {
                let w = w as usize;
                if dist[w] == UNREACHED {
                    dist[w] = dist[u] + 1;
                    if w == t {
                        return Ok(HopDistance::Hops(dist[w]));
                    }
                    queue.push(w as u32);
                }
            }
        }
        Ok(HopDistance::Unreachable)
    }

    /// `d(source, .)` for `Forward`, `d(., source)` for `Reverse`.
    pub fn all_hop_distances(&self, source: NodeId, dir: Direction) -> Result<Vec<HopDistance>> {
        self.check(source)?;
        Ok(self.bfs_raw(source, dir).into_iter().map(HopDistance::from_raw).collect())
    }

    /// Row-major `n x n` matrix of raw hop distances, one BFS per source.
    pub(crate) fn apsp_raw(&self) -> Vec<u32> {
        let n = self.len();
        let rows: Vec<Vec<u32>> =
            (0..n).into_par_iter().map(|s| self.bfs_raw(s, Direction::Forward)).collect();
        rows.concat()
    }

    pub fn condensation(&self) -> Condensation {
        Condensation::new(self)
    }

    /// For every node `v`, the best label over all nodes reachable from `v`
    /// (`Forward`) or over all nodes that reach `v` (`Reverse`), including
    /// `v` itself. Runs in `O(n + m)`.
    pub fn min_label_reach(&self, labels: &[Extended], mode: LabelMode, dir: Direction) -> Vec<Extended> {
        assert_eq!(labels.len(), self.len(), "one label per node");
        self.condensation().propagate(labels, mode.identity(), |a, b| mode.combine(a, b), dir)
    }
}

fn order_by_id(pts: &[TransmissionPoint]) -> Result<Vec<TransmissionPoint>> {
    let n = pts.len();
    let mut slots: Vec<Option<TransmissionPoint>> = vec![None; n];
    for p in pts {
        if p.id >= n {
            return Err(Error::IdOutOfRange { id: p.id, n });
        }
        if slots[p.id].replace(*p).is_some() {
            return Err(Error::DuplicateId(p.id));
        }
    }
    Ok(slots.into_iter().map(|p| p.expect("ids form a permutation")).collect())
}

fn arcs_pairwise(points: &[TransmissionPoint]) -> Vec<Vec<u32>> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            points
                .iter()
                .enumerate()
                .filter(|&(j, q)| j != i && p.reaches(q.pos))
                .map(|(j, _)| j as u32)
                .collect()
        })
        .collect()
}

/// Uniform grid keyed on the largest radius: every out-neighbour of `p`
/// lies in the 3x3 block of cells around `p`.
fn arcs_grid(points: &[TransmissionPoint]) -> Vec<Vec<u32>> {
    let cell = points.iter().map(|p| p.radius).fold(0.0, f64::max);
    let min_x = points.iter().map(|p| p.pos.x).fold(f64::INFINITY, f64::min);
    let min_y = points.iter().map(|p| p.pos.y).fold(f64::INFINITY, f64::min);
    let max_x = points.iter().map(|p| p.pos.x).fold(f64::NEG_INFINITY, f64::max);
    let max_y = points.iter().map(|p| p.pos.y).fold(f64::NEG_INFINITY, f64::max);
    // cap the grid so sparse instances with tiny radii do not allocate wildly
    let cap = (points.len() as f64).sqrt().ceil() * 2.0;
    let cols = (((max_x - min_x) / cell).floor() + 1.0).min(cap) as usize;
    let rows = (((max_y - min_y) / cell).floor() + 1.0).min(cap) as usize;
    let cw = ((max_x - min_x) / cols as f64).max(cell);
    let ch = ((max_y - min_y) / rows as f64).max(cell);
    let cell_of = |x: f64, y: f64| {
        let cx = (((x - min_x) / cw) as usize).min(cols - 1);
        let cy = (((y - min_y) / ch) as usize).min(rows - 1);
        (cx, cy)
    };
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); cols * rows];
    for (i, p) in points.iter().enumerate() {
        let (cx, cy) = cell_of(p.pos.x, p.pos.y);
        buckets[cy * cols + cx].push(i as u32);
    }
    points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let (x0, y0) = cell_of(p.pos.x - p.radius, p.pos.y - p.radius);
            let (x1, y1) = cell_of(p.pos.x + p.radius, p.pos.y + p.radius);
            let mut row = Vec::new();
            for cy in y0..=y1 {
                for cx in x0..=x1 {
                    for &j in &buckets[cy * cols + cx] {
                        if j as usize != i && p.reaches(points[j as usize].pos) {
                            row.push(j);
                        }
                    }
                }
            }
            row.sort_unstable();
            row
        })
        .collect()
}

/// Strongly connected components, numbered in topological order of the
/// condensation DAG: an arc between different components always goes from a
/// smaller component id to a larger one.
#[derive(Debug, Clone)]
pub struct Condensation {
    component_of: Vec<u32>,
    dag_out: Csr,
}

impl Condensation {
    fn new(g: &TransmissionGraph) -> Self {
        let n = g.len();
        let tarjan = tarjan(g);
        let count = tarjan.iter().copied().max().map_or(0, |m| m as usize + 1);
        // Tarjan emits sinks first; flip to sources-first.
        let component_of: Vec<u32> = tarjan.iter().map(|&c| (count - 1 - c as usize) as u32).collect();
        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); count];
        for u in 0..n {
            let cu = component_of[u];
            for &w in g.successors(u) {
                let cw = component_of[w as usize];
                if cw != cu {
                    lists[cu as usize].push(cw);
                }
            }
        }
        for l in &mut lists {
            l.sort_unstable();
            l.dedup();
        }
        Condensation { component_of, dag_out: Csr::from_lists(&lists) }
    }

    pub fn component_count(&self) -> usize {
        self.dag_out.offsets.len() - 1
    }

    pub fn component_of(&self, v: NodeId) -> usize {
        self.component_of[v] as usize
    }

    /// Component index of every node.
    pub fn components(&self) -> &[u32] {
        &self.component_of
    }

    pub fn dag_successors(&self, c: usize) -> &[u32] {
        self.dag_out.row(c)
    }

    /// Combines node labels over reachability sets, see
    /// [`TransmissionGraph::min_label_reach`].
    pub fn propagate<T: Copy>(
        &self,
        labels: &[T],
        identity: T,
        combine: impl Fn(T, T) -> T,
        dir: Direction,
    ) -> Vec<T> {
        let mut best = vec![identity; self.component_count()];
        for (v, &l) in labels.iter().enumerate() {
            let c = self.component_of[v] as usize;
            best[c] = combine(best[c], l);
        }
        match dir {
            Direction::Forward => {
                for c in (0..best.len()).rev() {
                    let mut acc = best[c];
                    for &d in self.dag_out.row(c) {
                        acc = combine(acc, best[d as usize]);
                    }
                    best[c] = acc;
                }
            }
            Direction::Reverse => {
                for c in 0..best.len() {
                    let acc = best[c];
                    for &d in self.dag_out.row(c) {
                        best[d as usize] = combine(best[d as usize], acc);
                    }
                }
            }
        }
        self.component_of.iter().map(|&c| best[c as usize]).collect()
    }
}

/// Iterative Tarjan; returns the component index of every node, with
/// components numbered in the order they are completed.
fn tarjan(g: &TransmissionGraph) -> Vec<u32> {
    const UNVISITED: u32 = u32::MAX;
    let n = g.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNVISITED; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut call: Vec<(u32, usize)> = Vec::new();
    let mut next_index = 0u32;
    let mut next_comp = 0u32;

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root as u32, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root as u32);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut edge)) = call.last_mut() {
            let v = v as usize;
            let succ = g.successors(v);
            if *edge < succ.len() {
                let w = succ[*edge] as usize;
                *edge += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w as u32);
                    on_stack[w] = true;
                    call.push((w as u32, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    let p = parent as usize;
                    low[p] = low[p].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow") as usize;
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}
