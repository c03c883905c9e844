//! Exact reachability oracle on the separator hierarchy.
//!
//! Per level, the `min_in` and `max_out` labels of every transitive path are
//! packed per strongly connected component: all nodes of a component reach
//! the same path nodes and are reached by the same ones.

use crate::error::Result;
use crate::geometry::TransmissionPoint;
use crate::graph::{NodeId, TransmissionGraph};
use crate::hierarchy::{total_entries, Hierarchy, LevelStats, LevelTrace, Step, Tables, DEFAULT_BASE_CUTOFF};
use crate::via::{TransitivePath, NO_MAX, NO_MIN};

/// Packed via-path labels of one level.
pub(crate) struct ReachLevel {
    paths: usize,
    component_of: Vec<u32>,
    /// `[component][path]`
    min_in: Vec<u32>,
    max_out: Vec<u32>,
}

impl ReachLevel {
    fn query(&self, s: usize, t: usize) -> bool {
        let p = self.paths;
        let cs = self.component_of[s] as usize;
        let ct = self.component_of[t] as usize;
        let a = &self.min_in[cs * p..(cs + 1) * p];
        let b = &self.max_out[ct * p..(ct + 1) * p];
        a.iter().zip(b).any(|(x, y)| x <= y)
    }
}

/// Row-major `n x n` bit matrix of exact reachability.
pub(crate) struct ReachBase {
    n: usize,
    bits: Vec<u64>,
}

impl ReachBase {
    fn words_per_row(n: usize) -> usize {
        n.div_ceil(64)
    }

    fn query(&self, s: usize, t: usize) -> bool {
        let w = Self::words_per_row(self.n);
        self.bits[s * w + t / 64] >> (t % 64) & 1 == 1
    }
}

struct ReachTables;

/// `rows[c]` combined with `rows[d]` for `c < d`, stored into `rows[c]`
/// (`into_lower`) or `rows[d]`.
fn combine_rows(rows: &mut [u32], width: usize, c: usize, d: usize, into_lower: bool, f: fn(u32, u32) -> u32) {
    let (lo, hi) = rows.split_at_mut(d * width);
    let rc = &mut lo[c * width..(c + 1) * width];
    let rd = &mut hi[..width];
    if into_lower {
        rc.iter_mut().zip(rd.iter()).for_each(|(x, &y)| *x = f(*x, y));
    } else {
        rd.iter_mut().zip(rc.iter()).for_each(|(x, &y)| *x = f(*x, y));
    }
}

impl Tables for ReachTables {
    type Level = ReachLevel;
    type Base = ReachBase;

    fn level(&self, g: &TransmissionGraph, paths: &[TransitivePath]) -> ReachLevel {
        let cond = g.condensation();
        let comps = cond.component_count();
        let p = paths.len();
        let mut min_in = vec![NO_MIN; comps * p];
        let mut max_out = vec![NO_MAX; comps * p];
        for (pi, path) in paths.iter().enumerate() {
            for (i, &q) in path.nodes().iter().enumerate() {
                let cell = cond.component_of(q) * p + pi;
                let idx = i as u32 + 1;
                min_in[cell] = min_in[cell].min(idx);
                max_out[cell] = max_out[cell].max(idx);
            }
        }
        if p > 0 {
            // components are numbered topologically: successors have larger ids
            for c in (0..comps).rev() {
                for &d in cond.dag_successors(c) {
                    combine_rows(&mut min_in, p, c, d as usize, true, u32::min);
                }
            }
            for c in 0..comps {
                for &d in cond.dag_successors(c) {
                    combine_rows(&mut max_out, p, c, d as usize, false, u32::max);
                }
            }
        }
        ReachLevel { paths: p, component_of: cond.components().to_vec(), min_in, max_out }
    }

    fn base(&self, g: &TransmissionGraph) -> ReachBase {
        let n = g.len();
        let w = ReachBase::words_per_row(n);
        let mut bits = vec![0u64; n * w];
        let cond = g.condensation();
        // reachable component sets, then expanded per node
        let comps = cond.component_count();
        let mut comp_bits = vec![0u64; comps * w];
        for v in 0..n {
            let c = cond.component_of(v);
            comp_bits[c * w + v / 64] |= 1 << (v % 64);
        }
        for c in (0..comps).rev() {
            for &d in cond.dag_successors(c) {
                let d = d as usize;
                let (lo, hi) = comp_bits.split_at_mut(d * w);
                lo[c * w..(c + 1) * w].iter_mut().zip(&hi[..w]).for_each(|(x, y)| *x |= y);
            }
        }
        for v in 0..n {
            let c = cond.component_of(v);
            bits[v * w..(v + 1) * w].copy_from_slice(&comp_bits[c * w..(c + 1) * w]);
        }
        ReachBase { n, bits }
    }

    fn level_entries(level: &ReachLevel) -> u64 {
        (level.min_in.len() + level.max_out.len()) as u64
    }

    fn base_entries(base: &ReachBase) -> u64 {
        (base.n * base.n) as u64
    }
}

/// Exact `s ~> t` queries in time proportional to the number of separator
/// paths on the walk down the hierarchy.
pub struct ReachabilityOracle {
    inner: Hierarchy<ReachLevel, ReachBase>,
    stored_entries: u64,
}

impl ReachabilityOracle {
    /// Builds with the default base cutoff. Point ids must be `0..n`.
    pub fn build(pts: &[TransmissionPoint]) -> Result<Self> {
        Self::build_with_cutoff(pts, DEFAULT_BASE_CUTOFF)
    }

    /// `base_cutoff` below 1 is treated as 1.
    pub fn build_with_cutoff(pts: &[TransmissionPoint], base_cutoff: usize) -> Result<Self> {
        Self::assemble(pts, base_cutoff, None)
    }

    /// Like [`ReachabilityOracle::build_with_cutoff`], reporting every level
    /// to `trace` as it is built. Levels may be reported from several
    /// threads.
    pub fn build_traced(
        pts: &[TransmissionPoint],
        base_cutoff: usize,
        trace: &(dyn Fn(&LevelTrace<'_>) + Sync),
    ) -> Result<Self> {
        Self::assemble(pts, base_cutoff, Some(trace))
    }

    fn assemble(
        pts: &[TransmissionPoint],
        base_cutoff: usize,
        trace: Option<&(dyn Fn(&LevelTrace<'_>) + Sync)>,
    ) -> Result<Self> {
        let inner = Hierarchy::build(pts, base_cutoff, &ReachTables, trace)?;
        let stored_entries = total_entries::<ReachTables>(&inner);
        Ok(ReachabilityOracle { inner, stored_entries })
    }

    pub fn len(&self) -> usize {
        self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.len() == 0
    }

    /// Can `s` reach `t`? Every node reaches itself.
    pub fn query(&self, s: NodeId, t: NodeId) -> Result<bool> {
        self.inner.check(s)?;
        self.inner.check(t)?;
        if s == t {
            return Ok(true);
        }
        let mut found = false;
        self.inner.walk(s, t, |step| {
            found = match step {
                Step::Level(l, s, t) => l.query(s, t),
                Step::Base(b, s, t) => b.query(s, t),
            };
            found
        });
        Ok(found)
    }

    /// Statistics of every internal level, sorted by depth.
    pub fn level_stats(&self) -> &[LevelStats] {
        self.inner.stats()
    }

    /// Label cells over all levels plus base-table bits.
    pub fn stored_entries(&self) -> u64 {
        self.stored_entries
    }

    pub fn recursion_depth(&self) -> usize {
        self.inner.depth()
    }

    /// Number of cliques in the top-level separator (0 if the input fits in
    /// the base table).
    pub fn root_clique_count(&self) -> usize {
        self.level_stats().first().filter(|s| s.depth == 0).map_or(0, |s| s.cliques)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::graph::Direction;

    fn tp(id: usize, x: f64, y: f64, r: f64) -> TransmissionPoint {
        TransmissionPoint::at(id, x, y, r).unwrap()
    }

    fn assert_matches_bfs(pts: &[TransmissionPoint], cutoff: usize) {
        let g = TransmissionGraph::build(pts).unwrap();
        let o = ReachabilityOracle::build_with_cutoff(pts, cutoff).unwrap();
        for s in 0..g.len() {
            let d = g.all_hop_distances(s, Direction::Forward).unwrap();
            for t in 0..g.len() {
                assert_eq!(o.query(s, t).unwrap(), d[t].is_reachable(), "pair ({s}, {t})");
            }
        }
    }

    #[test]
    fn single_point() {
        let o = ReachabilityOracle::build(&[tp(0, 3.0, 4.0, 1.0)]).unwrap();
        assert!(o.query(0, 0).unwrap());
        assert_eq!(o.query(1, 0), Err(Error::UnknownNode(1)));
        assert_eq!(o.recursion_depth(), 0);
    }

    #[test]
    fn empty_input() {
        let o = ReachabilityOracle::build(&[]).unwrap();
        assert!(o.is_empty());
        assert_eq!(o.query(0, 0), Err(Error::UnknownNode(0)));
    }

    #[test]
    fn two_disjoint_cliques() {
        let mut pts = Vec::new();
        for i in 0..6 {
            pts.push(tp(i, f64::from(i as u8) * 0.1, 0.0, 1.0));
            pts.push(tp(i + 6, 100.0 + f64::from(i as u8) * 0.1, 0.0, 1.0));
        }
        for cutoff in [1, 2, 4, 64] {
            assert_matches_bfs(&pts, cutoff);
        }
    }

    #[test]
    fn chain_of_unit_disks() {
        let pts: Vec<_> = (0..10).map(|i| tp(i, f64::from(i as u8), 0.0, 1.0)).collect();
        for cutoff in [1, 3, 64] {
            let o = ReachabilityOracle::build_with_cutoff(&pts, cutoff).unwrap();
            assert!(o.query(0, 9).unwrap());
            assert!(o.query(9, 0).unwrap());
        }
        assert_matches_bfs(&pts, 1);
    }

    #[test]
    fn one_way_chain() {
        let pts: Vec<_> = (0..40).map(|i| tp(i, f64::from(i as u8), 0.0, if i % 7 == 3 { 0.5 } else { 1.0 })).collect();
        assert_matches_bfs(&pts, 1);
        assert_matches_bfs(&pts, 8);
    }

    #[test]
    fn stored_entries_cover_base_bits() {
        let pts: Vec<_> = (0..10).map(|i| tp(i, f64::from(i as u8), 0.0, 1.0)).collect();
        let o = ReachabilityOracle::build(&pts).unwrap();
        assert_eq!(o.stored_entries(), 100);
        assert_eq!(o.root_clique_count(), 0);
    }
}
