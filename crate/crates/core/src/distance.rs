//! Approximate hop-distance oracle on the separator hierarchy.
//!
//! Each level stores, for every node and every separator path, the leveled
//! `min_in` / `max_out` rows computed in that level's induced subgraph.
//! Base tables hold exact hop distances.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::TransmissionPoint;
use crate::graph::{NodeId, TransmissionGraph, UNREACHED};
use crate::hierarchy::{total_entries, Hierarchy, LevelStats, LevelTrace, Step, Tables, DEFAULT_BASE_CUTOFF};
use crate::via::{dist_rows, scan_levels, HopLevels, TransitivePath};

pub(crate) struct DistLevel {
    levels: HopLevels,
    paths: usize,
    /// `[node][path][slot]`
    min_in: Vec<u32>,
    max_out: Vec<u32>,
}

impl DistLevel {
    fn query(&self, s: usize, t: usize) -> f64 {
        let l = self.levels.count();
        let row = self.paths * l;
        let a = &self.min_in[s * row..(s + 1) * row];
        let b = &self.max_out[t * row..(t + 1) * row];
        a.chunks_exact(l)
            .zip(b.chunks_exact(l))
            .map(|(x, y)| scan_levels(x, y, &self.levels))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Exact hop distances of a small subgraph, row-major.
pub(crate) struct DistBase {
    n: usize,
    hops: Vec<u32>,
}

impl DistBase {
    fn query(&self, s: usize, t: usize) -> f64 {
        match self.hops[s * self.n + t] {
            UNREACHED => f64::INFINITY,
            d => f64::from(d),
        }
    }
}

struct DistTables {
    eps: f64,
}

impl Tables for DistTables {
    type Level = DistLevel;
    type Base = DistBase;

    fn level(&self, g: &TransmissionGraph, paths: &[TransitivePath]) -> DistLevel {
        let n = g.len();
        let levels = HopLevels::new(self.eps, n).expect("epsilon validated at build");
        let l = levels.count();
        let per_path: Vec<(Vec<u32>, Vec<u32>)> = paths.par_iter().map(|p| dist_rows(g, p, &levels)).collect();
        let p = paths.len();
        let mut min_in = vec![0u32; n * p * l];
        let mut max_out = vec![0u32; n * p * l];
        for (pi, (a, b)) in per_path.iter().enumerate() {
            for v in 0..n {
                let dst = (v * p + pi) * l;
                min_in[dst..dst + l].copy_from_slice(&a[v * l..(v + 1) * l]);
                max_out[dst..dst + l].copy_from_slice(&b[v * l..(v + 1) * l]);
            }
        }
        DistLevel { levels, paths: p, min_in, max_out }
    }

    fn base(&self, g: &TransmissionGraph) -> DistBase {
        DistBase { n: g.len(), hops: g.apsp_raw() }
    }

    fn level_entries(level: &DistLevel) -> u64 {
        (level.min_in.len() + level.max_out.len()) as u64
    }

    fn base_entries(base: &DistBase) -> u64 {
        base.hops.len() as u64
    }
}

/// Answer of one hierarchy level to a distance query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelAnswer {
    pub depth: usize,
    /// True for the exact base table at the bottom of the walk.
    pub base: bool,
    pub value: f64,
}

/// Returns `d*` with `d_hop(s, t) <= d* <= (1 + eps) d_hop(s, t) + 2`, and
/// infinity exactly when `t` is unreachable from `s`.
pub struct DistanceOracle {
    inner: Hierarchy<DistLevel, DistBase>,
    eps: f64,
    stored_entries: u64,
}

impl DistanceOracle {
    pub fn build(pts: &[TransmissionPoint], eps: f64) -> Result<Self> {
        Self::build_with_cutoff(pts, eps, DEFAULT_BASE_CUTOFF)
    }

    pub fn build_with_cutoff(pts: &[TransmissionPoint], eps: f64, base_cutoff: usize) -> Result<Self> {
        Self::assemble(pts, eps, base_cutoff, None)
    }

    /// Reports every level to `trace` as it is built, possibly from
    /// several threads.
    pub fn build_traced(
        pts: &[TransmissionPoint],
        eps: f64,
        base_cutoff: usize,
        trace: &(dyn Fn(&LevelTrace<'_>) + Sync),
    ) -> Result<Self> {
        Self::assemble(pts, eps, base_cutoff, Some(trace))
    }

    fn assemble(
        pts: &[TransmissionPoint],
        eps: f64,
        base_cutoff: usize,
        trace: Option<&(dyn Fn(&LevelTrace<'_>) + Sync)>,
    ) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::BadEpsilon(eps));
        }
        let inner = Hierarchy::build(pts, base_cutoff, &DistTables { eps }, trace)?;
        let stored_entries = total_entries::<DistTables>(&inner);
        Ok(DistanceOracle { inner, eps, stored_entries })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn len(&self) -> usize {
        self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.len() == 0
    }

    pub fn query(&self, s: NodeId, t: NodeId) -> Result<f64> {
        self.inner.check(s)?;
        self.inner.check(t)?;
        if s == t {
            return Ok(0.0);
        }
        let mut best = f64::INFINITY;
        self.inner.walk(s, t, |step| {
            let v = match step {
                Step::Level(l, s, t) => l.query(s, t),
                Step::Base(b, s, t) => b.query(s, t),
            };
            best = best.min(v);
            false
        });
        Ok(best)
    }

    /// The answer of every level visited by a query, top-down. The query
    /// result is the minimum of these values (0 for `s == t`).
    pub fn query_levels(&self, s: NodeId, t: NodeId) -> Result<Vec<LevelAnswer>> {
        self.inner.check(s)?;
        self.inner.check(t)?;
        let mut out = Vec::new();
        self.inner.walk(s, t, |step| {
            let (base, value) = match step {
                Step::Level(l, s, t) => (false, l.query(s, t)),
                Step::Base(b, s, t) => (true, b.query(s, t)),
            };
            out.push(LevelAnswer { depth: out.len(), base, value });
            false
        });
        Ok(out)
    }

    pub fn level_stats(&self) -> &[LevelStats] {
        self.inner.stats()
    }

    pub fn stored_entries(&self) -> u64 {
        self.stored_entries
    }

    pub fn recursion_depth(&self) -> usize {
        self.inner.depth()
    }
}
