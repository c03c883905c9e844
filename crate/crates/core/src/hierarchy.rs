//! Recursive separator hierarchy shared by the reachability and distance
//! oracles.
//!
//! Every internal node of the hierarchy holds a clique separator of its
//! point set, the per-level tables built from the separator's transitive
//! paths over the whole current subgraph, and two children built on the
//! renumbered parts. Small point sets end in a base table.

use crate::error::{Error, Result};
use crate::geometry::TransmissionPoint;
use crate::graph::{NodeId, TransmissionGraph};
use crate::separator::{build_unit_separator, CliqueSeparator};
use crate::via::{stabbed_clique_paths, TransitivePath};

/// Point sets of at most this many points are answered from a table.
pub const DEFAULT_BASE_CUTOFF: usize = 64;

/// Extra levels allowed on top of `log_{145/144} n`.
const DEPTH_SLACK: f64 = 8.0;

/// Which side of a level's separator a node fell on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    B,
    Separator,
}

/// Summary of one internal node of the hierarchy.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelStats {
    pub depth: usize,
    pub n: usize,
    pub cliques: usize,
    pub weight: f64,
    pub separator_size: usize,
    pub part_a: usize,
    pub part_b: usize,
    pub paths: usize,
    pub degenerate: bool,
    pub stored_entries: u64,
}

/// Everything a level saw while it was being built.
pub struct LevelTrace<'a> {
    pub depth: usize,
    /// The level's induced subgraph, with dense local ids.
    pub graph: &'a TransmissionGraph,
    /// `original_ids[local]` is the id of the node in the input instance.
    pub original_ids: &'a [NodeId],
    pub separator: &'a CliqueSeparator,
    pub paths: &'a [TransitivePath],
}

/// Builds the per-level and base tables of one oracle flavor.
pub(crate) trait Tables: Sync {
    type Level: Send + Sync;
    type Base: Send + Sync;

    fn level(&self, g: &TransmissionGraph, paths: &[TransitivePath]) -> Self::Level;
    fn base(&self, g: &TransmissionGraph) -> Self::Base;
    fn level_entries(level: &Self::Level) -> u64;
    fn base_entries(base: &Self::Base) -> u64;
}

pub(crate) enum Node<L, B> {
    Base(B),
    Split(Box<Split<L, B>>),
}

pub(crate) struct Split<L, B> {
    pub(crate) tables: L,
    side: Vec<Side>,
    /// local id of every non-separator node inside its child
    child_id: Vec<u32>,
    children: [Node<L, B>; 2],
}

/// One step of a query's walk down the hierarchy, in local ids.
pub(crate) enum Step<'a, L, B> {
    Level(&'a L, usize, usize),
    Base(&'a B, usize, usize),
}

pub(crate) struct Hierarchy<L, B> {
    root: Node<L, B>,
    n: usize,
    stats: Vec<LevelStats>,
    depth: usize,
}

type Trace<'t> = Option<&'t (dyn Fn(&LevelTrace<'_>) + Sync)>;

impl<L: Send + Sync, B: Send + Sync> Hierarchy<L, B> {
    pub(crate) fn build<T: Tables<Level = L, Base = B>>(
        pts: &[TransmissionPoint],
        base_cutoff: usize,
        tables: &T,
        trace: Trace<'_>,
    ) -> Result<Self> {
        let g = TransmissionGraph::build(pts)?;
        let ids: Vec<NodeId> = (0..g.len()).collect();
        let base_cutoff = base_cutoff.max(1);
        let (root, mut stats, depth) = build_node(&g, &ids, 0, base_cutoff, tables, trace)?;
        let n = g.len();
        let limit = if n > 1 { (n as f64).ln() / (145.0f64 / 144.0).ln() } else { 0.0 } + DEPTH_SLACK;
        assert!((depth as f64) <= limit, "recursion depth {depth} exceeds bound {limit:.1} for n = {n}");
        stats.sort_by_key(|s| s.depth);
        Ok(Hierarchy { root, n, stats, depth })
    }

    pub(crate) fn len(&self) -> usize {
        self.n
    }

    pub(crate) fn stats(&self) -> &[LevelStats] {
        &self.stats
    }

    /// Number of levels on the deepest root-to-base walk.
    pub(crate) fn depth(&self) -> usize {
        self.depth
    }

    pub(crate) fn check(&self, v: NodeId) -> Result<()> {
        if v < self.n {
            Ok(())
        } else {
            Err(Error::UnknownNode(v))
        }
    }

    /// Walks from the root while `s` and `t` stay on the same side, calling
    /// `visit` once per level and once for the base table if reached.
    /// Stops early when `visit` returns `true`.
    pub(crate) fn walk(&self, mut s: usize, mut t: usize, mut visit: impl FnMut(Step<'_, L, B>) -> bool) {
        let mut node = &self.root;
        loop {
            match node {
                Node::Base(b) => {
                    visit(Step::Base(b, s, t));
                    return;
                }
                Node::Split(split) => {
                    if visit(Step::Level(&split.tables, s, t)) {
                        return;
                    }
                    let side = split.side[s];
                    if side == Side::Separator || side != split.side[t] {
                        return;
                    }
                    node = &split.children[usize::from(side == Side::B)];
                    s = split.child_id[s] as usize;
                    t = split.child_id[t] as usize;
                }
            }
        }
    }
}

type Built<L, B> = (Node<L, B>, Vec<LevelStats>, usize);

fn build_node<T: Tables>(
    g: &TransmissionGraph,
    original_ids: &[NodeId],
    depth: usize,
    base_cutoff: usize,
    tables: &T,
    trace: Trace<'_>,
) -> Result<Built<T::Level, T::Base>> {
    let n = g.len();
    if n <= base_cutoff {
        return Ok((Node::Base(tables.base(g)), Vec::new(), depth));
    }
    let separator = build_unit_separator(g.points())?;
    let mut paths = Vec::new();
    for clique in &separator.cliques {
        paths.extend(stabbed_clique_paths(g, clique)?);
    }
    if let Some(f) = trace {
        f(&LevelTrace { depth, graph: g, original_ids, separator: &separator, paths: &paths });
    }

    let mut side = vec![Side::Separator; n];
    let mut child_id = vec![u32::MAX; n];
    for (part, s) in [(&separator.part_a, Side::A), (&separator.part_b, Side::B)] {
        assert!(part.len() < n, "separator part of size {} does not shrink n = {n}", part.len());
        for (i, &v) in part.iter().enumerate() {
            side[v] = s;
            child_id[v] = i as u32;
        }
    }

    let child = |part: &[NodeId]| -> Result<Built<T::Level, T::Base>> {
        let sub = g.induced(part);
        let ids: Vec<NodeId> = part.iter().map(|&v| original_ids[v]).collect();
        build_node(&sub, &ids, depth + 1, base_cutoff, tables, trace)
    };
    let (level, (a, b)) = rayon::join(
        || tables.level(g, &paths),
        || rayon::join(|| child(&separator.part_a), || child(&separator.part_b)),
    );
    let (a, b) = (a?, b?);

    let stored_entries = T::level_entries(&level);
    let mut stats = vec![LevelStats {
        depth,
        n,
        cliques: separator.cliques.len(),
        weight: separator.weight,
        separator_size: separator.separator_size(),
        part_a: separator.part_a.len(),
        part_b: separator.part_b.len(),
        paths: paths.len(),
        degenerate: separator.degenerate,
        stored_entries,
    }];
    stats.extend(a.1);
    stats.extend(b.1);
    let split = Split { tables: level, side, child_id, children: [a.0, b.0] };
    Ok((Node::Split(Box::new(split)), stats, a.2.max(b.2)))
}

/// Total table size: level tables plus base tables.
pub(crate) fn total_entries<T: Tables>(h: &Hierarchy<T::Level, T::Base>) -> u64 {
    fn go<T: Tables>(node: &Node<T::Level, T::Base>) -> u64 {
        match node {
            Node::Base(b) => T::base_entries(b),
            Node::Split(s) => T::level_entries(&s.tables) + s.children.iter().map(go::<T>).sum::<u64>(),
        }
    }
    go::<T>(&h.root)
}
