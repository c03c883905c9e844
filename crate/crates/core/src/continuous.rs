//! Queries whose target is an arbitrary point of the plane.
//!
//! `t` is reachable from `s` iff `s` reaches some node `q` with `t` in the
//! disk of `q`. It suffices to look at `Q(t)`: for every cone `i`, the
//! smallest-radius point among those lying in cone `i` around `t` whose disk
//! contains `t`. Any other candidate in that cone is one arc away from it.
//!
//! One tree per cone holds the points sorted by radius. Each tree node
//! answers "is `t` in the union of the sectors below me" by scanning its
//! contiguous leaf range after a bounding-box check, and the query descends
//! to the leftmost leaf whose sector contains `t`.

use crate::distance::DistanceOracle;
use crate::error::{Error, Result};
use crate::geometry::{sector_contains, ConeIndex, Point, TransmissionPoint};
use crate::graph::NodeId;
use crate::reach::ReachabilityOracle;

#[derive(Debug, Clone, Copy, PartialEq)]
struct BoundingBox {
    min_x: f64,
    min_y: f64,
    max_x: f64,
    max_y: f64,
}

impl BoundingBox {
    const EMPTY: BoundingBox =
        BoundingBox { min_x: f64::INFINITY, min_y: f64::INFINITY, max_x: f64::NEG_INFINITY, max_y: f64::NEG_INFINITY };

    fn of_disk(p: &TransmissionPoint) -> Self {
        BoundingBox {
            min_x: p.pos.x - p.radius,
            min_y: p.pos.y - p.radius,
            max_x: p.pos.x + p.radius,
            max_y: p.pos.y + p.radius,
        }
    }

    fn union(self, o: BoundingBox) -> Self {
        BoundingBox {
            min_x: self.min_x.min(o.min_x),
            min_y: self.min_y.min(o.min_y),
            max_x: self.max_x.max(o.max_x),
            max_y: self.max_y.max(o.max_y),
        }
    }

    fn contains(&self, t: Point) -> bool {
        self.min_x <= t.x && t.x <= self.max_x && self.min_y <= t.y && t.y <= self.max_y
    }
}

/// A node of a [`SectorTree`]: the leaf range `lo..hi` of the sorted order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeNode {
    slot: usize,
    lo: usize,
    hi: usize,
}

impl TreeNode {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.lo..self.hi
    }

    pub fn is_leaf(&self) -> bool {
        self.hi - self.lo == 1
    }
}

/// Balanced tree over the points sorted by ascending radius, ties by id.
#[derive(Debug, Clone)]
pub struct SectorTree {
    cone: ConeIndex,
    leaves: Vec<TransmissionPoint>,
    /// heap-ordered: root at 1, children of `k` at `2k` and `2k + 1`
    boxes: Vec<BoundingBox>,
}

impl SectorTree {
    pub fn build(pts: &[TransmissionPoint], cone: ConeIndex) -> Self {
        let mut leaves = pts.to_vec();
        leaves.sort_by(|a, b| a.radius.total_cmp(&b.radius).then(a.id.cmp(&b.id)));
        let mut tree = SectorTree { cone, leaves, boxes: Vec::new() };
        if !tree.leaves.is_empty() {
            tree.boxes = vec![BoundingBox::EMPTY; 4 * tree.leaves.len()];
            tree.fill(1, 0, tree.leaves.len());
        }
        tree
    }

    fn fill(&mut self, slot: usize, lo: usize, hi: usize) -> BoundingBox {
        let b = if hi - lo == 1 {
            BoundingBox::of_disk(&self.leaves[lo])
        } else {
            let mid = lo + (hi - lo) / 2;
            self.fill(2 * slot, lo, mid).union(self.fill(2 * slot + 1, mid, hi))
        };
        self.boxes[slot] = b;
        b
    }

    pub fn cone(&self) -> ConeIndex {
        self.cone
    }

    /// Points in left-to-right leaf order.
    pub fn leaves(&self) -> &[TransmissionPoint] {
        &self.leaves
    }

    pub fn root(&self) -> Option<TreeNode> {
        (!self.leaves.is_empty()).then_some(TreeNode { slot: 1, lo: 0, hi: self.leaves.len() })
    }

    pub fn children(&self, v: TreeNode) -> Option<(TreeNode, TreeNode)> {
        if v.is_leaf() {
            return None;
        }
        let mid = v.lo + (v.hi - v.lo) / 2;
        Some((TreeNode { slot: 2 * v.slot, lo: v.lo, hi: mid }, TreeNode { slot: 2 * v.slot + 1, lo: mid, hi: v.hi }))
    }

    /// Does the sector of some leaf below `v` contain `t`?
    pub fn node_membership(&self, v: TreeNode, t: Point) -> bool {
        self.boxes[v.slot].contains(t) && self.leaves[v.range()].iter().any(|p| sector_contains(p, self.cone, t))
    }

    /// The leftmost leaf whose sector contains `t`, found by descending
    /// into the left child whenever its union contains `t`.
    pub fn descend(&self, t: Point) -> Option<&TransmissionPoint> {
        let mut v = self.root()?;
        if !self.node_membership(v, t) {
            return None;
        }
        while let Some((left, right)) = self.children(v) {
            v = if self.node_membership(left, t) { left } else { right };
        }
        Some(&self.leaves[v.lo])
    }
}

/// One [`SectorTree`] per canonical cone.
#[derive(Debug, Clone)]
pub struct ContinuousIndex {
    trees: Vec<SectorTree>,
    n: usize,
}

impl ContinuousIndex {
    pub fn build(pts: &[TransmissionPoint]) -> Self {
        let trees = ConeIndex::ALL.iter().map(|&c| SectorTree::build(pts, c)).collect();
        ContinuousIndex { trees, n: pts.len() }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn tree(&self, cone: ConeIndex) -> &SectorTree {
        &self.trees[cone.slot()]
    }

    /// `q_i(t)` for one cone.
    pub fn candidate(&self, cone: ConeIndex, t: Point) -> Option<&TransmissionPoint> {
        self.tree(cone).descend(t)
    }

    /// `Q(t)`: at most one point per cone, in cone order.
    pub fn query_candidates(&self, t: Point) -> Vec<TransmissionPoint> {
        self.trees.iter().filter_map(|tree| tree.descend(t).copied()).collect()
    }

    fn check(&self, s: NodeId) -> Result<()> {
        if s < self.n {
            Ok(())
        } else {
            Err(Error::UnknownNode(s))
        }
    }

    /// Can `s` reach some node whose disk contains `t`?
    pub fn query_reach(&self, oracle: &ReachabilityOracle, s: NodeId, t: Point) -> Result<bool> {
        self.check(s)?;
        for q in self.query_candidates(t) {
            if oracle.query(s, q.id)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// `min_{q in Q(t)} d*(s, q) + 1`, infinite if no candidate is reachable.
    pub fn query_dist(&self, oracle: &DistanceOracle, s: NodeId, t: Point) -> Result<f64> {
        self.check(s)?;
        let mut best = f64::INFINITY;
        for q in self.query_candidates(t) {
            best = best.min(oracle.query(s, q.id)? + 1.0);
        }
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp(id: usize, x: f64, y: f64, r: f64) -> TransmissionPoint {
        TransmissionPoint::at(id, x, y, r).unwrap()
    }

    fn example() -> Vec<TransmissionPoint> {
        vec![tp(0, 1.0, 0.0, 2.0), tp(1, 0.5, 0.2, 1.0), tp(2, 0.0, -2.0, 2.5), tp(3, 5.0, 5.0, 1.0)]
    }

    /// Minimum-radius point of each cone by a linear scan.
    fn scan(pts: &[TransmissionPoint], cone: ConeIndex, t: Point) -> Option<f64> {
        pts.iter().filter(|p| sector_contains(p, cone, t)).map(|p| p.radius).min_by(f64::total_cmp)
    }

    #[test]
    fn worked_example() {
        let idx = ContinuousIndex::build(&example());
        let q = idx.query_candidates(Point::new(0.0, 0.0));
        let ids: Vec<_> = q.iter().map(|p| p.id).collect();
        assert_eq!(ids, vec![1, 2]);
        let leaves: Vec<_> = idx.tree(ConeIndex::ALL[0]).leaves().iter().map(|p| p.id).collect();
        assert_eq!(leaves, vec![1, 3, 0, 2]);
    }

    #[test]
    fn empty_and_single() {
        let idx = ContinuousIndex::build(&[]);
        assert!(idx.query_candidates(Point::new(0.0, 0.0)).is_empty());
        assert!(idx.tree(ConeIndex::ALL[2]).root().is_none());
        let idx = ContinuousIndex::build(&[tp(0, 1.0, 0.0, 2.0)]);
        let q = idx.query_candidates(Point::new(0.0, 0.0));
        assert_eq!(q.len(), 1);
        assert!(idx.query_candidates(Point::new(50.0, 0.0)).is_empty());
        let tree = idx.tree(ConeIndex::ALL[0]);
        assert!(tree.node_membership(tree.root().unwrap(), Point::new(0.0, 0.0)));
    }

    #[test]
    fn membership_is_or_of_children() {
        let pts = example();
        let idx = ContinuousIndex::build(&pts);
        for &c in &ConeIndex::ALL {
            let tree = idx.tree(c);
            for i in -12..=12 {
                for j in -12..=12 {
                    let t = Point::new(f64::from(i) * 0.5, f64::from(j) * 0.5);
                    let mut stack = vec![tree.root().unwrap()];
                    while let Some(v) = stack.pop() {
                        let direct = tree.leaves()[v.range()].iter().any(|p| sector_contains(p, c, t));
                        assert_eq!(tree.node_membership(v, t), direct);
                        if let Some((a, b)) = tree.children(v) {
                            assert_eq!(direct, tree.node_membership(a, t) || tree.node_membership(b, t));
                            stack.extend([a, b]);
                        }
                    }
                    assert_eq!(idx.candidate(c, t).map(|p| p.radius), scan(&pts, c, t));
                }
            }
        }
    }

    #[test]
    fn continuous_queries_on_example() {
        let pts = example();
        let idx = ContinuousIndex::build(&pts);
        let r = ReachabilityOracle::build(&pts).unwrap();
        let d = DistanceOracle::build(&pts, 0.5).unwrap();
        let t = Point::new(0.0, 0.0);
        assert!(idx.query_reach(&r, 2, t).unwrap());
        assert_eq!(idx.query_dist(&d, 2, t).unwrap(), 1.0);
        assert!(!idx.query_reach(&r, 3, t).unwrap());
        assert_eq!(idx.query_dist(&d, 3, t).unwrap(), f64::INFINITY);
        assert_eq!(idx.query_reach(&r, 9, t), Err(Error::UnknownNode(9)));
    }
}
