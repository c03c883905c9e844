//! Plane primitives and the six canonical 60-degree cones.
//!
//! All predicates compare squared distances, so they are exact whenever the
//! inputs are integers of magnitude at most 2^20.

use std::f64::consts::{FRAC_PI_3, TAU};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    /// Panics on a non-finite coordinate; use [`Point::try_new`] for input
    /// that has not been validated.
    pub fn new(x: f64, y: f64) -> Self {
        Self::try_new(x, y).expect("point coordinates must be finite")
    }

    pub fn try_new(x: f64, y: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() {
            Ok(Point { x, y })
        } else {
            Err(Error::NonFiniteCoordinate { x, y })
        }
    }

    pub fn dist_sq(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn dist(self, other: Point) -> f64 {
        self.dist_sq(other).sqrt()
    }

    /// Chebyshev (L-infinity) distance.
    pub fn linf_dist(self, other: Point) -> f64 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }
}

/// A node of the transmission graph: a site with its transmission radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionPoint {
    pub id: usize,
    pub pos: Point,
    pub radius: f64,
}

impl TransmissionPoint {
    pub fn new(id: usize, pos: Point, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidRadius(radius));
        }
        Ok(TransmissionPoint { id, pos, radius })
    }

    /// Shorthand used heavily by tests and generators.
    pub fn at(id: usize, x: f64, y: f64, radius: f64) -> Result<Self> {
        Self::new(id, Point::try_new(x, y)?, radius)
    }

    /// The transmission disk `D_p`.
    pub fn disk(&self) -> Disk {
        Disk { center: self.pos, radius: self.radius }
    }

    /// True iff the arc `self -> q` is present in the transmission graph
    /// (ignoring the no-self-loop rule).
    pub fn reaches(&self, q: Point) -> bool {
        self.pos.dist_sq(q) <= self.radius * self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: Point,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(Error::InvalidRadius(radius));
        }
        Ok(Disk { center, radius })
    }

    pub fn contains(&self, q: Point) -> bool {
        disk_contains(self, q)
    }

    pub fn intersects(&self, other: &Disk) -> bool {
        disks_intersect(self, other)
    }
}

/// Closed containment: the boundary counts.
pub fn disk_contains(d: &Disk, q: Point) -> bool {
    d.center.dist_sq(q) <= d.radius * d.radius
}

/// Closed intersection: tangent disks intersect.
pub fn disks_intersect(a: &Disk, b: &Disk) -> bool {
    let r = a.radius + b.radius;
    a.center.dist_sq(b.center) <= r * r
}

/// One of the six canonical cones around an apex, numbered 1 to 6
/// counter-clockwise from the positive x-axis. Cone `i` covers polar angles
/// in `[(i-1)*60, i*60)` degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConeIndex(u8);

impl ConeIndex {
    pub const ALL: [ConeIndex; 6] =
        [ConeIndex(1), ConeIndex(2), ConeIndex(3), ConeIndex(4), ConeIndex(5), ConeIndex(6)];

    pub fn new(i: u8) -> Option<Self> {
        (1..=6).contains(&i).then_some(ConeIndex(i))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Zero-based position, handy for indexing arrays of six.
    pub fn slot(self) -> usize {
        usize::from(self.0 - 1)
    }

    /// The cone pointing the other way (1 <-> 4, 2 <-> 5, 3 <-> 6).
    pub fn opposite(self) -> Self {
        ConeIndex((self.0 + 2) % 6 + 1)
    }
}

impl fmt::Display for ConeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Cone of the direction `(dx, dy)`, which must not be the zero vector.
fn cone_of_direction(dx: f64, dy: f64) -> ConeIndex {
    if dy == 0.0 {
        return if dx > 0.0 { ConeIndex(1) } else { ConeIndex(4) };
    }
    let mut angle = dy.atan2(dx);
    if angle < 0.0 {
        angle += TAU;
    }
    let k = (angle / FRAC_PI_3).floor() as i64;
    // Keep the upper/lower half-plane split exact even when atan2 rounds.
    let k = if dy > 0.0 { k.clamp(0, 2) } else { k.clamp(3, 5) };
    ConeIndex(k as u8 + 1)
}

/// Index of the canonical cone with apex `apex` that contains `q`.
pub fn canonical_cone_index(apex: Point, q: Point) -> Result<ConeIndex> {
    let dx = q.x - apex.x;
    let dy = q.y - apex.y;
    if dx == 0.0 && dy == 0.0 {
        return Err(Error::CoincidentApex);
    }
    Ok(cone_of_direction(dx, dy))
}

/// Cone of `q` around `apex`, with a coincident `q` put in cone 1.
pub fn cone_or_first(apex: Point, q: Point) -> ConeIndex {
    canonical_cone_index(apex, q).unwrap_or(ConeIndex(1))
}

/// `t` lies in the sector `D_p^(i)`: equivalently `p` lies in cone `i` as
/// seen from `t` and `t` is inside the transmission disk of `p`.
pub fn sector_contains(p: &TransmissionPoint, i: ConeIndex, t: Point) -> bool {
    p.reaches(t) && cone_or_first(t, p.pos) == i
}

/// Axis-parallel square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Square {
    pub center: Point,
    pub half_edge: f64,
}

impl Square {
    pub fn edge(&self) -> f64 {
        2.0 * self.half_edge
    }

    /// Copy scaled by `t` about the center.
    pub fn scaled(&self, t: f64) -> Square {
        Square { center: self.center, half_edge: self.half_edge * t }
    }

    pub fn contains(&self, q: Point) -> bool {
        self.center.linf_dist(q) <= self.half_edge
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(x: f64, y: f64, r: f64) -> Disk {
        Disk::new(Point::new(x, y), r).unwrap()
    }

    #[test]
    fn containment_examples() {
        assert!(disk_contains(&disk(0.0, 0.0, 1.0), Point::new(1.0, 0.0)));
        assert!(!disk_contains(&disk(0.0, 0.0, 1.0), Point::new(1.5, 0.0)));
        assert!(disk_contains(&disk(2.0, 3.0, 2.0), Point::new(2.0, 3.0)));
    }

    #[test]
    fn intersection_examples() {
        assert!(disks_intersect(&disk(0.0, 0.0, 1.0), &disk(2.0, 0.0, 1.0)));
        assert!(!disks_intersect(&disk(0.0, 0.0, 1.0), &disk(3.0, 0.0, 1.0)));
        assert!(disks_intersect(&disk(0.0, 0.0, 5.0), &disk(1.0, 1.0, 0.1)));
    }

    #[test]
    fn cone_examples() {
        let o = Point::new(0.0, 0.0);
        assert_eq!(canonical_cone_index(o, Point::new(1.0, 0.0)).unwrap().get(), 1);
        assert_eq!(canonical_cone_index(o, Point::new(0.0, 1.0)).unwrap().get(), 2);
        assert_eq!(canonical_cone_index(o, Point::new(-1.0, 0.0)).unwrap().get(), 4);
        assert_eq!(canonical_cone_index(o, Point::new(0.0, -1.0)).unwrap().get(), 5);
        assert_eq!(canonical_cone_index(o, Point::new(1.0, -1e-300)).unwrap().get(), 6);
        assert_eq!(canonical_cone_index(o, o), Err(Error::CoincidentApex));
    }

    #[test]
    fn cone_boundaries_are_half_open() {
        let o = Point::new(0.0, 0.0);
        for k in 0..6 {
            let a = f64::from(k) * FRAC_PI_3 + 1e-9;
            let q = Point::new(a.cos(), a.sin());
            assert_eq!(canonical_cone_index(o, q).unwrap().slot(), k as usize);
        }
    }

    #[test]
    fn opposite_cones() {
        let pairs: Vec<_> = ConeIndex::ALL.iter().map(|c| c.opposite().get()).collect();
        assert_eq!(pairs, vec![4, 5, 6, 1, 2, 3]);
    }

    #[test]
    fn sector_examples() {
        let p = TransmissionPoint::at(0, 1.0, 0.0, 2.0).unwrap();
        let t = Point::new(0.0, 0.0);
        assert!(sector_contains(&p, ConeIndex(1), t));
        assert!(!sector_contains(&p, ConeIndex(2), t));
        let small = TransmissionPoint::at(0, 1.0, 0.0, 0.5).unwrap();
        assert!(!sector_contains(&small, ConeIndex(1), t));
        // degenerate apex
        assert!(sector_contains(&p, ConeIndex(1), p.pos));
        assert!(!sector_contains(&p, ConeIndex(3), p.pos));
    }

    #[test]
    fn constructors_validate() {
        assert!(Point::try_new(f64::NAN, 0.0).is_err());
        assert!(Point::try_new(0.0, f64::INFINITY).is_err());
        assert!(TransmissionPoint::at(0, 0.0, 0.0, 0.0).is_err());
        assert!(TransmissionPoint::at(0, 0.0, 0.0, -1.0).is_err());
        assert!(Disk::new(Point::new(0.0, 0.0), 0.0).is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn exactly_one_cone(dx in -1e6f64..1e6, dy in -1e6f64..1e6) {
                prop_assume!(dx != 0.0 || dy != 0.0);
                let o = Point::new(0.0, 0.0);
                let q = Point::new(dx, dy);
                let c = canonical_cone_index(o, q).unwrap();
                let angle = dy.atan2(dx).rem_euclid(TAU).to_degrees();
                // away from boundaries the index matches the angle band
                let band = (angle / 60.0).floor();
                if (angle - band * 60.0).abs() > 1e-6 && (angle - band * 60.0 - 60.0).abs() > 1e-6 {
                    prop_assert_eq!(u8::try_from(band as i64 + 1).unwrap(), c.get());
                }
            }

            #[test]
            fn sector_in_at_most_one_cone(
                px in -50i32..50, py in -50i32..50, r in 1i32..60,
                tx in -50i32..50, ty in -50i32..50,
            ) {
                let p = TransmissionPoint::at(0, f64::from(px), f64::from(py), f64::from(r)).unwrap();
                let t = Point::new(f64::from(tx), f64::from(ty));
                let hits = ConeIndex::ALL.iter().filter(|&&i| sector_contains(&p, i, t)).count();
                prop_assert_eq!(hits, usize::from(p.reaches(t)));
            }
        }
    }
}
