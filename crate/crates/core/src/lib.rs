//! Reachability and approximate hop-distance oracles for transmission
//! graphs, built on clique-based separators of disk intersection graphs.

pub mod continuous;
pub mod distance;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod hierarchy;
pub mod reach;
pub mod separator;
pub mod via;

pub use continuous::ContinuousIndex;
pub use distance::DistanceOracle;
pub use error::{Error, Result};
pub use geometry::{ConeIndex, Point, TransmissionPoint};
pub use graph::{HopDistance, NodeId, TransmissionGraph};
pub use reach::ReachabilityOracle;
