use thiserror::Error;

/// Errors reported by the geometry, graph and oracle builders.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite coordinate ({x}, {y})")]
    NonFiniteCoordinate { x: f64, y: f64 },
    #[error("invalid radius {0}: must be finite and positive")]
    InvalidRadius(f64),
    #[error("cone apex coincides with the query point")]
    CoincidentApex,
    #[error("duplicate point id {0}")]
    DuplicateId(usize),
    #[error("point id {id} out of range for {n} points")]
    IdOutOfRange { id: usize, n: usize },
    #[error("unknown node {0}")]
    UnknownNode(usize),
    #[error("k = {k} out of range 1..={n}")]
    BadK { k: usize, n: usize },
    #[error("disk of point {0} does not contain the stab point")]
    NotStabbed(usize),
    #[error("disks of points {0} and {1} do not intersect")]
    NotAClique(usize, usize),
    #[error("epsilon must be finite and positive, got {0}")]
    BadEpsilon(f64),
    #[error("separator input needs at least two disks, got {0}")]
    TooFewDisks(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
