use thiserror::Error;

/// Errors raised by geometric operations and the data structures built on them.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("tetrahedron vertices are affinely dependent")]
    DegenerateTetrahedron,
    #[error("parametrization undefined for this direction")]
    DegenerateDirection,
    #[error("input is not in general position")]
    DegeneratePosition,
    #[error("line is contained in the 2-flat")]
    Contained,
    #[error("objects do not intersect")]
    EmptyIntersection,
    #[error("storage parameter {s} outside [n, n^6] for n = {n}")]
    BudgetOutOfRange { n: u64, s: u128 },
    #[error("invalid object: {0}")]
    InvalidObject(String),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("could not generate a non-degenerate {0} within the retry bound")]
    RetriesExhausted(String),
}

pub type Result<T> = std::result::Result<T, Error>;
