use thiserror::Error;

use crate::gridfn::DomainKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value at flat index {index}")]
    NonFinite { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("expected a {expected:?} function, found {found:?}")]
    DomainMismatch { expected: DomainKind, found: DomainKind },

    #[error("empty window")]
    EmptyWindow,

    #[error("no admissible box: threshold {threshold} exceeds grid extent {extent} on axis {axis}")]
    NoAdmissibleBox { axis: usize, threshold: f64, extent: f64 },

    #[error("index box out of range on axis {axis}: [{lo}, {hi}) with {count} cells")]
    OutOfRange {
        axis: usize,
        lo: usize,
        hi: usize,
        count: usize,
    },

    #[error("monotonicity violated along axis {axis} at flat index {index}")]
    NotMonotone { axis: usize, index: usize },

    #[error("series did not converge: {0}")]
    Divergent(String),

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("malformed document: {0}")]
    Malformed(String),
}
