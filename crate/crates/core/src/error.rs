use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid truncation: {0}")]
    InvalidTruncation(String),

    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),

    #[error("link {0} out of range")]
    LinkOutOfRange(usize),

    #[error("link {0} is part of the spanning tree")]
    TreeLink(usize),

    #[error("link {0} is not part of the spanning tree")]
    NotTreeLink(usize),

    #[error("the Hilbert space has no matter sites")]
    NoMatter,

    #[error("operation requires pure gauge (no matter sites)")]
    MatterPresent,

    #[error("coarse-grained parity measurement requires even D, got D = {0}")]
    OddDimension(u32),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("the state has zero norm")]
    ZeroState,

    #[error("code projector has zero rank")]
    EmptyCode,

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("state lies outside the reduced subspace (weight {0:.3e})")]
    OutsideReducedSubspace(f64),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
