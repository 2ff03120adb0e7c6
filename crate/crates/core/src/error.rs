use thiserror::Error;

/// Errors raised by tree construction, matrix arithmetic and the proof-structure builders.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error("edge ({u},{v}) has non-positive weight {weight}")]
    NonPositiveWeight { u: usize, v: usize, weight: String },
    #[error("vertex id {id} is out of range 1..={n}")]
    BadVertexId { id: usize, n: usize },
    #[error("vertex pair must be distinct, got ({0},{0})")]
    SameVertex(usize),
    #[error("cannot parse weight {0:?}")]
    BadWeight(String),
    #[error("tree file: {0}")]
    Parse(String),

    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("S + J is singular; input does not have null space span(1) with rank n-1")]
    SingularSstar,
    #[error("invariant violated: {0}")]
    InvariantViolated(String),

    #[error("vertex {y} is equidistant from path vertices {first} and {second}")]
    TieDetected {
        y: usize,
        first: usize,
        second: usize,
    },
    #[error("inconsistent partition chain: {0}")]
    InconsistentChain(String),
    #[error("bad certificate domain: {0}")]
    BadCertificateDomain(String),
    #[error("R[E,E] is indefinite for E = {0:?}")]
    FoundIndefinite(Vec<usize>),

    #[error("bad configuration: {0}")]
    BadConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
