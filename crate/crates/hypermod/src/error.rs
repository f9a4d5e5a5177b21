use thiserror::Error;

/// Errors produced by construction, estimation, and optimization routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("hypergraph must contain at least one edge")]
    EmptyHypergraph,
    #[error("edge {index} is empty")]
    EmptyEdge { index: usize },
    #[error("edge {index} has non-positive weight {weight}")]
    InvalidWeight { index: usize, weight: f64 },
    #[error("node id {id} out of range for a hypergraph on {n} nodes")]
    NodeOutOfRange { id: usize, n: usize },
    #[error("label vector has length {got}, expected {expected}")]
    LabelLength { got: usize, expected: usize },
    #[error("an empty label multiset has no partition profile")]
    EmptyProfile,
    #[error("missing affinity parameter: family {family}, size {k}, stratum {stratum}")]
    MissingParameter {
        family: &'static str,
        k: usize,
        stratum: usize,
    },
    #[error("degenerate all-or-nothing pair at size {k}: omega_k1 == omega_k0")]
    DegenerateAonPair { k: usize },
    #[error("affinity value {value} is not positive on a stratum carrying cut weight (size {k}, stratum {stratum})")]
    NonPositiveAffinity { value: f64, k: usize, stratum: usize },
    #[error("optimizer `{optimizer}` cannot be used with affinity family `{family}`")]
    OptimizerMismatch { optimizer: String, family: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("exact sampler guard exceeded: {count} candidate tuples of size {k} on {n} nodes (limit {limit})")]
    EnumerationGuard {
        n: usize,
        k: usize,
        count: u128,
        limit: u128,
    },
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
