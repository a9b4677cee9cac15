use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("edge ({u}, {v}) has non-positive or non-finite weight {w}")]
    InvalidWeight { u: usize, v: usize, w: f64 },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("opinion {value} at index {index} outside [0, 1]")]
    OpinionOutOfRange { index: usize, value: f64 },
    #[error("vector is not mean-centered (sum = {0})")]
    NotCentered(f64),
    #[error("empty vector")]
    EmptyVector,
    #[error("negative entry {value} at index {index}")]
    NegativeWeight { index: usize, value: f64 },
    #[error("non-finite value encountered: {0}")]
    NonFinite(&'static str),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("infeasible starting point: {0}")]
    Infeasible(String),
    #[error("weight vectors have different totals ({0} vs {1})")]
    MismatchedTotals(f64, f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("budget list is not sorted ascending")]
    UnsortedBudgets,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
}

pub type Result<T> = std::result::Result<T, Error>;
