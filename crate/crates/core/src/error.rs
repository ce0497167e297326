use thiserror::Error;

/// Errors raised by tree construction, spectral computations and boundary partitions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("edge list is not a tree: {0}")]
    NotATree(String),
    #[error("tree has {0} vertices; at least 3 are required so the interior is nonempty")]
    TooSmall(usize),
    #[error("malformed edge list: {0}")]
    Malformed(String),
    #[error("vertex {0} is out of range")]
    BadVertex(usize),
    #[error("vertex sequence is not a path of the tree")]
    NotAPath,
    #[error("vertex set is not a connected subtree")]
    NotConnected,
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("function is identically zero")]
    ZeroFunction,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("test function is not orthogonal to the boundary indicator (boundary sum {0:e})")]
    NotOrthogonalToBoundaryIndicator(f64),
    #[error("k = {k} is outside the admissible range [{lo}, {hi}]")]
    InfeasibleK { k: usize, lo: usize, hi: usize },
    #[error("part {0} holds a single boundary vertex and cannot be split two ways")]
    PartTooSmall(usize),
    #[error("linear system for the diameter test function has trivial null space")]
    DegenerateSystem,
    #[error("bad generator parameters: {0}")]
    BadParams(String),
    #[error("no middle attachment of the requested size attains lambda_2 = 2/L")]
    NoExtremalShapeFound,
    #[error("degree cap {0} is infeasible (must be at least 2)")]
    InfeasibleDegreeCap(usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
