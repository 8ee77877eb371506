use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty vector")]
    Empty,
    #[error("invalid scalar {0:?}")]
    Parse(String),
    #[error("not normalized: total weight {total} deviates from 1 by more than {tolerance}")]
    NotNormalized { total: f64, tolerance: f64 },
    #[error("negative entry {value} at index {index}")]
    Negative { index: usize, value: f64 },
    #[error("index k={k} out of range [1, {n}]")]
    IndexOutOfRange { k: usize, n: usize },
    #[error("tensor power must be at least 1")]
    ZeroPower,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("matrix is not Hermitian within tolerance")]
    NotHermitian,
    #[error("matrix is not positive semidefinite: eigenvalue {0}")]
    NotPositive(f64),
    #[error("matrix is not unitary within tolerance")]
    NotUnitary,
    #[error("measurement operators violate completeness (deviation {0})")]
    Incomplete(f64),
    #[error("measurement has no operators")]
    NoOperators,
    #[error("infeasible conversion: target has {target_rank} nonzero Schmidt coefficients, source only {source_rank}")]
    Infeasible { source_rank: usize, target_rank: usize },
    #[error("source is not majorized by the requested target")]
    NotMajorized,
    #[error("plan has zero success probability")]
    DegeneratePlan,
    #[error("branch cap {0} exceeded")]
    BranchCapExceeded(usize),
    #[error("invalid protocol: {0}")]
    Protocol(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("invalid descriptor: {0}")]
    Descriptor(String),
}
