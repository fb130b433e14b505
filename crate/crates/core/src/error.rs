use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QestError {
    #[error("non-finite matrix entry")]
    NonFinite,

    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    NotPd { min_eigenvalue: f64 },

    #[error("singular matrix: {0}")]
    Singular(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix outside supported structure for TrAbs (neither symmetric nor traceless/singular)")]
    UnsupportedStructure,

    #[error("invalid model parameters: {0}")]
    InvalidTheta(String),

    #[error("parameter count must be 2 or 3, got {0}")]
    InvalidParamCount(usize),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("outcome '{label}' has vanishing probability but nonzero gradient")]
    SingularModel { label: String },

    #[error("infeasible MSE: v33 = {v33} must exceed g33 = {g33}")]
    InfeasibleMse { v33: f64, g33: f64 },

    #[error("measurement Fisher information is rank deficient")]
    RankDeficientMeasurement,

    #[error("optimizer did not converge: {0}")]
    NoConvergence(String),

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, QestError>;
