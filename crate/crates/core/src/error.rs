use thiserror::Error;

/// Errors raised by the library. Numerical defects that are expected to be
/// inspected (rather than acted upon) are reported inside reports instead.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode count {0} outside the supported range 1..=6")]
    ModeCount(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix of odd dimension {0} has no Pfaffian")]
    OddDimension(usize),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not antisymmetric (defect {0:e})")]
    NotAntisymmetric(f64),
    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("operator is not self-dual (defect {0:e})")]
    NotSelfDual(f64),
    #[error("covariance matrix has operator norm {0} > 1")]
    InvalidCovariance(f64),
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("state has odd parity component (defect {0:e})")]
    OddParity(f64),
    #[error("beam-splitter weight {0} outside [0, 1]")]
    InvalidLambda(f64),
    #[error("negative evolution time {0}")]
    NegativeTime(f64),
    #[error("finite-difference step {0} outside the admissible range")]
    InvalidStep(f64),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is singular")]
    Singular,
    #[error("Majorana index {index} out of range for {n_modes} modes")]
    MajoranaIndex { index: usize, n_modes: usize },
    #[error("generator label is outside the universe: {0}")]
    UnknownLabel(String),
    #[error("Grassmann universes differ ({0} vs {1} modes)")]
    UniverseMismatch(usize, usize),
    #[error("element has a nonzero scalar part; exponential series would not terminate")]
    NotNilpotent,
    #[error("copies must be distinct: {0}")]
    CopyCollision(String),
    #[error("covariance is not block diagonal with respect to the fixed basis projection (defect {0:e})")]
    NotDiagonalized(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
