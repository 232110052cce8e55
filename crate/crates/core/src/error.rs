use thiserror::Error;

/// Errors raised by the tensor calculus and the verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operation requires dimension {required}, got {n}")]
    UnsupportedDimension { n: usize, required: &'static str },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (relative defect {0:.3e})")]
    NotSymmetric(f64),

    #[error("matrix is not antisymmetric (relative defect {0:.3e})")]
    NotAntisymmetric(f64),

    #[error("metric is not positive definite")]
    NotPositiveDefinite,

    #[error("tensor violates curvature symmetries: {0}")]
    CurvatureSymmetry(String),

    #[error("invalid complex structure: {0}")]
    InvalidComplexStructure(String),

    #[error("metric is not Hermitian for the complex structure (defect {0:.3e})")]
    NotHermitian(f64),

    #[error("orientation frame is degenerate")]
    DegenerateFrame,

    #[error("tensor is not traceless (relative trace {0:.3e})")]
    NotTraceless(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("t = {t} is at the singular value gamma = {gamma}")]
    AtSingularity { t: f64, gamma: f64 },

    #[error("interval [{lo}, {hi}] contains gamma = {gamma}")]
    StraddlesSingularity { lo: f64, hi: f64, gamma: f64 },

    #[error("positivity violated: {0}")]
    Positivity(String),

    #[error("K = {k} inconsistent with 4*eps*q*theta = {expected}")]
    InconsistentK { k: f64, expected: f64 },

    #[error("bisection failed to bracket a root: {0}")]
    Bracketing(String),

    #[error("argument {value} outside the domain {domain}")]
    OutOfDomain { value: f64, domain: &'static str },

    #[error("boundary kinds must both be zero crossings")]
    NonZeroBoundary,
}

pub type Result<T> = std::result::Result<T, Error>;
