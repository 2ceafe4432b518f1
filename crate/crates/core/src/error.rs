use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("branch domains {0} and {1} overlap")]
    OverlappingDomains(usize, usize),

    #[error("branch {branch} is not monotone near x = {x}")]
    NonMonotone { branch: usize, x: f64 },

    #[error("branch {branch} is not expanding at x = {x} (|f'| = {derivative})")]
    NotExpanding { branch: usize, x: f64, derivative: f64 },

    #[error("expression error: {0}")]
    Expression(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dual norm did not reach the requested gap (lower bound {lower}, upper bound {upper})")]
    LpNonConvergence { lower: f64, upper: f64 },

    #[error("QR iteration did not converge after {0} iterations")]
    EigenNonConvergence(usize),

    #[error("leading eigenvalue {re}{im:+}i is not real and positive")]
    LeadingEigenvalueNotPositive { re: f64, im: f64 },

    #[error("invariant density has a negative cell value {0}")]
    NegativeDensity(f64),

    #[error("matrix of size {n} exceeds the dense eigen limit {limit}")]
    DenseLimit { n: usize, limit: usize },

    #[error("branch truncation N = {truncation} leaves coverage defect {defect} above {threshold}")]
    InsufficientTruncation {
        truncation: usize,
        defect: f64,
        threshold: f64,
    },

    #[error("alpha = {alpha} is not admissible: violates {violated}")]
    NotAdmissible { alpha: f64, violated: String },

    #[error("matrix assembly needs a real-valued weight")]
    ComplexWeight,

    #[error("quadrature node {x} falls outside branch domain [{lo}, {hi}]")]
    QuadratureOutsideDomain { x: f64, lo: f64, hi: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
