use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),

    #[error("invalid tableau: {0}")]
    InvalidTableau(String),

    #[error("tableau is not explicit: a[{stage}][{col}] of part {part} is nonzero")]
    NotExplicit { part: usize, stage: usize, col: usize },

    #[error("order conditions are only available for p in 1..=3, got {0}")]
    UnsupportedOrder(usize),

    #[error("tableau parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("tableau has {tableau} parts but the decomposition has {split}")]
    PartCountMismatch { tableau: usize, split: usize },

    #[error("grid too small: need at least {min} cells, got {got}")]
    GridTooSmall { min: usize, got: usize },

    #[error("integration diverged at step {step}")]
    Diverged { step: usize },

    #[error("reference integration did not reach tolerance {tol:e} after {halvings} halvings (last change {change:e})")]
    ReferenceNotConverged { tol: f64, halvings: usize, change: f64 },

    #[error("operation requires {expected} operator parts, got {got}")]
    WrongPartCount { expected: usize, got: usize },

    #[error("matrix is singular to working precision")]
    Singular,

    #[error("condition number {cond:e} exceeds the limit {limit:e}")]
    IllConditioned { cond: f64, limit: f64 },

    #[error("coefficient matrices A_k are not all equal")]
    UnequalCoefficientMatrices,

    #[error("at least two resolutions are needed to estimate an order")]
    TooFewPoints,

    #[error("invalid partition spec `{spec}`: {msg}")]
    PartitionSpec { spec: String, msg: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
