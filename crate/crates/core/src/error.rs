use thiserror::Error;

/// Errors raised by the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("malformed complex vector: {0} real coordinates (need an even count >= 2)")]
    MalformedVector(usize),

    #[error("division by a jet with zero value")]
    DivisionByZero,

    #[error("domain violation in {function}: argument {value}")]
    Domain { function: &'static str, value: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("parameter outside the domain of {kind}: {detail}")]
    OutsideDomain { kind: &'static str, detail: String },

    #[error("evaluation on the singular locus of {kind}")]
    SingularLocus { kind: &'static str },

    #[error("degenerate induced metric (det g = {det:e})")]
    DegenerateMetric { det: f64 },

    #[error("frame is not Lagrangian: |dz(e)| = {modulus}")]
    NotLagrangian { modulus: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),

    #[error("ragged rows: row {row} has {found} fields, header has {expected}")]
    RaggedRow { row: usize, expected: usize, found: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
