use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("indeterminate form: (+inf) + (-inf)")]
    IndeterminateForm,

    #[error("scale factor must be a finite positive real, got {0}")]
    ScaleNotPositive(f64),

    #[error("finite value constructed from NaN")]
    NanValue,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("grid function is identically +inf")]
    AllInfinite,

    #[error("basepoint outside the domain of the function")]
    BasepointOutsideDomain,

    #[error("scaling has no strictly positive value on the probe set")]
    EmptyPositiveSet,

    #[error("oracle route requires a grid and none was supplied")]
    GridRequired,

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("conjugate unavailable: no analytic form and no grid supplied")]
    UnknownConjugate,

    #[error("gamma out of range: need gamma in (1/p, 1], got gamma={gamma}, p={p}")]
    GammaOutOfRange { gamma: f64, p: f64 },

    #[error("invalid grid spec: {0}")]
    InvalidGridSpec(String),

    #[error("config error: {0}")]
    ConfigParse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
