use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library. Shape mismatches inside the numeric kernels
/// are programming errors and panic instead.
#[derive(Debug, Error)]
pub enum Error {
    #[error("curvature must be positive and finite, got beta = {0}")]
    InvalidCurvature(f64),

    #[error("point is off the hyperboloid: <x,x>_L + beta = {residual:e}")]
    OffManifold { residual: f64 },

    #[error("tangent vector at the origin must have a zero first coordinate, got {0}")]
    NotTangent(f64),

    #[error("point lies on or outside the Poincare ball boundary (alpha*|y|^2 = {0})")]
    OutsideBall(f64),

    #[error("negative Lorentzian self-product {0}; use the modulus norm")]
    NegativeNorm(f64),

    #[error("non-finite input")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("unsupported activation `{0}` (supported: relu, leaky_relu:<k>)")]
    UnsupportedActivation(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
