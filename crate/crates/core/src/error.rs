use std::path::PathBuf;

/// Errors raised anywhere in the laboratory.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid grid size {0}: need an even number of points, at least 4")]
    InvalidGridSize(usize),

    #[error("mode ({kx}, {ky}) is not representable on an N={n} grid (need |k| <= {limit})")]
    UnrepresentableMode { kx: i64, ky: i64, n: usize, limit: i64 },

    #[error("grid mismatch: N={left} vs N={right}")]
    GridMismatch { left: usize, right: usize },

    #[error("sample buffer has {got} values, expected {expected}")]
    SampleCount { got: usize, expected: usize },

    #[error("non-finite value in field `{0}`")]
    NonFinite(String),

    #[error("state left the hyperbolic domain: min {field} = {min:e}")]
    OutsideStateSpace { field: &'static str, min: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("solver failed at t = {t}: {source}")]
    Solver {
        t: f64,
        #[source]
        source: Box<LabError>,
    },

    #[error("experiment failed for n = {n}: {source}")]
    Experiment {
        n: u32,
        #[source]
        source: Box<LabError>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn invalid(msg: impl Into<String>) -> LabError {
    LabError::InvalidParameter(msg.into())
}
