use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("side length must be even and at least 2, got {0}")]
    OddSize(usize),

    #[error("input contains non-finite values")]
    NonFinite,

    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        actual: Vec<usize>,
    },

    #[error("brute-force oracle limited to n <= {max}, got {n}")]
    OracleTooLarge { n: usize, max: usize },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("plane distance |rho| = {rho} must be below the source distance {so}")]
    BeyondSource { rho: f64, so: f64 },

    #[error("source lies inside the object")]
    SourceInsideObject,

    #[error("oracle shadow filling requires a reference Radon space")]
    MissingOracle,

    #[error("region statistics are degenerate (both variances are zero)")]
    DegenerateRegions,

    #[error("image side {side} is smaller than the {window}-pixel window")]
    WindowTooLarge { side: usize, window: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed header: {source}")]
    Header {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
