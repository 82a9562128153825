use thiserror::Error;

/// Errors raised by problem construction, the dual kernel and the strategy drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric: max |M_ij - M_ji| = {asymmetry:e} exceeds {limit:e}")]
    Asymmetric { asymmetry: f64, limit: f64 },

    #[error("measure weight alpha must be strictly positive, got {0}")]
    NonPositiveAlpha(f64),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("no dual seed with lambda_min(G) >= {margin} found along the trace direction")]
    NoFeasibleSigma { margin: f64 },

    #[error("dual seed does not satisfy {0}")]
    SeedNotAdmissible(&'static str),

    #[error("G(sigma) is singular or F(sigma) leaves its column space; the dual stationarity system is ill-posed")]
    SingularDual,

    #[error("barrier search lost the interior of G(sigma) > 0")]
    FeasibleConeLost,

    #[error("invalid dimension {0}: benchmark requires n >= 2")]
    InvalidDimension(usize),

    #[error("unsupported benchmark '{0}'")]
    UnsupportedBenchmark(String),

    #[error("grid over {dims} dimensions requested, at most 2 supported")]
    GridTooLarge { dims: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
