use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("did not converge: {0}")]
    NotConverged(String),

    #[error("bond dimension overflow at t = {t}: discarded weight {discarded:.3e} with chi = {chi}")]
    ChiOverflow { t: f64, discarded: f64, chi: usize },

    #[error("system too large for exact treatment: {n} sites (cap {cap})")]
    TooLarge { n: usize, cap: usize },

    #[error("no light-cone front found: {0}")]
    NoFront(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("schema version mismatch in {file}: found {found}, expected {expected}")]
    Schema {
        file: String,
        found: String,
        expected: String,
    },

    #[error("resource cap exceeded: {0}")]
    Resource(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

impl From<ndarray::ShapeError> for Error {
    fn from(e: ndarray::ShapeError) -> Self {
        Error::DimensionMismatch(e.to_string())
    }
}

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be finite, got {value}")))
    }
}
