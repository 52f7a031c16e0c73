use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A symmetric factorization failed even after the jitter schedule ran out.
    #[error("factorization of {what} failed (size {size}, mean diagonal {mean_diag:e}, last jitter {jitter:e})")]
    Factorization {
        what: &'static str,
        size: usize,
        mean_diag: f64,
        jitter: f64,
    },

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True when the error stems from numerics rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Factorization { .. })
    }
}

pub(crate) fn check_dim(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { context, expected, got });
    }
    Ok(())
}
