use thiserror::Error;

/// Errors produced by the scattering, regularization and learning modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("order {order} exceeds the supported maximum {max}")]
    OrderTooLarge { order: usize, max: usize },

    #[error("invalid obstacle: {0}")]
    InvalidObstacle(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    #[error("series truncation {truncation} too small for kR = {kr:.3}")]
    Truncation { truncation: usize, kr: f64 },

    #[error("singular boundary integral system")]
    SingularSystem,

    #[error("quadrature not converged: relative change {change:.3e} between {coarse} and {fine} points")]
    Quadrature { coarse: usize, fine: usize, change: f64 },

    #[error("SVD did not converge")]
    SvdNotConverged,

    #[error("discrepancy equation has no root (discrepancy at smallest alpha = {at_min:.3e})")]
    NoRoot { at_min: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("invalid archive: {0}")]
    Format(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(expected: impl ToString, got: impl ToString) -> Self {
        Error::Shape {
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }
}
