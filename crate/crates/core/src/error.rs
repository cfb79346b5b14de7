use thiserror::Error;

pub type Result<T> = std::result::Result<T, SpcpError>;

#[derive(Debug, Error)]
pub enum SpcpError {
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid observation mask: {0}")]
    InvalidMask(String),
    #[error("observed data is identically zero")]
    ZeroData,
    #[error("svd failed: {0}")]
    Svd(String),
    #[error("no root of the multiplier equation in [{lo}, {hi}] (f(lo)={f_lo:e}, f(hi)={f_hi:e})")]
    RootNotBracketed { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("multiplier search failed: {0}")]
    ThetaSearch(String),
    #[error("iterates diverged at iteration {iteration}: {detail}")]
    Diverged { iteration: usize, detail: String },
    #[error("malformed input: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> SpcpError {
    SpcpError::InvalidArgument(msg.into())
}
