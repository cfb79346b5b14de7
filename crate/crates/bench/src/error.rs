use admip::SpcpError;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("config: {0}")]
    Config(String),
    #[error("solver diverged: {0}")]
    Divergence(SpcpError),
    #[error("solver: {0}")]
    Solver(SpcpError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, BenchError>;

impl From<SpcpError> for BenchError {
    fn from(e: SpcpError) -> Self {
        match e {
            SpcpError::Diverged { .. } => Self::Divergence(e),
            SpcpError::Io(io) => Self::Io(io),
            SpcpError::InvalidArgument(msg) => Self::Config(msg),
            other => Self::Solver(other),
        }
    }
}

impl BenchError {
    /// 0 ok, 1 config, 2 divergence, 3 i/o. Other solver failures share 2.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 1,
            Self::Divergence(_) | Self::Solver(_) => 2,
            Self::Io(_) | Self::Csv(_) => 3,
        }
    }
}

pub(crate) fn config_err(msg: impl Into<String>) -> BenchError {
    BenchError::Config(msg.into())
}
