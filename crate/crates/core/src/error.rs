use thiserror::Error;

/// Errors raised across the circuit, environment, training and analysis layers.
#[derive(Debug, Error)]
pub enum NcpError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("structural mismatch: {0}")]
    Structure(String),

    #[error("invalid circuit spec:\n{}", .0.join("\n"))]
    InvalidSpec(Vec<String>),

    #[error("infeasible request: {0}")]
    Infeasible(String),

    #[error("parameter vector length {got} does not match schema length {expected}")]
    ParamLength { expected: usize, got: usize },

    #[error("parameter file: {0}")]
    ParamFile(String),

    #[error("environment: {0}")]
    Env(String),

    #[error("episode already finished; call reset before stepping again")]
    EpisodeFinished,

    #[error("environment not bundled: {0}")]
    UnknownEnv(String),

    #[error("trace: {0}")]
    Trace(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = NcpError> = std::result::Result<T, E>;
