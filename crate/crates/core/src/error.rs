use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("unknown location {0}")]
    UnknownLocation(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("targets {0} and {1} are coincident")]
    CoincidentTargets(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("covariance matrix is singular even after jitter")]
    SingularCovariance,

    #[error("total priority is zero")]
    ZeroPriority,

    #[error("mutual information needs at least one unsampled location")]
    EmptyComplement,

    #[error("infeasible solution: {0}")]
    Infeasible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
