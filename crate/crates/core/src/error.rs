use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("operator is not unitary (max deviation of U†U from I: {max_deviation:e})")]
    NotUnitary { max_deviation: f64 },

    #[error("state is not normalized (norm deviation {deviation:e})")]
    NotNormalized { deviation: f64 },

    #[error("not a physical density matrix: {0}")]
    NotPhysical(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("outcome {outcome} on qubit {qubit} has probability {probability:e}")]
    ZeroProbabilityBranch { qubit: usize, outcome: u8, probability: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("design operator is rank deficient (rank {rank} < {required})")]
    RankDeficient { rank: usize, required: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
