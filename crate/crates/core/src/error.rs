use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("register of {0} qubits exceeds the supported maximum of {max}", max = crate::qlinalg::MAX_QUBITS)]
    TooManyQubits(usize),

    #[error("branch has zero probability; its state is undefined")]
    EmptyBranch,

    #[error("unsupported in this execution mode: {0}")]
    UnsupportedMode(String),

    #[error("outcome {0} has no correction unitary")]
    NoCorrection(String),

    #[error("circuit parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
