use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("register size {0} outside supported range 1..={max}", max = crate::qstate::MAX_QUBITS)]
    RegisterSize(usize),

    #[error("qubit {qubit} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("control and target are both qubit {0}")]
    SameQubit(usize),

    #[error("gate is not unitary (deviation {0:e})")]
    NonUnitary(f64),

    #[error("state is not normalized (squared norm {0})")]
    Normalization(f64),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("non-finite value for {0}")]
    NonFinite(&'static str),

    #[error("coupling map is disconnected; unreachable from root: {0:?}")]
    Disconnected(Vec<usize>),

    #[error("invalid edge {0}-{1}")]
    InvalidEdge(usize, usize),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("no calibration for {0}")]
    MissingCalibration(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
