use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{qubits} qubits exceeds the simulator cap of {cap}")]
    DimensionCap { qubits: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("qubit index {index} out of range for {qubits} qubits")]
    QubitIndex { index: usize, qubits: usize },

    #[error("duplicate qubit index {0}")]
    DuplicateQubit(usize),

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("gate {index} ({label}) rejected: {reason}")]
    NotAdmissible {
        index: usize,
        label: String,
        reason: String,
    },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("bit-string length {actual} does not match kappa = {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("message has {qubits} qubits but the scheme allows at most {max}")]
    TooManyQubits { qubits: usize, max: usize },

    #[error("parameter mismatch between key and ciphertext: {0}")]
    ParamsMismatch(String),

    #[error("register of qubit {0} is already set")]
    RegisterAlreadySet(usize),

    #[error("exact mode infeasible: {0}")]
    Infeasible(String),

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
