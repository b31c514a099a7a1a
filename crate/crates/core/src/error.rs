use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invalid case: {0}")]
    Validation(String),

    #[error("control element {index} out of bounds: {message}")]
    OutOfBounds { index: usize, message: String },

    #[error("control vector has {got} elements, expected {expected}")]
    Dimension { expected: usize, got: usize },

    #[error("branch {branch} has zero series impedance")]
    ZeroImpedance { branch: usize },

    #[error("power flow did not converge")]
    NotConverged,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown bundled case `{0}` (available: ieee30, ieee118)")]
    UnknownCase(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
