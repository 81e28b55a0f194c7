use thiserror::Error;

/// Errors raised by the engines, analytics and MIDI conversion.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A caller broke an operation's preconditions (dimension mismatch, index out of range).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("capacity exceeded: {held} distinct notes, capacity {capacity}")]
    Capacity { held: usize, capacity: usize },

    /// The reservoir produced a non-finite value; the session must be reset.
    #[error("engine fault: {0}")]
    Fault(String),
}

impl Error {
    /// Short machine-readable code used in telemetry error frames.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "invalid_config",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Contract(_) => "contract",
            Error::Capacity { .. } => "capacity",
            Error::Fault(_) => "engine_fault",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
