use thiserror::Error;

/// Errors raised by the algebra, the engines, and the file format.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("incompatible contexts")]
    IncompatibleContexts,

    #[error("variable not in table")]
    VariableNotInTable,

    #[error("context does not determine table")]
    ContextDoesNotDetermineTable,

    #[error("split on assigned variable")]
    SplitOnAssignedVariable,

    #[error("evidence has probability zero")]
    ZeroProbabilityEvidence,

    #[error("unknown variable '{0}'")]
    UnknownVariable(String),

    #[error("unknown value '{value}' for variable '{variable}'")]
    UnknownValue { variable: String, value: String },

    #[error("duplicate {what} '{name}'")]
    Duplicate { what: &'static str, name: String },

    #[error("table shape mismatch: expected {expected} entries, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("invalid table value {0}")]
    InvalidValue(f64),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("network failed validation: {}", .0.join("; "))]
    Invalid(Vec<String>),

    #[error("state space of {size} exceeds cap {cap}")]
    StateSpaceTooLarge { size: u128, cap: u128 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
