use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("arithmetic overflow in bound computation")]
    Overflow,

    #[error("undeclared state `{0}`")]
    UndeclaredState(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("transition {index} is not immediate-observation")]
    NotImmediateObservation { index: usize },

    #[error("protocol declares no input states")]
    NoInputs,

    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("seed configurations have mixed totals ({0} and {1})")]
    MixedTotals(u64, u64),

    #[error("resource limit exceeded: {what} > {limit}")]
    ResourceLimit { what: &'static str, limit: usize },

    #[error("invalid Turing machine: {0}")]
    InvalidMachine(String),

    #[error("{line}:{col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            col,
            msg: msg.into(),
        }
    }
}

impl Error {
    /// Short stable identifier for scripts.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Overflow => "overflow",
            Error::UndeclaredState(_) => "undeclared_state",
            Error::UnknownVariable(_) => "unknown_variable",
            Error::NotImmediateObservation { .. } => "not_immediate_observation",
            Error::NoInputs => "no_inputs",
            Error::InvalidProtocol(_) => "invalid_protocol",
            Error::InvalidConfiguration(_) => "invalid_configuration",
            Error::MixedTotals(..) => "mixed_totals",
            Error::ResourceLimit { .. } => "resource_limit",
            Error::InvalidMachine(_) => "invalid_machine",
            Error::Parse { .. } => "parse",
        }
    }
}
