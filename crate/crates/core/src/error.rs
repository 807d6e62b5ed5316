use thiserror::Error;

/// Errors raised by the simulation core.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside the range where the operation is defined.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A state vector lies outside the state space.
    #[error("state outside the domain: {0}")]
    Domain(String),

    /// The time step violates the biomass positivity condition.
    #[error("time step {dt} violates the positivity condition (slack {slack})")]
    TimeStep { dt: f64, slack: f64 },

    /// Malformed configuration or data file.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// The individual-based chain exceeded its event budget.
    #[error("event budget of {limit} exceeded at t = {time}")]
    EventBudget { limit: u64, time: f64 },

    /// An estimate could not be formed (e.g. every path was excluded).
    #[error("undefined estimate: {0}")]
    Undefined(String),

    /// Failure of a single ensemble member.
    #[error("path {index}: {source}")]
    Path {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
