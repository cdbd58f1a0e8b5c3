use thiserror::Error;

/// Errors raised by the pricing and hedging engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Caller supplied arguments that violate an operation's preconditions.
    #[error("invalid input: {0}")]
    Input(String),

    /// A curve was queried beyond its last pillar with extrapolation disabled.
    #[error("time {t} lies beyond the last curve pillar {last}; extrapolation is disabled")]
    Extrapolation { t: f64, last: f64 },

    /// Root finding, linear algebra or a Monte Carlo estimate broke down.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An optimizer stopped before reaching its tolerance.
    #[error("{what} did not converge after {iterations} iterations (objective {objective:e})")]
    NoConvergence {
        what: String,
        iterations: usize,
        objective: f64,
        best: Vec<f64>,
    },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// True for errors caused by bad inputs rather than numerical breakdown.
    pub fn is_input(&self) -> bool {
        matches!(self, Error::Input(_) | Error::Extrapolation { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
