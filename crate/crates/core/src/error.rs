use thiserror::Error;

/// Errors raised by the operators, solvers, and checks in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FracError {
    #[error("fractional order must lie in (0, 1], got {0}")]
    InvalidOrder(f64),

    #[error("order alpha = 1 selects the classical derivative; {0} is undefined there")]
    ClassicalOrder(&'static str),

    #[error("{what} has a pole at {at}")]
    Pole { what: &'static str, at: f64 },

    #[error("argument {value} is outside the domain of {what}")]
    Domain { what: &'static str, value: f64 },

    #[error("power kernel is singular at s = t")]
    Singularity,

    #[error("{what} did not converge within {limit} iterations")]
    NonConvergence { what: &'static str, limit: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("sandwich chain violated: {0}")]
    OrderingViolation(String),

    #[error("contraction condition fails: |(alpha - 1) C1(alpha) c0| = {0} >= 1")]
    ContractionViolated(f64),

    #[error("grid function: {0}")]
    Grid(String),
}

pub type Result<T> = std::result::Result<T, FracError>;

pub(crate) fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(FracError::InvalidConfig(msg()))
    }
}
