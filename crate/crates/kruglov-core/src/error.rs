use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid step function: {0}")]
    InvalidStep(String),

    #[error("invalid distribution: {0}")]
    InvalidLaw(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A norm was requested for a function the space cannot accept,
    /// e.g. support measure above 1 for a space on `[0,1]`.
    #[error("function not admissible for this space: {0}")]
    NotAdmissible(String),

    #[error("bracketing failed: {0}")]
    Bracket(String),

    #[error("atom budget exceeded: needed {needed}, budget {budget}")]
    Budget { needed: usize, budget: usize },

    /// An operation required a structural property (symmetry, zero mean,
    /// bounded total support) the ensemble does not have.
    #[error("ensemble does not satisfy required property: {0}")]
    FlagMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),
}
