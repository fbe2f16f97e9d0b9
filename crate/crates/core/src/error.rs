use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("input length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    /// A closed form was requested at a frequency where it does not exist.
    #[error("excluded frequency pair (weight freq {weight_freq}, input freq {input_freq}): {reason}")]
    ExcludedFrequency {
        weight_freq: f64,
        input_freq: f64,
        reason: &'static str,
    },

    /// Iterates left every bounded set: the map is not contracting here.
    #[error("iteration diverged at step {iteration} (sup|U| = {norm:e})")]
    Diverged { iteration: usize, norm: f64 },

    /// The frozen-coefficient linear system is numerically singular, which
    /// happens close to an eigenfield of the layer.
    #[error("linear system is near-singular (condition estimate {condition:e})")]
    NearSingular { condition: f64 },

    #[error("singular matrix at pivot {pivot}")]
    Singular { pivot: usize },

    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    NewtonNotConverged { iterations: usize, residual: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
