use thiserror::Error;

/// Errors raised by policy computation and simulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A policy artifact failed its structural invariants.
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    /// The policy cannot be executed against the requested process model.
    #[error("policy `{policy}` is not compatible with the {model} model")]
    IncompatiblePolicy { policy: String, model: String },

    /// A series did not reach its truncation tolerance within the term cap.
    #[error("series `{series}` did not converge within {max_terms} terms (last term {last_term:e})")]
    SeriesNonConvergence {
        series: &'static str,
        max_terms: usize,
        last_term: f64,
    },

    /// The one-dimensional optimizer could not isolate a minimum.
    #[error("optimizer failed on bracket [{lo}, {hi}]: {reason}")]
    Optimizer { lo: f64, hi: f64, reason: String },

    /// The parabolic solver produced non-finite or exploding values.
    #[error("PDE solve unstable on a {m_time}x{n_x} grid (delta {delta}); try more time steps")]
    PdeInstability { m_time: usize, n_x: usize, delta: f64 },

    /// The transition kernel loses probability mass inside the continuation region.
    #[error("transition kernel leaks {leak:e} of its mass at x = {x}; increase x_half_width")]
    KernelLeakage { leak: f64, x: f64 },

    /// A grid is too coarse for the quantity being resolved.
    #[error("grid inadequate: {0}")]
    Grid(String),
}

pub type Result<T> = std::result::Result<T, SamplingError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(SamplingError::InvalidArgument(msg.into()))
}
