//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HeisError {
    #[error("dimension mismatch: expected n = {expected}, got n = {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("horizontal direction index {dir} out of range for n = {n} (valid 0..{})", 2 * n)]
    InvalidDirection { dir: usize, n: usize },

    #[error("finite-difference step must be positive, got {0}")]
    NonpositiveStep(f64),

    #[error("time grid must be strictly increasing{}", if *from_zero { " from 0" } else { "" })]
    BadGrid { from_zero: bool },

    #[error("series length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("planar path carries no increments")]
    MissingIncrements,

    #[error("planar path values must start at the zero vector")]
    NonzeroStart,

    #[error("clock argument s = {s} outside [0, {max}]")]
    ClockOutOfRange { s: f64, max: f64 },

    #[error("clock integrand {value:.3e} below positivity floor at step {step}; sigma is not strictly increasing")]
    ClockNotIncreasing { step: usize, value: f64 },

    #[error("point is off the sphere: |dist - radius| = {deviation:.3e} exceeds {tol:.3e}")]
    NotOnSphere { deviation: f64, tol: f64 },

    #[error("walker did not exit within {max_steps} steps")]
    NoExit { max_steps: usize },

    #[error("{discarded} of {total} walkers exceeded the step budget (allowed fraction {budget})")]
    DiscardBudgetExceeded {
        discarded: usize,
        total: usize,
        budget: f64,
    },

    #[error("invalid catalog map: {0}")]
    InvalidCatalog(String),

    #[error("cannot parse map id {0:?}: {1}")]
    BadMapId(String, String),

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("s-grid is not uniform (max deviation {0:.3e})")]
    NonUniformGrid(f64),

    #[error("quadrature failed to converge: {0}")]
    QuadratureFailure(String),
}

pub type Result<T> = std::result::Result<T, HeisError>;
