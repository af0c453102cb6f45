use thiserror::Error;

/// Errors produced by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("argument must be non-negative, got {0}")]
    NegativeInput(f64),

    #[error("matrix is singular to working precision (pivot {pivot:e} in column {column})")]
    SingularMatrix { pivot: f64, column: usize },

    #[error("{method} did not converge after {iterations} iterations")]
    NonConvergence {
        method: &'static str,
        iterations: usize,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("inadmissible initial history: {0}")]
    InadmissibleHistory(String),

    #[error("step size {dt} exceeds the limit {limit} (a tenth of the smallest delay)")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("state component {patch} became {value:e} at t = {time} (integration blow-up)")]
    Negativity { patch: usize, value: f64, time: f64 },

    #[error("non-finite state at t = {time}")]
    NonFinite { time: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
