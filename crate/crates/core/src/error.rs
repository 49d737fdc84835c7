use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("order {order} outside supported range |order| <= {cap}")]
    OrderOutOfRange { order: i64, cap: i64 },

    #[error("resonance: {0}")]
    Resonance(String),

    #[error("frequency {omega} outside tabulated range [{lo}, {hi}]")]
    Extrapolation { omega: f64, lo: f64, hi: f64 },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("step size: {0}")]
    StepSize(String),

    #[error("divergent: {0}")]
    Divergent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
