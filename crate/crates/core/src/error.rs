use thiserror::Error;

/// Errors raised by the smoothing library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite input component at index {0}")]
    NonFinite(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("symmetric eigensolver did not converge after {sweeps} sweeps")]
    EigenNonConvergence { sweeps: usize },

    #[error("{what} did not converge within {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("degenerate sampling: {0}")]
    DegenerateSampling(String),

    #[error("containment spot-check failed: {0}")]
    ContainmentCheck(String),

    #[error("nonconvexity detected: {0}")]
    NonConvex(String),

    #[error("bisection failed: {0}")]
    Bisection(String),
}

impl Error {
    /// True for errors caused by bad caller input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::NonFinite(_)
                | Error::InvalidParameter(_)
                | Error::Unsupported(_)
                | Error::ContainmentCheck(_)
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Checks length and finiteness of an input vector.
pub(crate) fn check_input(x: &[f64], expected: usize) -> Result<()> {
    if x.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: x.len(),
        });
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    Ok(())
}

pub(crate) fn check_positive(name: &str, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::invalid(format!("{name} must be positive and finite, got {value}")));
    }
    Ok(())
}
