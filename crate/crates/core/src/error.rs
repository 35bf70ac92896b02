use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension {0} not supported (expected 1, 2 or 3)")]
    Dimension(usize),
    #[error("side length {0} not supported (expected at least 2)")]
    SideLength(usize),
    #[error("invalid distribution parameters: {0}")]
    Distribution(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("{what} has {size} sites, above the enumeration cap of {cap}")]
    SizeCap {
        what: &'static str,
        size: usize,
        cap: usize,
    },
    #[error("inverse temperature must be positive and finite, got {0}")]
    Beta(f64),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("checkpoint decode failed: {0}")]
    Checkpoint(String),
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::Beta(beta))
    }
}
