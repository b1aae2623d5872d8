use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cutoff mismatch: {left} vs {right}")]
    CutoffMismatch { left: usize, right: usize },

    #[error("cutoff {cutoff} too small: truncated tail mass {mass:.3e} exceeds {limit:.1e}")]
    TailMass { mass: f64, cutoff: usize, limit: f64 },

    #[error("Hermite polynomial overflow at index {index}")]
    HermiteOverflow { index: usize },

    #[error("squeezing r = {r:e} below closed-form threshold; use the oracle pipeline")]
    SingularSqueezing { r: f64 },

    #[error("state is not normalized (squared norm {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("zero vector cannot be normalized")]
    ZeroVector,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge on [{lo}, {hi}]: node doubling changed result by {diff:.3e}")]
    QuadratureNotConverged { lo: f64, hi: f64, diff: f64 },

    #[error("squeeze operator truncation quality failure: {0}")]
    Truncation(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// Failures caused by numerics (truncation, overflow, quadrature) rather
    /// than by invalid input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::TailMass { .. }
                | Error::HermiteOverflow { .. }
                | Error::QuadratureNotConverged { .. }
                | Error::Truncation(_)
                | Error::ZeroVector
        )
    }
}
