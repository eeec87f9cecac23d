use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Every SNR handed to the MRC weighting was zero, so the weights are 0/0.
    #[error("degenerate MRC weights: all instantaneous SNRs are zero")]
    DegenerateWeights,

    #[error("history warm-up incomplete: {have} of {need} events stored")]
    WarmupIncomplete { have: usize, need: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    /// Iterative numerics (quadrature, continued fractions) failed to converge.
    #[error("numeric failure in {routine}: {detail}")]
    Numeric { routine: &'static str, detail: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures caused by bad inputs rather than numerics.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Numeric { .. })
    }
}
