use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid probe configuration: {0}")]
    InvalidProbe(String),

    /// Support of W⁽¹⁾ leaks outside the support of W⁽⁰⁾.
    #[error("inconsistent risk moments: W1 has weight {leak:.3e} outside the support of W0")]
    InconsistentMoments { leak: f64 },

    #[error("estimate {value} lies outside the admissible range [0, pi/2]")]
    EstimateOutOfRange { value: f64 },

    #[error("outcome probabilities sum to {sum} (expected 1)")]
    ProbabilityMismatch { sum: f64 },

    #[error("strategy classification failed: {0}")]
    Classification(String),

    #[error("report parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures that signal a numerical inconsistency rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::InconsistentMoments { .. }
                | Error::EstimateOutOfRange { .. }
                | Error::ProbabilityMismatch { .. }
                | Error::Classification(_)
        )
    }
}
