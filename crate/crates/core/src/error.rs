use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArcError {
    #[error("sampler failed: {0}")]
    Sampler(String),

    #[error("curve evaluation escaped the space at grid index {index}")]
    CurveEscaped { index: usize },

    #[error("point escaped the space after {steps_completed} completed steps: {detail}")]
    PointEscaped {
        steps_completed: usize,
        detail: String,
    },

    #[error("arc fields live on different spaces: `{left}` vs `{right}`")]
    SpaceMismatch { left: String, right: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no convergence within n_max = {n_max}; last Richardson estimate {last_estimate:e}")]
    NoConvergence { n_max: usize, last_estimate: f64 },

    #[error("sampled surface is degenerate: {0}")]
    SurfaceDegenerate(String),

    #[error("e^(x^2) weight overflows on the support of the target near x = {at}")]
    WeightOverflow { at: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at `{token}`: {message}")]
    Parse { token: String, message: String },
}

impl ArcError {
    pub(crate) fn escaped(detail: impl Into<String>) -> Self {
        ArcError::PointEscaped {
            steps_completed: 0,
            detail: detail.into(),
        }
    }
}

pub type Result<T, E = ArcError> = std::result::Result<T, E>;
