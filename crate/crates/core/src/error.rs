use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("segment {index} is not future causal (g(d,d)/|d|^2 = {ratio:.3e})")]
    NonCausalSegment { index: usize, ratio: f64 },
    #[error("conformal factor is not positive (f = {value:.3e})")]
    NonPositiveConformalFactor { value: f64 },
    #[error("hedlund conditions violated: {0}")]
    ConditionViolated(String),
    #[error("metric is numerically singular (condition number {0:.3e})")]
    SingularMetric(f64),
    #[error("adaptive step fell below the floor at t = {0}")]
    StepUnderflow(f64),
    #[error("no stencil direction is future causal anywhere in the region")]
    EmptyStencil,
    #[error("path has zero parameter length")]
    ZeroLengthPath,
    #[error("path is empty")]
    EmptyPath,
    #[error("cell {0} is not future causal")]
    NonCausalCell(usize),
    #[error("covector is negative on the estimated cone")]
    NotInDualCone,
    #[error("not constructible: {0}")]
    NotConstructible(String),
    #[error("not a crossing configuration: {0}")]
    NotCrossingConfiguration(String),
    #[error("invalid parameter `{key}`: {msg}")]
    InvalidParameter { key: String, msg: String },
    #[error("dimension {0} is not supported here")]
    UnsupportedDimension(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn invalid(key: &str, msg: impl Into<String>) -> Self {
        Error::InvalidParameter {
            key: key.to_string(),
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
