use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
    #[error("degenerate scene: {0}")]
    DegenerateScene(String),
    #[error("degenerate arc: {0}")]
    DegenerateArc(String),
    #[error("solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    SolverDivergence { iterations: usize, residual: f64 },
    #[error("radius {r}: only {successes} successes (need at least {needed}); use fewer radii or more trials")]
    InsufficientSuccesses { r: f64, successes: u64, needed: u64 },
    #[error("singular fit: {0}")]
    SingularFit(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("event is not monotone decreasing: {0}")]
    MonotonicityViolation(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
