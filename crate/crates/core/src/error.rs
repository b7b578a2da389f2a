use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature error: {0}")]
    Quadrature(String),
    #[error("boundary error: {0}")]
    Boundary(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("support error: {0}")]
    Support(String),
    #[error("exponent error: {0}")]
    Exponent(String),
    #[error("regime error: {0}")]
    Regime(String),
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("degenerate jacobian: {0}")]
    DegenerateJacobian(String),
    #[error("infeasible config: {0}")]
    InfeasibleConfig(String),
    #[error("config parse error: {0}")]
    ConfigParse(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
