use thiserror::Error;

/// Errors surfaced by the numerical pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A bracketed root search failed to converge. This signals an internal
    /// bug for valid inputs (the branches are smooth and strictly monotone).
    #[error("root finder failed to converge: {0}")]
    RootFinding(String),

    /// An iterative solver hit its iteration cap before meeting tolerance.
    #[error("solver did not converge: {context} (residual {residual:.3e} after {iterations} iterations)")]
    NonConvergence {
        context: String,
        residual: f64,
        iterations: usize,
    },

    /// A least-squares fit was requested on a window too small or degenerate.
    #[error("ill-conditioned fit: {0}")]
    IllConditionedFit(String),

    /// Invalid run configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
