use thiserror::Error;

/// Errors raised by the numerical kernels and drivers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The requested problem is structurally ill-posed (e.g. k >= n/2).
    #[error("rejected: {0}")]
    Rejected(String),

    /// A candidate domain failed its admissibility certificate.
    #[error("inadmissible domain: {reason} (worst theta = {worst_theta:.6}, margin = {margin:.3e})")]
    Inadmissible {
        reason: String,
        worst_theta: f64,
        margin: f64,
    },

    /// An iterative solve did not reach its tolerance.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e}): {detail}")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        detail: String,
        history: Vec<f64>,
    },

    /// A continuation stage failed.
    #[error("continuation stage {stage} failed: {source}")]
    Stage {
        stage: usize,
        #[source]
        source: Box<Error>,
    },

    /// Malformed textual input.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
