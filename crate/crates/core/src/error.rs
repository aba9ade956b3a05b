use thiserror::Error;

use crate::elliptic::Transcript;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    /// Faces whose largest angle is within tolerance of pi.
    #[error("degenerate faces (angle >= pi - tol): {faces:?}")]
    Degenerate { faces: Vec<usize> },

    #[error("linear solver did not converge in {iterations} iterations (relative residual {residual:e})")]
    LinearNonConvergence { iterations: usize, residual: f64 },

    #[error("newton iteration did not converge (final residual {:e})", transcript.final_residual())]
    NonConvergence { transcript: Transcript },

    #[error("line search stagnated at residual {:e}", transcript.final_residual())]
    Stagnation { transcript: Transcript },

    #[error("iterate blew up (|log sigma| > {limit})")]
    BlowUp { limit: f64, transcript: Transcript },

    #[error("numeric error: {0}")]
    Numeric(String),

    /// A post-condition that holds by construction was violated.
    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("slice at tau = {tau}: {source}")]
    AtNode { tau: f64, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Solver transcript attached to this error, if any.
    pub fn transcript(&self) -> Option<&Transcript> {
        match self {
            Error::NonConvergence { transcript }
            | Error::Stagnation { transcript }
            | Error::BlowUp { transcript, .. } => Some(transcript),
            Error::AtNode { source, .. } => source.transcript(),
            _ => None,
        }
    }

    /// Strips [`Error::AtNode`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtNode { source, .. } => source.root(),
            other => other,
        }
    }
}
