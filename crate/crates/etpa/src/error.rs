use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Domain(String),

    #[error("quadrature did not converge{context}: estimate {estimate:e}, error bound {error:e}")]
    Convergence {
        estimate: f64,
        error: f64,
        context: String,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("mode sum not converged at order {order} (cap {cap}){context}")]
    Truncation {
        order: usize,
        cap: usize,
        context: String,
    },

    #[error("ratio undefined: uncorrelated probability is zero")]
    UndefinedRatio,

    #[error("scan failed: {0}")]
    Scan(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    /// Prefix a convergence or truncation error with extra context.
    pub fn with_context(self, what: &str) -> Self {
        match self {
            Error::Convergence {
                estimate,
                error,
                context,
            } => Error::Convergence {
                estimate,
                error,
                context: format!(" ({what}){context}"),
            },
            Error::Truncation {
                order,
                cap,
                context,
            } => Error::Truncation {
                order,
                cap,
                context: format!(" ({what}){context}"),
            },
            other => other,
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Convergence { .. } | Error::Truncation { .. } | Error::UndefinedRatio | Error::Scan(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require(cond: bool, what: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Domain(what()))
    }
}
