use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of the model.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("optimization failed after {restarts} restarts (best cost {best_cost:.3e})")]
    OptimizationFailed { restarts: usize, best_cost: f64 },

    #[error("config parse error: {0}")]
    ConfigParse(String),

    /// Every violated invariant, one entry each.
    #[error("invalid config: {}", .0.join("; "))]
    ConfigInvalid(Vec<String>),

    #[error("empty table, nothing written to {}", .0.display())]
    EmptyTable(PathBuf),

    #[error("I/O error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the batch front-end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigParse(_) | Error::ConfigInvalid(_) => 2,
            Error::Domain(_)
            | Error::Quadrature(_)
            | Error::Degenerate(_)
            | Error::OptimizationFailed { .. } => 3,
            Error::EmptyTable(_) | Error::Io { .. } => 4,
        }
    }

    /// Short machine-readable tag used in error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Quadrature(_) => "quadrature",
            Error::Degenerate(_) => "degenerate",
            Error::OptimizationFailed { .. } => "optimization",
            Error::ConfigParse(_) => "config_parse",
            Error::ConfigInvalid(_) => "config_invalid",
            Error::EmptyTable(_) => "empty_table",
            Error::Io { .. } => "io",
        }
    }
}
