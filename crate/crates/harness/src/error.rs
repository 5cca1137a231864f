use std::process::ExitCode;

use thiserror::Error;

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] spectral_edge::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },

    #[error("plotting failed: {0}")]
    Plot(String),
}

impl HarnessError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }

    /// 2 for anything the caller could have avoided, 1 for numerical trouble.
    pub fn exit_code(&self) -> ExitCode {
        use spectral_edge::Error as E;
        match self {
            Self::Core(
                E::Numerical { .. } | E::SolverFailure { .. } | E::NearSingular { .. } | E::Collision { .. },
            ) => ExitCode::from(1),
            Self::Plot(_) => ExitCode::from(1),
            _ => ExitCode::from(2),
        }
    }
}
