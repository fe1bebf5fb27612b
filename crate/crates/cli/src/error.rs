use degenlab_core::Error as CoreError;
use serde_json::json;
use thiserror::Error;

use crate::config::ConfigErrors;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigErrors),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{0}")]
    CheckFailed(String),

    #[error("{0}")]
    NonConvergence(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot build thread pool: {0}")]
    Threads(String),
}

/// Exit status table, printed by `--help`.
pub const EXIT_CODES: &str = "\
Exit status:
  0  success
  1  a check failed (inequality violations, sweep statistics, report)
  2  usage error
  3  invalid configuration
  4  Newton iteration did not converge
  5  file system error
  6  invalid input, parameters, region or shift
  7  quadrature did not converge
  8  insufficient data for a fit
  9  malformed trajectory or serialization failure
 10  thread pool could not be built";

impl CliError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::CheckFailed(_) => 1,
            CliError::Config(_) => 3,
            CliError::NonConvergence(_) => 4,
            CliError::Io { .. } => 5,
            CliError::Threads(_) => 10,
            CliError::Core(e) => match e {
                CoreError::Configuration(_) | CoreError::UnknownProblem(_) => 3,
                CoreError::NonConvergence { .. } => 4,
                CoreError::Io(_) => 5,
                CoreError::InvalidInput(_)
                | CoreError::InvalidParams(_)
                | CoreError::InvalidRegion(_)
                | CoreError::InvalidShift(_) => 6,
                CoreError::QuadratureFailure { .. } => 7,
                CoreError::InsufficientData(_) => 8,
                CoreError::Serialization(_) => 9,
            },
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::CheckFailed(_) => "check_failed",
            CliError::Config(_) => "configuration",
            CliError::NonConvergence(_) => "nonconvergence",
            CliError::Io { .. } => "io",
            CliError::Threads(_) => "threads",
            CliError::Core(e) => match e {
                CoreError::Configuration(_) | CoreError::UnknownProblem(_) => "configuration",
                CoreError::NonConvergence { .. } => "nonconvergence",
                CoreError::Io(_) => "io",
                CoreError::QuadratureFailure { .. } => "quadrature",
                CoreError::InsufficientData(_) => "insufficient_data",
                CoreError::Serialization(_) => "serialization",
                _ => "invalid_input",
            },
        }
    }

    /// One-line JSON for stderr.
    pub fn summary(&self) -> String {
        let failures = match self {
            CliError::Config(c) => c.0.clone(),
            CliError::Core(CoreError::InvalidParams(v)) => v.clone(),
            other => vec![other.to_string()],
        };
        json!({
            "status": "error",
            "kind": self.kind(),
            "exit_code": self.exit_code(),
            "failures": failures,
        })
        .to_string()
    }
}
