use thiserror::Error;

/// Errors raised anywhere in the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    #[error("quadrature did not converge after {subdivisions} subdivisions (estimate {estimate:e}, error {abs_error:e})")]
    QuadratureFailure {
        subdivisions: usize,
        estimate: f64,
        abs_error: f64,
    },

    #[error("newton iteration did not converge{}: {iterations} iterations, residual {residual:e}", step_suffix(.step))]
    NonConvergence {
        step: Option<usize>,
        iterations: usize,
        residual: f64,
    },

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid shift: {0}")]
    InvalidShift(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unknown problem '{0}' (catalog: heat_sine, linear_drift, cone, mms_smooth)")]
    UnknownProblem(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("serialization error: {0}")]
    Serialization(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn step_suffix(step: &Option<usize>) -> String {
    match step {
        Some(k) => format!(" at time step {k}"),
        None => String::new(),
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
