use std::fmt;

/// CLI failures carrying their process exit code.
///
/// 2 usage, 3 validation, 4 theorem-hypothesis failure, 5 non-convergence,
/// 6 I/O.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(String),
    Hypothesis(String),
    NonConvergence(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Hypothesis(_) => 4,
            CliError::NonConvergence(_) => 5,
            CliError::Io(_) => 6,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Validation(msg) => write!(f, "validation failure: {msg}"),
            CliError::Hypothesis(msg) => write!(f, "theorem-hypothesis failure: {msg}"),
            CliError::NonConvergence(msg) => write!(f, "non-convergence: {msg}"),
            CliError::Io(msg) => write!(f, "I/O error: {msg}"),
        }
    }
}

impl From<nlmc::Error> for CliError {
    fn from(err: nlmc::Error) -> Self {
        use nlmc::Error::*;
        let msg = err.to_string();
        match err {
            GammaOutOfRange { .. }
            | InvalidParameter(_)
            | DimensionMismatch { .. }
            | GridCapExceeded { .. }
            | EvalCapExceeded { .. }
            | ReportMismatch => CliError::Usage(msg),
            InvalidKernel { .. } | InvalidDistribution { .. } | LipschitzBoundViolated { .. } => {
                CliError::Validation(msg)
            }
            HypothesisFailure { .. } => CliError::Hypothesis(msg),
            NonConvergence { .. } => CliError::NonConvergence(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
