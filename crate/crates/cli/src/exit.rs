use saddlesmith::Error;

/// Failure of a command, mapped onto the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("verification failed: {0} check(s) out of tolerance")]
    VerifyFailed(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Library(#[from] Error),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::VerifyFailed(_) => 1,
            CliError::Parse(_) => 3,
            CliError::Io(_) => 3,
            CliError::Library(e) => library_code(e),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Parse(e.to_string())
    }
}

/// 2 classification, 3 malformed input, 5 obstruction, 4 every numerical failure.
pub fn library_code(e: &Error) -> i32 {
    match e {
        Error::NotResonantSaddle(_) | Error::ResonantOrderExceedsTruncation => 2,
        Error::BadResonance { .. }
        | Error::LaurentTerm
        | Error::TruncationTooLow { .. }
        | Error::BadOffset { .. }
        | Error::BadPathExponent { .. } => 3,
        Error::ObstructedIntegrand(_) | Error::ObstructedMonomial(_) => 5,
        _ => 4,
    }
}
