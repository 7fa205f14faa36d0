use std::fmt;

/// Failures that end a run, each with its exit status.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Malformed scenario or report file.
    Parse(String),
    /// Well-formed input violating an invariant.
    Validation(String),
    Io(String),
    /// Analysis, root count and simulation disagree, or a re-read report
    /// does not match a recomputation.
    Consistency(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
            CliError::Consistency(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
            CliError::Consistency(m) => write!(f, "consistency failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<delay_hopf::Error> for CliError {
    fn from(e: delay_hopf::Error) -> Self {
        use delay_hopf::Error as E;
        match e {
            E::BranchFailure { .. }
            | E::DegenerateCrossing { .. }
            | E::ContourOnRoot { .. }
            | E::NonIntegerWinding { .. }
            | E::LostRoot { .. } => CliError::Consistency(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
