use nlslab_core::LabError;

/// Failure of a run, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or inputs: exit 1.
    Usage(String),
    /// The numerics broke down, or artifacts could not be written: exit 2.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}
