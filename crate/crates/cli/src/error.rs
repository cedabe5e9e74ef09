use thiserror::Error;

/// Exit code for a physics or numerics failure.
pub const EXIT_DOMAIN: i32 = 1;
/// Exit code for a malformed or out-of-range configuration.
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {reason}", if path.is_empty() { "<document>" } else { path.as_str() })]
    Schema { path: String, reason: String },
    #[error("{path}: {reason}")]
    Range { path: String, reason: String },
    #[error("cannot read {path}: {source}")]
    ConfigIo { path: String, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    OutputIo { path: String, source: std::io::Error },
    #[error(transparent)]
    Domain(#[from] optocool_core::Error),
    /// One or more self-checks failed.
    #[error("{failed} check(s) failed")]
    CheckFailed { failed: usize },
}

impl CliError {
    pub fn range(path: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Range {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CliError::Schema { .. } => "SchemaError",
            CliError::Range { .. } => "RangeError",
            CliError::ConfigIo { .. } => "ConfigIoError",
            CliError::OutputIo { .. } => "OutputIoError",
            CliError::Domain(e) => e.name(),
            CliError::CheckFailed { .. } => "CheckFailed",
        }
    }

    pub fn module(&self) -> &'static str {
        match self {
            CliError::Domain(e) => e.module(),
            _ => "cli",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema { .. } | CliError::Range { .. } | CliError::ConfigIo { .. } => EXIT_CONFIG,
            _ => EXIT_DOMAIN,
        }
    }
}

impl From<optocool_core::SolveError> for CliError {
    fn from(e: optocool_core::SolveError) -> Self {
        CliError::Domain(e.into())
    }
}

impl From<optocool_core::SweepError> for CliError {
    fn from(e: optocool_core::SweepError) -> Self {
        CliError::Domain(e.into())
    }
}

impl From<optocool_core::ObservableError> for CliError {
    fn from(e: optocool_core::ObservableError) -> Self {
        CliError::Domain(e.into())
    }
}

impl From<optocool_core::ModelError> for CliError {
    fn from(e: optocool_core::ModelError) -> Self {
        CliError::Domain(e.into())
    }
}
