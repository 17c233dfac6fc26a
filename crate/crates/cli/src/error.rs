use serde::Serialize;
use thiserror::Error;

/// Command failure, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Numerical(_) => "numerical",
            CliError::Io(_) => "io",
        }
    }

    /// Prefixes the message with `context`.
    pub fn context(self, context: &str) -> Self {
        match self {
            CliError::Validation(m) => CliError::Validation(format!("{context}: {m}")),
            CliError::Numerical(m) => CliError::Numerical(format!("{context}: {m}")),
            CliError::Io(m) => CliError::Io(format!("{context}: {m}")),
        }
    }

    pub fn report(&self, command: Option<&str>) -> ErrorReport {
        ErrorReport {
            error: ErrorBody {
                kind: self.kind(),
                command: command.map(str::to_owned),
                message: self.to_string(),
                exit_code: self.exit_code(),
            },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub error: ErrorBody,
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    pub message: String,
    pub exit_code: i32,
}

impl From<tomokit::Error> for CliError {
    fn from(e: tomokit::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<image::ImageError> for CliError {
    fn from(e: image::ImageError) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Attaches context to library results.
pub trait Context<T> {
    fn ctx(self, context: &str) -> CliResult<T>;
}

impl<T, E: Into<CliError>> Context<T> for Result<T, E> {
    fn ctx(self, context: &str) -> CliResult<T> {
        self.map_err(|e| e.into().context(context))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_errors_map_to_exit_codes() {
        let numerical: CliError = tomokit::Error::UncertaintyViolated { min_eigenvalue: -0.1 }.into();
        assert_eq!(numerical.exit_code(), 3);
        let io: CliError = tomokit::Error::Format("bad magic".into()).into();
        assert_eq!(io.exit_code(), 4);
        let validation: CliError = tomokit::Error::EmptyFrames.into();
        assert_eq!(validation.exit_code(), 2);
    }

    #[test]
    fn context_prefixes_message() {
        let e = CliError::Io("missing".into()).context("reading a.bin");
        assert_eq!(e.to_string(), "reading a.bin: missing");
    }
}
