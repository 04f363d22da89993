use std::fmt;
use std::path::Path;

use gridgame_core::Error;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> CliError {
        CliError { code: EXIT_INPUT, message: message.into() }
    }

    pub fn internal(message: impl Into<String>) -> CliError {
        CliError { code: EXIT_INTERNAL, message: message.into() }
    }

    /// Core error raised while handling `path`.
    pub fn at(path: &Path, err: Error) -> CliError {
        let mut e = CliError::from(err);
        e.message = format!("{}: {}", path.display(), e.message);
        e
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn is_input(err: &Error) -> bool {
    match err {
        Error::Parse { .. }
        | Error::Validation(_)
        | Error::Radiality { .. }
        | Error::Catalog { .. }
        | Error::Dimension { .. }
        | Error::Parameter(_)
        | Error::UnknownMethod(_)
        | Error::Csv(_)
        | Error::Io(_) => true,
        Error::Cell { source, .. } => is_input(source),
        Error::Degenerate(_) | Error::Solver(_) => false,
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> CliError {
        let code = if is_input(&err) { EXIT_INPUT } else { EXIT_INTERNAL };
        CliError { code, message: err.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> CliError {
        CliError::internal(err.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> CliError {
        CliError::internal(err.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
