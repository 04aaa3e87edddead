use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// A single failed constraint in a configuration file, addressed by field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationIssue {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// Arguments violate an operation's precondition (shape, grid, arity).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Input outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Time stepping or a linear solve could not proceed.
    #[error("numerical failure at t={time}: {message}")]
    Numerical {
        time: f64,
        species: Option<usize>,
        min_value: Option<f64>,
        message: String,
    },

    /// Invalid data handed to a fitting or analysis routine.
    #[error("data error: {0}")]
    Data(String),

    #[error("boundary equilibrium: component u{component} = {value} is not positive")]
    BoundaryEquilibrium { component: usize, value: f64 },

    #[error("configuration parse error: {0}")]
    ConfigParse(String),

    #[error("invalid configuration:\n{}", format_issues(.0))]
    ConfigInvalid(Vec<ValidationIssue>),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn format_issues(issues: &[ValidationIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  - {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl Error {
    pub(crate) fn numerical(time: f64, message: impl Into<String>) -> Self {
        Error::Numerical {
            time,
            species: None,
            min_value: None,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
