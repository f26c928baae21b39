use std::path::PathBuf;

use thiserror::Error;

use crate::linalg::SolveReport;

pub type Result<T, E = EllgError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum EllgError {
    #[error("mesh: {0}")]
    Mesh(String),

    /// Malformed configuration text; `line` is 1-based.
    #[error("config parse error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("invalid config value for `{key}`: {message}")]
    ConfigValue { key: String, message: String },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("{solver} did not converge: {report}")]
    NotConverged {
        solver: &'static str,
        report: SolveReport,
    },

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    /// A guaranteed property of the scheme failed to hold.
    #[error("invariant violated{}: {what}", step_suffix(*.step))]
    Invariant { step: Option<usize>, what: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn step_suffix(step: Option<usize>) -> String {
    match step {
        Some(i) => format!(" at step {i}"),
        None => String::new(),
    }
}

impl EllgError {
    pub(crate) fn invariant(what: impl Into<String>) -> Self {
        EllgError::Invariant {
            step: None,
            what: what.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        EllgError::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach the time-step index to errors raised inside the time loop.
    pub fn at_step(self, step: usize) -> Self {
        match self {
            EllgError::Invariant { what, .. } => EllgError::Invariant {
                step: Some(step),
                what,
            },
            EllgError::NotConverged { solver, report } => EllgError::Invariant {
                step: Some(step),
                what: format!("{solver} did not converge: {report}"),
            },
            other => other,
        }
    }

    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            EllgError::ConfigParse { .. } | EllgError::ConfigValue { .. } | EllgError::UnknownPreset(_)
        )
    }
}
