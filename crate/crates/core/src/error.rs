use std::path::PathBuf;

/// Errors produced anywhere in the pipeline.
///
/// Variants split into two families: input/config problems the user can fix
/// ([`Error::is_validation`] returns true) and failures while doing the work.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("duplicate example id {0:?}")]
    DuplicateId(String),
    #[error("unknown label {label:?} in {split} split")]
    UnknownLabel { label: String, split: String },
    #[error("invalid {field}: {msg}")]
    Config { field: String, msg: String },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("example {0:?} is missing from {1}")]
    MissingExample(String, &'static str),
    #[error("inconsistent probe sets at epoch {epoch}: {id:?} {what}")]
    ProbeMismatch {
        epoch: usize,
        id: String,
        what: &'static str,
    },
    #[error("sampler exhausted at step {0}")]
    SamplerExhausted(usize),
    #[error("incompatible scheduler: {0}")]
    Incompatible(String),
    #[error("undefined statistic: {0}")]
    Undefined(String),
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input or configuration rather than a
    /// failure during computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::DuplicateId(_)
                | Error::UnknownLabel { .. }
                | Error::Config { .. }
                | Error::Incompatible(_)
                | Error::MissingExample(..)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
