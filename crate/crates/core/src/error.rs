use thiserror::Error;

/// Errors raised by the simulation library and the experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("capability exceeded: {0}")]
    Capability(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("value out of range: {0}")]
    Range(String),

    /// Two noise curves never cross on the sampled grid.
    #[error(
        "no crossing on grid [{gamma_start}, {gamma_end}]: deep-shallow energy difference \
         {diff_start} at start, {diff_end} at end"
    )]
    NoCrossing {
        gamma_start: f64,
        gamma_end: f64,
        diff_start: f64,
        diff_end: f64,
    },

    #[error("mitigation undefined: all {total} bitstrings violate the parity rule")]
    MitigationUndefined { total: usize },

    #[error("usage error in `{field}`: {message}")]
    Usage { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn usage(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Usage {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Argument(_) | Error::Usage { .. } | Error::Toml(_) => 2,
            Error::Capability(_) => 3,
            Error::Consistency(_)
            | Error::Range(_)
            | Error::NoCrossing { .. }
            | Error::MitigationUndefined { .. } => 4,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
