use thiserror::Error;

use crate::spectra::Unit;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unit mismatch: expected {expected}, found {found}")]
    UnitMismatch { expected: Unit, found: Unit },

    #[error("spectra are defined on different frequency grids")]
    GridMismatch,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("singular dynamic stiffness at {frequency_hz} Hz")]
    Singular { frequency_hz: f64 },

    #[error("closed loop is ill-conditioned at {frequency_hz} Hz (|1 + G| = {magnitude:e})")]
    Conditioning { frequency_hz: f64, magnitude: f64 },

    #[error("non-finite value computed at {frequency_hz} Hz")]
    NonFinite { frequency_hz: f64 },

    #[error("degenerate sensor geometry (condition number {condition:e})")]
    DegenerateGeometry { condition: f64 },

    #[error("eigenvalue solver failed: {0}")]
    Eigen(String),

    #[error("config section `{section}`: {message}")]
    Config { section: String, message: String },

    #[error("section `{section}`: {source}")]
    Section {
        section: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn in_section(self, section: &'static str) -> Self {
        match self {
            e @ Error::Section { .. } => e,
            e => Error::Section {
                section,
                source: Box::new(e),
            },
        }
    }

    /// Errors caused by bad input files or settings, as opposed to numerical
    /// failures during evaluation.
    pub fn is_config_error(&self) -> bool {
        if let Error::Section { source, .. } = self {
            return source.is_config_error();
        }
        matches!(
            self,
            Error::Config { .. }
                | Error::Io(_)
                | Error::Csv(_)
                | Error::Json(_)
                | Error::InvalidParameter { .. }
                | Error::InvalidGrid(_)
        )
    }
}
