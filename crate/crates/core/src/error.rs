use thiserror::Error;

use crate::simulator::FieldSnapshot;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the domain of an EOS or locus formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// No downstream state on the Hugoniot locus at the requested point.
    #[error("no admissible downstream state: {0}")]
    Locus(String),

    /// Piston speed outside the admissible window `(u1, u_o)`.
    #[error("admissibility error: {0}")]
    Admissibility(String),

    /// Parameters outside the standing hypotheses (e.g. `det k <= 0`).
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("scenario field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("shock boundary solve failed: {0}")]
    ShockBoundary(String),

    #[error("CFL violation: {0}")]
    Cfl(String),

    #[error("state escaped the admissible region: {0}")]
    StateEscape(String),

    #[error("Lax entropy condition failed: {0}")]
    Lax(String),

    #[error("run aborted at t = {t}: {reason}")]
    Aborted {
        t: f64,
        reason: Box<Error>,
        snapshot: Box<FieldSnapshot>,
    },

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Errors caused by the inputs rather than by the numerics.
    pub fn is_configuration(&self) -> bool {
        match self {
            Error::Config { .. } | Error::Admissibility(_) | Error::Hypothesis(_) => true,
            Error::Aborted { reason, .. } => reason.is_configuration(),
            _ => false,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
