use thiserror::Error;

/// Errors produced by the analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The coupling constant does not admit interior critical points.
    #[error("no interior critical point for g = {g} (requires g > 1)")]
    Domain { g: f64 },

    /// A bracket did not straddle a sign change or a count change.
    #[error("invalid bracket [{lo}, {hi}]: {reason}")]
    Bracket { lo: f64, hi: f64, reason: String },

    /// No root of the defining equation was found inside the bracket.
    #[error("no root in [{lo}, {hi}]: {what}")]
    NoRoot { lo: f64, hi: f64, what: String },

    /// The orbit is too short to be classified.
    #[error("orbit has {got} samples, need at least {need}")]
    InsufficientSamples { got: usize, need: usize },

    #[error("invalid settings: {0}")]
    InvalidSettings(String),

    #[error("unknown recipe `{name}`; available: {}", available.join(", "))]
    UnknownRecipe {
        name: String,
        available: Vec<String>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag used on the diagnostic stream.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::Bracket { .. } => "bracket",
            Error::NoRoot { .. } => "no-root",
            Error::InsufficientSamples { .. } => "insufficient-samples",
            Error::InvalidSettings(_) => "invalid-settings",
            Error::UnknownRecipe { .. } => "unknown-recipe",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }

    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. }
                | Error::Bracket { .. }
                | Error::NoRoot { .. }
                | Error::InsufficientSamples { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
