use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("potential has no minimum")]
    NoMinimum,

    #[error("numeric failure at l = {l}: {diagnostics}")]
    NumericFailure { l: u32, diagnostics: String },

    #[error("not converged: {0}")]
    NotConverged(String),

    #[error("fit did not converge after {iterations} iterations: {trace}")]
    FitDivergence { iterations: usize, trace: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    /// Stable machine-readable code for each error class.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "E_DOMAIN",
            Error::NoMinimum => "E_NO_MINIMUM",
            Error::NumericFailure { .. } | Error::NotConverged(_) => "E_NUMERIC",
            Error::FitDivergence { .. } => "E_FIT",
            Error::Config(_) => "E_CONFIG",
            Error::Io { .. } => "E_IO",
            Error::Parse { .. } => "E_PARSE",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
