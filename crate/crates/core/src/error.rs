use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Variants are grouped by how a caller is expected to react: domain and
/// configuration problems are the caller's fault, `InsufficientData` means an
/// experiment ran but did not produce enough usable measurements.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported order {order}: |order| must not exceed {limit}")]
    UnsupportedOrder { order: f64, limit: f64 },

    #[error("gamma function pole at {0}")]
    Pole(f64),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("vertical asymptote of the boundary curve at p = {0}")]
    Asymptote(f64),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("parameters lie outside the blow-up region (theta = {0})")]
    OutsideRegion(f64),

    #[error("no known lifespan bound applies: {0}")]
    NoBound(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    /// Process exit code used by the command-line front-end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InsufficientData(_) => 3,
            Error::Io { .. } => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
