//! Error types shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

/// Unified error type for all library operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration parameter violates its documented range.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An input file could not be decoded.
    #[error("unrecognized or corrupt input format: {0}")]
    Format(String),

    /// An input is structurally unusable (e.g., a zero-pixel image).
    #[error("degenerate input: {0}")]
    Input(String),

    /// Two objects that must agree in size do not.
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    /// The requested length cannot be split into windows within the bounds.
    #[error("length {length} cannot be partitioned into windows of size {min}..={max}")]
    InfeasibleLength {
        length: usize,
        min: usize,
        max: usize,
    },

    /// An argument is outside its valid domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A key file is malformed or violates key-set invariants.
    #[error("key file error: {0}")]
    KeyFile(String),

    /// A template file is malformed.
    #[error("template file error: {0}")]
    TemplateFile(String),

    /// Two templates cannot be compared.
    #[error("incomparable templates: {0}")]
    IncomparableTemplates(String),

    /// A template has no direction (zero norm), so cosine scores are undefined.
    #[error("degenerate template: {0}")]
    DegenerateTemplate(String),

    /// The decidability index is undefined for the given score sets.
    #[error("decidability index undefined: {0}")]
    UndefinedDi(String),

    /// A dataset file or directory could not be ingested.
    #[error("ingestion error at {path}: {reason}")]
    Ingestion { path: PathBuf, reason: String },

    /// The dataset cannot satisfy the requested evaluation protocol.
    #[error("protocol error: {0}")]
    Protocol(String),

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable code for each error class.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Config(_) => "CONFIG",
            Error::Format(_) => "FORMAT",
            Error::Input(_) => "INPUT",
            Error::Dimension { .. } => "DIMENSION",
            Error::InfeasibleLength { .. } => "INFEASIBLE_LENGTH",
            Error::Argument(_) => "ARGUMENT",
            Error::KeyFile(_) => "KEY_FILE",
            Error::TemplateFile(_) => "TEMPLATE_FILE",
            Error::IncomparableTemplates(_) => "INCOMPARABLE_TEMPLATES",
            Error::DegenerateTemplate(_) => "DEGENERATE_TEMPLATE",
            Error::UndefinedDi(_) => "UNDEFINED_DI",
            Error::Ingestion { .. } => "INGESTION",
            Error::Protocol(_) => "PROTOCOL",
            Error::Io(_) => "IO",
        }
    }
}
