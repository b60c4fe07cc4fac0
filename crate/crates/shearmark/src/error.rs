use thiserror::Error;

/// Errors produced by the watermarking toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An input image or matrix violates an operation's preconditions.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An embedding or transform configuration is unusable.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// A subband selector does not resolve within the shearlet system.
    #[error("invalid selector: {0}")]
    InvalidSelector(String),

    /// An attack specification has unknown kind or out-of-range parameters.
    #[error("invalid attack spec: {0}")]
    InvalidSpec(String),

    /// An attack catalog file failed to parse.
    #[error("catalog parse error at line {line}: {msg}")]
    CatalogParse { line: usize, msg: String },

    /// A key file is malformed; `offset` is the byte where parsing failed.
    #[error("key format error at byte {offset}: {msg}")]
    KeyFormat { offset: usize, msg: String },

    /// An iterative numerical method failed to converge.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// An image file uses a format or layout this tool does not accept.
    #[error("unsupported image: {0}")]
    UnsupportedImage(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
