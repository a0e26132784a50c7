//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of the library.
///
/// The CLI maps these to its exit-code taxonomy: every variant here is a
/// data/validation failure (exit 2); I/O failures never originate in this
/// crate because it does not touch the filesystem.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated its documented domain.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    /// Input was structurally valid but degenerate for the requested
    /// operation (for example a zero-mean region passed to contrast).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Semantic data error: schema mismatches, unknown attributes,
    /// inconsistent shapes.
    #[error("{0}")]
    Data(String),

    /// Format error with a 1-based line number (CSV, PGM, config JSON).
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

impl Error {
    pub fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            field,
            reason: reason.into(),
        }
    }

    pub fn data(reason: impl Into<String>) -> Self {
        Error::Data(reason.into())
    }

    pub fn parse(line: usize, reason: impl Into<String>) -> Self {
        Error::Parse {
            line,
            reason: reason.into(),
        }
    }
}
