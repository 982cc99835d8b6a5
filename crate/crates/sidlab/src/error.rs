//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by grid construction, kernel algebra, and the
/// phase-space pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: degenerate intervals, length mismatches,
    /// incompatible grids.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A state with vanishing trace cannot be normalized.
    #[error("degenerate state: {0}")]
    DegenerateState(String),

    /// A state violates positivity or Hermiticity beyond tolerance.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Requested operation exceeds what the grid can resolve.
    #[error("resolution: {0}")]
    Resolution(String),

    /// The model does not provide the required realization.
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    /// No grid points found on the requested level set.
    #[error("empty level set: {0}")]
    EmptyLevelSet(String),

    /// A trajectory or probe left the sampled phase-space region.
    #[error("out of domain: {0}")]
    OutOfDomain(String),

    /// An operation's precondition failed a numerical check.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Symplectic integration failed its drift contract.
    #[error("integrator: {0}")]
    Integrator(String),

    /// File I/O failure with path context.
    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Malformed on-disk data.
    #[error("format error in {path}: {reason}")]
    Format { path: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
