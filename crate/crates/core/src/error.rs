use thiserror::Error;

/// Errors surfaced by the samplers, codecs and decompositions.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: a path that is not an excursion, a word with
    /// out-of-range symbols, a parameter outside its domain.
    #[error("invalid input: {0}")]
    Invalid(String),
    /// Exhaustive oracles refuse sizes beyond their guard.
    #[error("size guard: {0}")]
    SizeGuard(String),
    /// No object of the requested size exists (or none was found within
    /// the retry budget).
    #[error("inadmissible: {0}")]
    Inadmissible(String),
    /// Importance-resampling pool too degenerate for the requested draws.
    #[error("resampling pool exhausted: {0}")]
    Pool(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// True for errors caused by the caller's input rather than by the
    /// environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
