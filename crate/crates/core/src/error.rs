use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Variants are grouped by how a front end should react: input problems
/// (`Parse`, `InvalidInput`, ...), unmet analytical preconditions
/// (`NotUnique`, `TwistFailure`, ...) and internal inconsistencies that
/// signal a bug in one of the exact identities.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("incomplete table: missing cylinder {0}")]
    IncompleteTable(String),

    #[error("duplicate cylinder {0}")]
    DuplicateKey(String),

    #[error("depth mismatch: expected {expected}, found {found}")]
    DepthMismatch { expected: usize, found: usize },

    #[error("alphabet mismatch: {0} vs {1}")]
    AlphabetMismatch(usize, usize),

    #[error("maximizing measure not unique: {0}")]
    NotUnique(String),

    #[error("twist condition fails: {0}")]
    TwistFailure(String),

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("inconsistency: {0}")]
    Inconsistency(String),
}

impl Error {
    /// True for errors caused by the input document rather than by the analysis.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse(_)
                | Error::InvalidInput(_)
                | Error::IncompleteTable(_)
                | Error::DuplicateKey(_)
                | Error::DepthMismatch { .. }
                | Error::AlphabetMismatch(..)
        )
    }

    /// True when an analytical precondition (uniqueness, twist, ...) is unmet.
    pub fn is_precondition(&self) -> bool {
        matches!(self, Error::NotUnique(_) | Error::TwistFailure(_) | Error::NotImplemented(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
