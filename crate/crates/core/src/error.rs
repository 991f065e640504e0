use thiserror::Error;

/// Errors raised by the algebra, atlas, cohomology and form layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("element is not invertible: {0}")]
    NotInvertible(String),
    #[error("Berezinian undefined: reduced odd-odd block is not invertible")]
    BerezinianUndefined,
    #[error("parity mismatch: {0}")]
    ParityMismatch(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable tables differ: {0}")]
    IncompatibleTables(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("not a cocycle: {0}")]
    NotACocycle(String),
    #[error("form is not closed")]
    NotClosed,
    #[error("sign or normalisation convention violated: {0}")]
    ConventionViolation(String),
    #[error("atlas format: {0}")]
    AtlasFormat(String),
    #[error("too many odd variables ({0}); at most 64 are supported")]
    TooManyOddVariables(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
