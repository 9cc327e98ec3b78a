use thiserror::Error;

/// Errors raised across the crate.
///
/// `CapExceeded` is kept apart from the input errors because callers (the CLI
/// in particular) report the two differently.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("{0} is not a prime power")]
    NotPrimePower(u64),

    #[error("{what} = {value} exceeds the supported cap of {cap}")]
    CapExceeded {
        what: &'static str,
        value: u64,
        cap: u64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("zero has no multiplicative inverse")]
    ZeroInverse,

    #[error("moduli differ: {0} vs {1}")]
    ModulusMismatch(u64, u64),

    #[error("column {column} is not AGL-equivalent to the reference difference set")]
    NotEquivalent { column: usize },

    #[error("column {column} spans a non-Desarguesian plane")]
    NonDesarguesian { column: usize },

    #[error("point {point} is not incident with line {line}")]
    NotIncident { point: usize, line: usize },

    #[error("gluing inconsistency on panel ({0}, {1}): {2}")]
    Gluing(usize, usize, String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn is_cap(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }

    pub(crate) fn cap(what: &'static str, value: u64, cap: u64) -> Error {
        Error::CapExceeded { what, value, cap }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
