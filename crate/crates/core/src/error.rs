use thiserror::Error;

/// Hard cap on the number of words any enumeration may visit.
pub const MAX_ENUMERATION: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid digit set: {0}")]
    InvalidDigitSet(String),

    #[error("invalid product set: {0}")]
    InvalidProductSet(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid weight vector: {0}")]
    InvalidWeights(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid approximating function: {0}")]
    InvalidPsi(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An enumeration or exact kernel would exceed its resource guard.
    #[error("resource guard: {what} needs {requested}, limit is {limit}")]
    Guard {
        what: String,
        requested: String,
        limit: String,
    },
}

impl Error {
    pub fn guard(what: impl Into<String>, requested: impl ToString, limit: impl ToString) -> Self {
        Error::Guard {
            what: what.into(),
            requested: requested.to_string(),
            limit: limit.to_string(),
        }
    }

    pub fn is_guard(&self) -> bool {
        matches!(self, Error::Guard { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// `count^n` if it stays within `limit`, otherwise a guard error.
pub(crate) fn checked_power(count: u64, n: u32, limit: u64, what: &str) -> Result<u64> {
    let mut acc: u64 = 1;
    for _ in 0..n {
        acc = match acc.checked_mul(count) {
            Some(v) if v <= limit => v,
            _ => {
                return Err(Error::guard(
                    what,
                    format!("{count}^{n}"),
                    limit,
                ))
            }
        };
    }
    Ok(acc)
}
