use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("{0} is not a prime power")]
    NotPrimePower(u64),

    #[error("field of {size} elements exceeds the table limit of {limit}")]
    TableLimit { size: u64, limit: u64 },

    #[error("M must divide q−1 (M={m}, q={q})")]
    AlphabetMismatch { m: u64, q: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("column index {l} out of range [0, {bound})")]
    ColumnOutOfRange { l: u64, bound: u64 },

    #[error("restriction violated under {policy} policy: {reason}")]
    RestrictionViolated { policy: String, reason: String },

    #[error("sequences are not comparable: {0}")]
    SequenceMismatch(String),

    #[error("arithmetic overflow computing {0}")]
    Overflow(String),

    /// An identity that must hold by construction did not. Always a bug.
    #[error("internal consistency failure: {0}")]
    Consistency(String),
}
