use thiserror::Error;

/// Errors surfaced by the library. The CLI maps these onto its exit-code
/// contract: parse failures exit 2, precondition violations exit 3 and
/// indeterminate verdicts exit 4.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field exponent must be at least 1")]
    BadExponent,
    #[error("field size {0} exceeds the 2^16 desk-scale cap")]
    FieldTooLarge(u128),
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(String, String),
    #[error("series is zero within precision O(t^{0})")]
    ZeroSeries(i64),
    #[error("negative valuation input to an operator defined on the power series ring")]
    NegativeValuation,
    #[error("index out of range: {0}")]
    IndexRange(String),
    #[error("insufficient table depth or window: {0}")]
    InsufficientDepth(String),
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("indeterminate: {0}")]
    Indeterminate(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("input family is linearly dependent")]
    DependentInput,
}

pub type Result<T> = std::result::Result<T, Error>;
