use crate::kernel::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("malformed Cauchy name: |q_{index} - q_{next}| = {diff} is not below 2^-{index}", next = index + 1)]
    MalformedName { index: u32, diff: Rational },

    #[error("budget exhausted in {context} (cap {cap})")]
    BudgetExhausted { context: &'static str, cap: u64 },

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("endpoint {endpoint} may carry an atom: {reason}")]
    NotContinuitySet { endpoint: String, reason: String },

    #[error("the measure carries no atom certificate")]
    NoAtomCertificate,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
