use thiserror::Error;

/// Errors surfaced by the toolkit. Verification *mismatches* are not errors:
/// they are reported in a [`crate::verify::VerificationReport`]. Errors are
/// reserved for impossible requests and broken preconditions.
#[derive(Debug, Error)]
pub enum SltError {
    #[error("conductor must be positive, got {0}")]
    ZeroConductor(u64),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("{q} is not a power of {p}")]
    NotAPowerOf { q: u64, p: u64 },

    #[error("capacity exceeded: {what} has size {size}, budget {budget}")]
    Capacity {
        what: String,
        size: u128,
        budget: u128,
    },

    #[error("discrete log of zero is undefined")]
    DlogOfZero,

    #[error("chart of zero is undefined")]
    ChartOfZero,

    #[error("no Lang witness for element of order {order} within m_max = {m_max}")]
    LangExhausted { order: u64, m_max: u64 },

    #[error("torus Lang congruence unsolvable up to level {level}")]
    TorusLangUnsolvable { level: u64 },

    #[error("not a generalised Shintani descent target: first exponent {a} <= 0")]
    InvalidShintaniTarget { a: i64 },

    #[error("matrix in GL2(Z) action must have determinant ±1, got {0}")]
    NotUnimodular(i64),

    #[error("n = {n} must be prime and divide q - ε = {qme}")]
    BadCase { n: u64, qme: i64 },

    #[error("class functions live on different forms: {0} vs {1}")]
    FormMismatch(String, String),

    #[error("no class fusion available from {sub} into {amb}")]
    MissingFusion { sub: String, amb: String },

    #[error("character identification failed: {0}")]
    Identification(String),

    #[error("self-validation failed for {what}: {detail}")]
    SelfValidation { what: String, detail: String },

    #[error("Dixon modular prime search failed for exponent {exponent}")]
    DixonPrime { exponent: u64 },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, SltError>;
