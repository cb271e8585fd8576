use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("characteristic {0} is even; only odd characteristic is supported")]
    EvenCharacteristic(u64),
    #[error("field size {0} is too small (need q > 3)")]
    FieldTooSmall(u64),
    #[error("field size {p}^{k} does not fit in a machine word")]
    FieldTooLarge { p: u64, k: u32 },
    #[error("invalid extension degree {0}")]
    InvalidDegree(u32),
    #[error("modulus is not a monic irreducible polynomial of degree {0}")]
    BadModulus(u32),
    #[error("elements belong to different fields")]
    FieldMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix is singular")]
    Singular,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("argument must be a positive integer")]
    NonPositive,
    #[error("factorization of {0} exceeded its iteration budget")]
    FactorizationTimeout(String),
    #[error("g^M is not the identity: exponent table does not match the element")]
    ExponentMismatch,
    #[error("invalid rank n = {0}")]
    InvalidRank(usize),
    #[error("group is not usable for recognition: {0}")]
    Unusable(String),
    #[error("random search gave up after {0} attempts")]
    SamplingFailure(usize),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown rule number {0}")]
    UnknownRule(i32),
    #[error("rank {0} of j - j^2 is odd; input is not a pseudo-involution")]
    OddRank(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
