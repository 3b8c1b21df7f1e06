//! Crate-wide error type.
//!
//! Value-dependent failures (bad input, caps, refusals) are reported through
//! `Error`; violations of internal invariants panic via assertions instead.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field F_{p}^{t} too large for exhaustive context construction")]
    FieldTooLarge { p: u64, t: usize },
    #[error("no primitive polynomial of degree {t} over F_{p} (search-bound bug)")]
    NoPrimitivePolynomial { p: u64, t: usize },
    #[error("operands belong to different contexts: {0}")]
    ContextMismatch(&'static str),
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("inversion of a non-unit")]
    NonUnit,
    #[error("division by zero")]
    DivisionByZero,
    #[error("{e} does not divide {t}, no subfield embedding")]
    NoEmbedding { e: usize, t: usize },
    #[error("precision {have} too small, need at least {need}")]
    PrecisionTooSmall { need: usize, have: usize },
    #[error("Witt polynomial level {requested} exceeds cap {cap}")]
    LevelCapExceeded { requested: usize, cap: usize },
    #[error("frobenius needs a coefficient ring of characteristic p = {p}, found {found}")]
    BadCharacteristic { p: u64, found: u128 },
    #[error("term count would exceed cap {cap}")]
    TermCapExceeded { cap: usize },
    #[error("matrix dimension {dim} exceeds cap {cap}")]
    MatrixCapExceeded { dim: usize, cap: usize },
    #[error("exponent overflow in Kronecker substitution")]
    ExponentOverflow,
    #[error("characteristic {p} too small for the classical Jacobian criterion (need p > {bound}); use the Witt-Jacobian criterion")]
    CharacteristicTooSmall { p: u64, bound: String },
    #[error("instance too large to simulate: {0}")]
    TooLarge(String),
    #[error("field with p^t - 1 >= {need} points required, have {have}")]
    FieldTooSmall { need: String, have: String },
    #[error("search exhausted without a witness: {0}")]
    SearchExhausted(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
