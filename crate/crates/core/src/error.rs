use num_bigint::BigInt;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    CompositeModulus(u64),
    #[error("prime field requires a modulus")]
    MissingModulus,
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} has no inverse in the integer ring")]
    NoInverseInIntegerRing(BigInt),
    #[error("operands live in different rings")]
    RingMismatch,
    #[error("set has {0} element(s), at least 2 are required")]
    SetTooSmall(usize),
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("{what} supports at most {max} rows, got {got}")]
    TooLarge { what: &'static str, max: usize, got: usize },
    #[error("bad pivot pair (a = {a}, b = {b}): need b != 0 and a != b")]
    BadPivotPair { a: BigInt, b: BigInt },
    #[error("corner block is singular")]
    SingularBlock,
    #[error("{0} is not realizable by this construction")]
    NotAMember(BigInt),
    #[error("entry set must contain both 0 and 1")]
    MissingZeroOne,
    #[error("no construction within matrix size budget {0} covers the field")]
    Insufficient(usize),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("multiplier {0} is not a non-negative integer")]
    NonIntegerMultiplier(String),
    #[error("matrix size {0} is not reachable by the block construction")]
    NotConstructible(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("witness failed verification: {0}")]
    Verification(String),
}
