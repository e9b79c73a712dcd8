use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("characteristic 2 is not supported (p must be odd)")]
    EvenCharacteristic,
    #[error("modulus {0} is not irreducible")]
    NotIrreducible(String),
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),
    #[error("field of order {p}^{r} exceeds the supported size cap {cap}")]
    FieldTooLarge { p: u64, r: usize, cap: u64 },
    #[error("element has {got} coefficients, field has degree {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coefficient {0} is not reduced modulo p")]
    UnreducedCoefficient(u64),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("discrete logarithm of zero is undefined")]
    ZeroArgument,
    #[error("character order {s} does not divide q - 1 = {q_minus_one}")]
    OrderDoesNotDivide { s: u64, q_minus_one: u64 },
    #[error("basis elements are not linearly independent over the prime field")]
    NotIndependent,
    #[error("{what} of size {size} exceeds the cap {cap}")]
    CapExceeded { what: &'static str, size: u128, cap: u64 },
    #[error("parity violation: {0}")]
    ParityViolation(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("alpha and beta are conjugate over the prime field")]
    ConjugatePair,
    #[error("element does not generate the full field over the prime field")]
    NotGenerator,
    #[error("invalid digit set: {0}")]
    DigitSet(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Process exit code used by the experiment CLI.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::CapExceeded { .. } | Error::FieldTooLarge { .. } => 3,
            Error::ParityViolation(_) => 4,
            _ => 2,
        }
    }
}
