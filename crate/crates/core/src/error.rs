use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime power")]
    NotPrimePower(String),
    #[error("characteristic polynomial is reducible over Q")]
    ReduciblePolynomial,
    #[error("not a Weil polynomial: {0}")]
    NotWeil(String),
    #[error("not ordinary: p divides a2")]
    NotOrdinary,
    #[error("division by zero")]
    DivisionByZero,
    #[error("could not factor {0}")]
    FactorizationFailure(String),
    #[error("order is not contained in the maximal order")]
    NotSubring,
    #[error("order does not contain the maximal real order")]
    NotRMOrder,
    #[error("ideals live in different orders")]
    OwnerMismatch,
    #[error("undesirable prime {0}")]
    UndesirablePrime(String),
    #[error("ideal is not coprime to the conductor")]
    NotInvertible,
    #[error("factor base too small: {0}")]
    FactorBaseTooSmall(String),
    #[error("factor-base decomposition gave up after {0} trials")]
    DecompositionTimeout(u64),
    #[error("orders are not nested")]
    NotNested,
    #[error("no relation found after {trials} trials: {reason}")]
    NoRelationFound { trials: u64, reason: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{0} does not divide the ambient ideal")]
    NotDivisor(String),
    #[error("inadmissible prime: {0}")]
    InadmissiblePrime(String),
    #[error("not a volcano prime: {0}")]
    NotVolcanoPrime(String),
    #[error("oracle inconsistency: {0}")]
    OracleInconsistency(String),
    #[error("requirements violated: {0}")]
    RequirementsViolated(String),
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("internal invariant failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, col: usize, msg: impl Into<String>) -> Error {
        Error::Parse { line, col, msg: msg.into() }
    }
}
