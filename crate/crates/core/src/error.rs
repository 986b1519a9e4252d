use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("element has {got} coordinates, group has {expected} factors")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("elements do not generate the character group")]
    SpanFailure,
    #[error("expected a tuple of length {expected}, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("invalid relation degree k={k} for n={n}")]
    InvalidK { k: usize, n: usize },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("no primes supplied")]
    EmptyPrimeList,
    #[error("dense budget exceeded: {rows}x{cols} after sparse pre-reduction (budget {budget} entries)")]
    BudgetExceeded { rows: usize, cols: usize, budget: usize },
    #[error("incompatible index: {0}")]
    IncompatibleIndex(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("ell={ell} divides the group order {order}")]
    EllDividesOrder { ell: u64, order: u64 },
    #[error("invalid Hecke parameters: {0}")]
    InvalidHecke(String),
    #[error("degenerate cone: {0}")]
    DegenerateCone(String),
    #[error("relation-span violation: {0}")]
    SpanViolation(String),
    #[error("malformed blowup spec: {0}")]
    MalformedSpec(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
