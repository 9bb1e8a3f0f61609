use thiserror::Error;

/// Errors raised by the laboratory's numerical routines.
///
/// Every variant is a *domain* error: the caller asked for something outside
/// an operation's contract. Internal invariant violations panic instead.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    #[error("sieve base insufficient: primes up to {needed} required, base covers only {covered}")]
    InsufficientBase { needed: u64, covered: u64 },

    #[error("n = {n} has prime factor {prime} above the assignment limit {limit}")]
    OutOfRange { n: u64, prime: u64, limit: u64 },

    #[error("enumeration refused: universe of {primes} primes exceeds the {max}-bit bound")]
    EnumerationTooLarge { primes: usize, max: usize },

    #[error("pole: Euler factor vanishes at p = {prime}")]
    Pole { prime: u64 },

    #[error("logarithm of non-positive value {value} in {op}")]
    LogDomain { op: &'static str, value: f64 },

    #[error("series diverges: {0}")]
    Divergent(String),

    #[error("no witness found: {0}")]
    NoWitness(String),

    #[error("positivity undecided within certified precision at y = {y}")]
    Undecided { y: u64 },

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            op,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
