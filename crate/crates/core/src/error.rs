use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} and {1} are not coprime")]
    NotCoprime(i128, i128),
    #[error("{0} is not an odd prime")]
    NotOddPrime(u128),
    #[error("{0} is not a root of z^2 + {1} modulo {2}")]
    NotARoot(i128, u128, u128),
    #[error("{what} = {value} is outside the supported range {range}")]
    OutOfRange {
        what: &'static str,
        value: String,
        range: &'static str,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

impl Error {
    pub(crate) fn out_of_range(
        what: &'static str,
        value: impl std::fmt::Display,
        range: &'static str,
    ) -> Self {
        Error::OutOfRange {
            what,
            value: value.to_string(),
            range,
        }
    }
}
