use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("empty assortment")]
    EmptyAssortment,
    #[error("assortment needs at least one type")]
    NoTypes,
    #[error("τ undefined for empty pile")]
    TauUndefined,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("brute-force enumeration refused: total {total} exceeds cap {cap}")]
    CapExceeded { total: u64, cap: u64 },
    #[error("unknown lemma id `{0}`")]
    UnknownLemma(String),
    #[error("malformed assortment `{0}`")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
