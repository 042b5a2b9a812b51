use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("series truncated after {terms} terms with tail bound {bound:e}")]
    Truncation { terms: usize, bound: f64 },

    #[error("capacity exceeded: requested q = {requested}, limit is {limit} (raise it with PAGECURVE_MAX_Q)")]
    Capacity { requested: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}

pub(crate) fn numerical<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Numerical(msg.into()))
}
