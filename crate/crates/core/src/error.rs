use thiserror::Error;

/// Errors raised by the spectral toolbox, the iteration and the run driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("rank mismatch: {0}")]
    Rank(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Exponent pair for which one of the beta-function arguments or supremum
    /// exponents is not positive.
    #[error("inadmissible exponents: {0}")]
    Inadmissible(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("blow-up at node {node} (t = {time}): {what}")]
    BlowUp { node: usize, time: f64, what: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
