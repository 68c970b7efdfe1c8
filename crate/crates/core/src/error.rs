//! Error type shared by every module in the crate.

use thiserror::Error;

/// Errors produced by signal operations, model evaluation, simulation and
/// the analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Binary signal operations require equal step, channel count and length.
    #[error("misaligned signals: {0}")]
    Misaligned(String),

    /// A signal failed a structural invariant (step, finiteness, shape).
    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    /// Requested model preset does not exist.
    #[error("unknown model `{0}`")]
    UnknownModel(String),

    /// A model or operation parameter is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// The state or input left the model's declared domain box.
    #[error("domain exit at t={time}: {what}")]
    DomainExit { time: f64, what: String },

    /// The state became NaN or infinite during integration.
    #[error("non-finite state at t={time} in model `{model}`")]
    NonFinite { time: f64, model: String },

    /// Vector or matrix dimensions do not match the model.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A storage function or supply rate failed validation.
    #[error("invalid storage or supply: {0}")]
    InvalidStorage(String),

    /// CSV parse or format error.
    #[error("csv: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
