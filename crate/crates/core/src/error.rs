use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid register index {index} for {count} registers")]
    InvalidRegister { index: usize, count: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("oracle is not of classical type")]
    NotClassical,

    #[error("projector does not have the required product form: {0}")]
    ProjectorShape(String),

    #[error("polynomial has no certificate")]
    MissingCertificate,

    #[error("polynomial has mixed parity")]
    MixedParity,

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("schedule invalid: {0}")]
    Schedule(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
