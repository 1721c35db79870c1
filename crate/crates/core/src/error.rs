use thiserror::Error;

use crate::arbreal::ArbError;

/// Errors surfaced by the solver pipeline.
#[derive(Debug, Error)]
pub enum FibpowError {
    #[error(transparent)]
    Arb(#[from] ArbError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("complex field (kappa = 2) is not supported")]
    NonRealField,
    #[error("continued fraction table has no denominator >= {needed}")]
    TableTooShort { needed: String },
    #[error("lattice basis is singular")]
    SingularBasis,
    #[error("lattice reduction failed: {0}")]
    ReductionFailed(String),
    #[error("stage {stage} failed: {detail}")]
    StageFailed { stage: String, detail: String },
    #[error("step {step} failed for (n1, m1) = ({n1}, {m1}), t = {t}: {detail}")]
    StepFailed {
        step: String,
        n1: u64,
        m1: u64,
        t: u64,
        detail: String,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed data: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, FibpowError>;
