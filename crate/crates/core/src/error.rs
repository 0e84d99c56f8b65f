//! Error types shared across the crate.

use thiserror::Error;

use crate::model::Violation;

/// Errors raised while constructing or evaluating models.
#[derive(Debug, Clone, Error)]
pub enum ModelError {
    #[error("expected {expected} delayed aggregates (one per recruitment term), got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("bad preset parameters: {0}")]
    BadParams(String),
    #[error("invalid time function: {0}")]
    InvalidTimeFunction(String),
}

/// Errors raised by the integrator and trajectory queries.
#[derive(Debug, Clone, Error)]
pub enum IntegrateError {
    #[error("model fails structural validation: {}", format_violations(.0))]
    InvalidModel(Vec<Violation>),
    #[error("history not admissible: {0}")]
    InadmissibleHistory(String),
    #[error("non-finite state value at t = {t}")]
    NonFiniteValue { t: f64 },
    #[error("positivity lost at t = {t}: x = {value}")]
    PositivityLoss { t: f64, value: f64 },
    #[error("sample time {t} outside trajectory range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("successive refinements differ by less than 1e-13; order estimate degenerate")]
    DegenerateDifference,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Errors raised by the bounds engine.
#[derive(Debug, Clone, Error)]
pub enum BoundsError {
    #[error("model fails validation: {}", format_violations(.0))]
    InvalidModel(Vec<Violation>),
    #[error("condition `{condition}` does not apply to family `{family}`")]
    FamilyMismatch { condition: String, family: String },
    #[error("envelope construction unavailable: {0}")]
    EnvelopeUnavailable(String),
    #[error("no sign change found while doubling the bracket up to 2^60")]
    NoSignChange,
    #[error("no closed-form bounds for family `{0}`")]
    UnsupportedFamily(String),
}

/// Errors raised by tail analysis and verification.
#[derive(Debug, Clone, Error)]
pub enum VerifyError {
    #[error("horizon {horizon} below 10*tau_max = {required}; tail estimates unreliable")]
    HorizonTooShort { horizon: f64, required: f64 },
    #[error("trajectory grids differ: {0}")]
    GridMismatch(String),
    #[error("bounds report does not certify permanence")]
    NotCertified,
}

fn format_violations(vs: &[Violation]) -> String {
    vs.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
