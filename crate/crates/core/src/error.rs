use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ToaError {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("degenerate kinematics: {0}")]
    DegenerateKinematics(&'static str),

    #[error("non-finite integrand or density value at t = {at}")]
    NonFiniteEvaluation { at: f64 },

    #[error("integration did not converge: value {value}, error estimate {error_estimate}")]
    NotConverged { value: f64, error_estimate: f64 },

    #[error("no sign change found for xi = {xi} although a crossing is guaranteed")]
    BracketFailure { xi: f64 },

    #[error("formula only holds for a dropped particle (v0 = 0), got v0 = {v0}")]
    InvalidForNonzeroV0 { v0: f64 },

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, ToaError>;

pub(crate) fn require(
    ok: bool,
    name: &'static str,
    value: f64,
    reason: &'static str,
) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(ToaError::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}
