//! Error type shared by the whole crate.

use std::fmt;

/// Everything that can go wrong when building scenarios, running
/// algorithms, or checking bounds.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two objects that must agree on dimension do not.
    DimensionMismatch { expected: usize, found: usize },
    /// A caller-supplied configuration value is rejected up front
    /// (bad set kind for a map, step size out of range, and so on).
    InvalidConfiguration(String),
    /// A documented precondition was violated with otherwise valid types
    /// (e.g. a query point that must lie inside the feasible set does not).
    ContractViolation(String),
    /// An operation that requires linear costs met a non-linear one.
    NonLinearCost { index: usize },
    /// A step-size rule needs a quantity that is not available a priori
    /// for this scenario (e.g. oracle mode on point-dependent gradients).
    StepSizeUnavailable(String),
    /// A checker refused to run because the trace was not produced with
    /// the step-size rule the bound is stated for.
    StepSizeMismatch { expected: f64, found: f64 },
    /// Input size exceeds a documented resource cap.
    ResourceLimit(String),
    /// The offline solver did not reach its tolerance within the
    /// iteration cap; carries the best iterate and its residual.
    NoConvergence { best: Vec<f64>, residual: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::InvalidConfiguration(msg) => write!(f, "invalid configuration: {msg}"),
            Error::ContractViolation(msg) => write!(f, "contract violation: {msg}"),
            Error::NonLinearCost { index } => {
                write!(f, "cost {index} is not linear; this operation requires linear costs")
            }
            Error::StepSizeUnavailable(msg) => write!(f, "step size unavailable: {msg}"),
            Error::StepSizeMismatch { expected, found } => write!(
                f,
                "trace step size {found} does not match the prescribed value {expected}"
            ),
            Error::ResourceLimit(msg) => write!(f, "resource limit: {msg}"),
            Error::NoConvergence { residual, .. } => {
                write!(f, "offline solver did not converge; residual {residual:e}")
            }
        }
    }
}

impl std::error::Error for Error {}
