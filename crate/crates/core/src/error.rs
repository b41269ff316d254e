use thiserror::Error;

/// Failure modes shared by every lab module.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure at t = {time}: {detail}")]
    NumericalFailure { time: f64, detail: String },

    #[error("domain escape: evaluation point |x| = {offending} lies outside the box half-width {half_width}")]
    DomainEscape { offending: f64, half_width: f64 },

    #[error("boundary mass {fraction:e} exceeds the failure threshold at s = {time}")]
    BoundaryMass { time: f64, fraction: f64 },

    #[error("measure is not absolutely continuous: atom {atom} has mu = {mu} but nu = 0")]
    NotAbsolutelyContinuous { atom: usize, mu: f64 },
}

impl LabError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        LabError::InvalidArgument(msg.into())
    }

    /// True for failures that stem from the numerics rather than the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            LabError::NumericalFailure { .. }
                | LabError::DomainEscape { .. }
                | LabError::BoundaryMass { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
