//! Error type shared by the numerical routines.

use alloc::string::String;
use core::fmt;

/// Failure modes of the evaluators and samplers.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// A point had the wrong number of complex coordinates.
    DimensionMismatch { expected: usize, got: usize },
    /// An evaluation point sits too close to (or outside) the boundary for
    /// the quadrature to resolve; callers should use radial limits instead.
    TooCloseToBoundary { norm: f64, max_norm: f64 },
    /// A nonisotropic radius outside (0, 2].
    RadiusOutOfRange { radius: f64 },
    /// Rejection sampling accepted too small a fraction of draws.
    LowAcceptance { rate: f64, floor: f64 },
    /// A requested annulus extends past the largest possible distance.
    AnnulusOutOfRange { outer: f64 },
    /// Fewer usable scales than a fit needs.
    InsufficientScales { needed: usize, got: usize },
    /// A Monte-Carlo standard error exceeded the configured cap.
    NoisyEstimate { standard_error: f64, cap: f64 },
    /// An iteration failed to converge within its budget.
    NoConvergence { what: &'static str },
    /// A parameter outside its documented domain.
    InvalidParameter { what: String },
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::DimensionMismatch { expected, got } => {
                write!(f, "expected {expected} complex coordinates, got {got}")
            }
            CoreError::TooCloseToBoundary { norm, max_norm } => write!(
                f,
                "|z| = {norm} exceeds {max_norm}; evaluate a radial dilate f(r z) and let r -> 1 instead"
            ),
            CoreError::RadiusOutOfRange { radius } => {
                write!(f, "nonisotropic radius {radius} outside (0, 2]")
            }
            CoreError::LowAcceptance { rate, floor } => write!(
                f,
                "rejection acceptance rate {rate:.3e} below floor {floor:.3e}; \
                 sample the cap directly via sample_cap"
            ),
            CoreError::AnnulusOutOfRange { outer } => {
                write!(f, "annulus outer radius {outer} exceeds the diameter 2")
            }
            CoreError::InsufficientScales { needed, got } => {
                write!(f, "need at least {needed} usable scales, got {got}")
            }
            CoreError::NoisyEstimate { standard_error, cap } => write!(
                f,
                "standard error {standard_error:.3e} above cap {cap:.3e}; increase the sample count"
            ),
            CoreError::NoConvergence { what } => write!(f, "{what} did not converge"),
            CoreError::InvalidParameter { what } => write!(f, "invalid parameter: {what}"),
        }
    }
}

impl core::error::Error for CoreError {}

pub type CoreResult<T> = Result<T, CoreError>;
