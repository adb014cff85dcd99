//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by model construction and numerical evaluation.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A parameter violates its domain invariant.
    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// The requested operation is not defined for this model kind.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// Adaptive quadrature exhausted its refinement budget before reaching
    /// the requested tolerance. Carries the partial estimate.
    #[error(
        "quadrature did not converge: estimated relative error {est_rel:.3e} \
         after {panels} panels (partial value {partial:.9e})"
    )]
    QuadratureNotConverged {
        partial: f64,
        est_rel: f64,
        panels: usize,
    },

    /// The gradiometric variance underflowed to zero, so the suppression
    /// factor is not representable.
    #[error(
        "suppression factor degenerate: gradiometric variance underflowed \
         (xi = {xi_m:?} m, d = {d_m:.6e} m)"
    )]
    DegenerateSuppression { xi_m: Option<f64>, d_m: f64 },

    /// A Monte Carlo grid violates one of its sizing invariants.
    #[error("grid invariant violated: {0}")]
    GridInvariant(String),

    /// A dataset fails validation.
    #[error("dataset error: {0}")]
    Dataset(String),
}

pub type Result<T> = std::result::Result<T, Error>;
