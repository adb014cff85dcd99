//! Spatial magnetization-noise spectra and their real-space correlation
//! functions.
//!
//! The Gaussian-correlated model `S_m(k; ξ) = A ξ² e^{−k²ξ²}` describes
//! magnetization patches correlated over a length `ξ`; its 2D transform pair
//! is the real-space correlation `C_m(r) = A e^{−r²/(4ξ²)} / 4π`. The white
//! model `S_m(k) = S₀` is the uncorrelated (independent-spin) limit with a
//! delta-function correlation.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Spatial noise spectrum of the out-of-plane surface magnetization.
///
/// Implementations are pure; `density` must be a valid (non-negative) power
/// spectrum.
pub trait MagnetizationSpectrum: Send + Sync {
    /// Registry name of the model.
    fn name(&self) -> &'static str;

    /// Spectral density `S_m(k)` at radial wavenumber `k` (isotropic).
    fn density(&self, k: f64) -> f64;

    /// Real-space correlation `C_m(r)` at separation `r ≥ 0`.
    fn correlation(&self, r: f64) -> Result<f64>;

    /// Overall amplitude prefactor.
    fn amplitude(&self) -> f64;

    /// Correlation length `ξ`, if the model has one.
    fn correlation_length(&self) -> Option<f64>;
}

/// Gaussian-correlated magnetization noise, `S_m(k; ξ) = A ξ² e^{−k²ξ²}`.
#[derive(Debug, Clone, Copy)]
pub struct GaussianCorrelated {
    correlation_length: f64,
    amplitude: f64,
}

impl GaussianCorrelated {
    pub fn new(correlation_length: f64, amplitude: f64) -> Result<Self> {
        if !(correlation_length.is_finite() && correlation_length > 0.0) {
            return Err(Error::InvalidParameter {
                field: "correlation_length",
                reason: format!("must be positive and finite, got {correlation_length}"),
            });
        }
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(Error::InvalidParameter {
                field: "amplitude",
                reason: format!("must be non-negative and finite, got {amplitude}"),
            });
        }
        Ok(Self {
            correlation_length,
            amplitude,
        })
    }
}

impl MagnetizationSpectrum for GaussianCorrelated {
    fn name(&self) -> &'static str {
        "gaussian"
    }

    fn density(&self, k: f64) -> f64 {
        let xi = self.correlation_length;
        let kx = k.abs() * xi;
        self.amplitude * xi * xi * (-kx * kx).exp()
    }

    fn correlation(&self, r: f64) -> Result<f64> {
        let xi = self.correlation_length;
        Ok(self.amplitude * (-(r * r) / (4.0 * xi * xi)).exp() / (4.0 * PI))
    }

    fn amplitude(&self) -> f64 {
        self.amplitude
    }

    fn correlation_length(&self) -> Option<f64> {
        Some(self.correlation_length)
    }
}

/// White (uncorrelated, independent-spin) magnetization noise, `S_m(k) = S₀`.
#[derive(Debug, Clone, Copy)]
pub struct White {
    amplitude: f64,
}

impl White {
    pub fn new(amplitude: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(Error::InvalidParameter {
                field: "amplitude",
                reason: format!("must be non-negative and finite, got {amplitude}"),
            });
        }
        Ok(Self { amplitude })
    }
}

impl MagnetizationSpectrum for White {
    fn name(&self) -> &'static str {
        "white"
    }

    fn density(&self, _k: f64) -> f64 {
        self.amplitude
    }

    fn correlation(&self, r: f64) -> Result<f64> {
        if r == 0.0 {
            // The delta-function correlation has no pointwise value at the
            // origin.
            Err(Error::Unsupported(
                "white noise has a delta-function correlation; C_m(0) is not pointwise defined"
                    .into(),
            ))
        } else {
            Ok(0.0)
        }
    }

    fn amplitude(&self) -> f64 {
        self.amplitude
    }

    fn correlation_length(&self) -> Option<f64> {
        None
    }
}
