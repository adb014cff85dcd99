//! Frequency–flux dispersion of a symmetric-SQUID transmon.
//!
//! `ω(Φ) = 2π (√(8 E_J E_C |cos(πΦ/Φ₀)|) − E_C)` with the energies given as
//! frequencies `E_J/h`, `E_C/h`. The first and second flux derivatives `D₁`,
//! `D₂` feed the dephasing model; at the sweet spot `Φ = 0` the first
//! derivative vanishes identically.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Magnetic flux quantum h/2e in Wb.
pub const FLUX_QUANTUM_WB: f64 = 2.067833848e-15;

/// `|cos(πΦ/Φ₀)|` below which the transmon approximation is rejected
/// (half-quantum degeneracy).
const COS_FLOOR: f64 = 1e-6;

/// Minimum `E_J/E_C` for the dispersion form to be meaningful.
const MIN_EJ_EC_RATIO: f64 = 20.0;

/// Symmetric-SQUID transmon dispersion parameters.
#[derive(Debug, Clone, Copy)]
pub struct TransmonDispersion {
    ej_over_h: f64,
    ec_over_h: f64,
}

impl TransmonDispersion {
    /// Both energies in Hz; requires `E_J/E_C ≥ 20` (transmon regime).
    pub fn new(ej_over_h: f64, ec_over_h: f64) -> Result<Self> {
        if !(ej_over_h.is_finite() && ej_over_h > 0.0) {
            return Err(Error::InvalidParameter {
                field: "ej_over_h",
                reason: format!("must be positive and finite, got {ej_over_h}"),
            });
        }
        if !(ec_over_h.is_finite() && ec_over_h > 0.0) {
            return Err(Error::InvalidParameter {
                field: "ec_over_h",
                reason: format!("must be positive and finite, got {ec_over_h}"),
            });
        }
        let ratio = ej_over_h / ec_over_h;
        if ratio < MIN_EJ_EC_RATIO {
            return Err(Error::InvalidParameter {
                field: "ej_over_h",
                reason: format!(
                    "transmon regime needs E_J/E_C >= {MIN_EJ_EC_RATIO}, got {ratio:.2}"
                ),
            });
        }
        Ok(Self {
            ej_over_h,
            ec_over_h,
        })
    }

    pub fn ej_over_h(&self) -> f64 {
        self.ej_over_h
    }

    pub fn ec_over_h(&self) -> f64 {
        self.ec_over_h
    }

    /// `|cos(πx)|` and its x-derivatives, with x = Φ/Φ₀ reduced to the
    /// fundamental period so the evaluation is exactly periodic and even.
    fn abs_cos_terms(&self, x: f64) -> Result<(f64, f64, f64)> {
        let xr = x - x.round();
        let u = PI * xr;
        let c = u.cos();
        let a = c.abs();
        if a <= COS_FLOOR {
            return Err(Error::InvalidParameter {
                field: "flux_bias",
                reason: format!(
                    "|cos(pi*phi/phi0)| = {a:.3e} at phi/phi0 = {x}; too close to the \
                     half-quantum degeneracy"
                ),
            });
        }
        let sign = if c >= 0.0 { 1.0 } else { -1.0 };
        let da = -sign * u.sin() * PI;
        let d2a = -a * PI * PI;
        Ok((a, da, d2a))
    }

    /// Angular transition frequency in rad/s at reduced bias `x = Φ/Φ₀`.
    pub fn omega_phi0(&self, x: f64) -> Result<f64> {
        let (a, _, _) = self.abs_cos_terms(x)?;
        let plasma = (8.0 * self.ej_over_h * self.ec_over_h).sqrt();
        Ok(2.0 * PI * (plasma * a.sqrt() - self.ec_over_h))
    }

    /// `f₀₁ = ω/2π` in Hz at reduced bias.
    pub fn f01_hz(&self, x: f64) -> Result<f64> {
        Ok(self.omega_phi0(x)? / (2.0 * PI))
    }

    /// Analytic `(D₁, D₂) = (∂ω/∂x, ∂²ω/∂x²)` in rad/s per Φ₀ and per Φ₀².
    pub fn d1_d2_phi0(&self, x: f64) -> Result<(f64, f64)> {
        let (a, da, d2a) = self.abs_cos_terms(x)?;
        let plasma = (8.0 * self.ej_over_h * self.ec_over_h).sqrt();
        let sqrt_a = a.sqrt();
        let g1 = da / (2.0 * sqrt_a);
        let g2 = d2a / (2.0 * sqrt_a) - da * da / (4.0 * a * sqrt_a);
        Ok((2.0 * PI * plasma * g1, 2.0 * PI * plasma * g2))
    }

    /// Angular frequency at a bias given in Wb.
    pub fn omega(&self, phi_wb: f64) -> Result<f64> {
        self.omega_phi0(phi_wb / FLUX_QUANTUM_WB)
    }

    /// `(D₁, D₂)` in rad/s per Wb and rad/s per Wb².
    pub fn d1_d2(&self, phi_wb: f64) -> Result<(f64, f64)> {
        let (d1, d2) = self.d1_d2_phi0(phi_wb / FLUX_QUANTUM_WB)?;
        Ok((
            d1 / FLUX_QUANTUM_WB,
            d2 / (FLUX_QUANTUM_WB * FLUX_QUANTUM_WB),
        ))
    }
}

impl Default for TransmonDispersion {
    /// `E_J/h = 20 GHz`, `E_C/h = 0.25 GHz`: a ~6 GHz sweet-spot transmon.
    fn default() -> Self {
        Self {
            ej_over_h: 2.0e10,
            ec_over_h: 2.5e8,
        }
    }
}
