//! Quasi-static Gaussian Ramsey dephasing: the flux-noise coherence factor,
//! the total decay envelope, and operational `T₂*` extraction.
//!
//! Flux noise enters through the frequency expansion
//! `δω = D₁ δΦ + ½ D₂ δΦ²` with `δΦ ~ N(0, σ²)` frozen within one shot.
//! Averaging `e^{iδω t}` over the Gaussian gives the closed-form magnitude
//! used here; the total envelope multiplies in relaxation (`Γ₁/2`) and an
//! optional bias-independent pure-dephasing rate `Γ₀`. `T₂*` is defined
//! operationally by `E(T₂*) = 1/e` and found by bracketing and bisection,
//! valid for any envelope shape.
//!
//! All functions taking plain `(d1, d2, sigma, …)` floats are unit-agnostic:
//! any flux unit works as long as the derivatives and `σ` use the same one.

use crate::error::{Error, Result};
use crate::transmon::TransmonDispersion;
use rayon::prelude::*;
use serde::Serialize;

/// Bisection tolerance for `T₂*`, relative to the bracket midpoint.
const T2_REL_TOL: f64 = 1e-9;

/// Flux unit carried by [`DephasingParams::sigma_phi`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FluxUnit {
    /// Fractions of the flux quantum.
    Phi0,
    /// Webers.
    Weber,
}

/// Energy-relaxation rate supplied either as one constant or as a table
/// `(Φ/Φ₀, Γ₁)` interpolated linearly in bias (measured `T₁` varies with
/// flux).
#[derive(Debug, Clone)]
pub enum Gamma1Source {
    Constant(f64),
    Table(Vec<(f64, f64)>),
}

impl Gamma1Source {
    fn validate(&self) -> Result<()> {
        match self {
            Gamma1Source::Constant(g) => {
                if !(g.is_finite() && *g >= 0.0) {
                    return Err(Error::InvalidParameter {
                        field: "gamma1",
                        reason: format!("must be non-negative and finite, got {g}"),
                    });
                }
            }
            Gamma1Source::Table(rows) => {
                if rows.is_empty() {
                    return Err(Error::InvalidParameter {
                        field: "gamma1_table",
                        reason: "must not be empty".into(),
                    });
                }
                if !rows.windows(2).all(|w| w[1].0 > w[0].0) {
                    return Err(Error::InvalidParameter {
                        field: "gamma1_table",
                        reason: "bias column must be strictly increasing".into(),
                    });
                }
                if rows.iter().any(|&(_, g)| !(g.is_finite() && g >= 0.0)) {
                    return Err(Error::InvalidParameter {
                        field: "gamma1_table",
                        reason: "rates must be non-negative and finite".into(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Rate at a reduced bias, clamped to the table span.
    pub fn at(&self, phi_phi0: f64) -> f64 {
        match self {
            Gamma1Source::Constant(g) => *g,
            Gamma1Source::Table(rows) => {
                if phi_phi0 <= rows[0].0 {
                    return rows[0].1;
                }
                if phi_phi0 >= rows[rows.len() - 1].0 {
                    return rows[rows.len() - 1].1;
                }
                let idx = rows.partition_point(|&(phi, _)| phi <= phi_phi0);
                let (x0, y0) = rows[idx - 1];
                let (x1, y1) = rows[idx];
                y0 + (y1 - y0) * (phi_phi0 - x0) / (x1 - x0)
            }
        }
    }
}

/// Inputs to the Ramsey envelope at one bias point.
#[derive(Debug, Clone)]
pub struct DephasingParams {
    /// RMS quasi-static flux-noise amplitude, in `sigma_unit`.
    pub sigma_phi: f64,
    pub sigma_unit: FluxUnit,
    /// Bias-independent pure-dephasing rate in 1/s.
    pub gamma0: f64,
    /// Energy-relaxation rate in 1/s.
    pub gamma1: Gamma1Source,
}

impl DephasingParams {
    pub fn new(
        sigma_phi: f64,
        sigma_unit: FluxUnit,
        gamma0: f64,
        gamma1: Gamma1Source,
    ) -> Result<Self> {
        if !(sigma_phi.is_finite() && sigma_phi >= 0.0) {
            return Err(Error::InvalidParameter {
                field: "sigma_phi",
                reason: format!("must be non-negative and finite, got {sigma_phi}"),
            });
        }
        if !(gamma0.is_finite() && gamma0 >= 0.0) {
            return Err(Error::InvalidParameter {
                field: "gamma0",
                reason: format!("must be non-negative and finite, got {gamma0}"),
            });
        }
        gamma1.validate()?;
        Ok(Self {
            sigma_phi,
            sigma_unit,
            gamma0,
            gamma1,
        })
    }
}

/// Magnitude of the flux-noise coherence factor,
/// `|W(t)| = [1 + (D₂σ²t)²]^{−1/4} · exp[−D₁²σ²t² / (2(1 + (D₂σ²t)²))]`.
pub fn coherence_factor(d1: f64, d2: f64, sigma: f64, t: f64) -> f64 {
    let quad = d2 * sigma * sigma * t;
    let denom = 1.0 + quad * quad;
    let lin = d1 * sigma * t;
    denom.powf(-0.25) * (-(lin * lin) / (2.0 * denom)).exp()
}

/// Total Ramsey envelope `E(t) = e^{−(Γ₁/2 + Γ₀)t} · |W(t)|`.
pub fn total_envelope(d1: f64, d2: f64, sigma: f64, gamma0: f64, gamma1: f64, t: f64) -> f64 {
    (-(0.5 * gamma1 + gamma0) * t).exp() * coherence_factor(d1, d2, sigma, t)
}

/// Result of a `T₂*` extraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum T2Star {
    Finite(f64),
    /// `E(t) > 1/e` for all `t`; happens only with every decay channel zero.
    Unbounded,
}

impl T2Star {
    pub fn finite(&self) -> Option<f64> {
        match self {
            T2Star::Finite(t) => Some(*t),
            T2Star::Unbounded => None,
        }
    }
}

/// Solve `E(T₂*) = 1/e` by exponential bracketing and bisection.
///
/// `E` is strictly decreasing whenever any decay channel is nonzero, so the
/// crossing is unique.
pub fn t2_star(d1: f64, d2: f64, sigma: f64, gamma0: f64, gamma1: f64) -> T2Star {
    let rate = 0.5 * gamma1 + gamma0 + d1.abs() * sigma + d2.abs() * sigma * sigma;
    if rate == 0.0 {
        return T2Star::Unbounded;
    }
    let target = (-1.0_f64).exp();
    let env = |t: f64| total_envelope(d1, d2, sigma, gamma0, gamma1, t);

    // Expand from the combined-rate guess until the envelope drops below 1/e.
    let mut hi = 1.0 / rate;
    let mut lo = 0.0;
    let mut guard = 0;
    while env(hi) > target {
        lo = hi;
        hi *= 2.0;
        guard += 1;
        if guard > 4096 {
            // All channels subnormal; treat as unbounded rather than loop.
            return T2Star::Unbounded;
        }
    }

    while hi - lo > T2_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if env(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    T2Star::Finite(0.5 * (lo + hi))
}

/// One bias point of a `T₂*(Φ)` curve.
#[derive(Debug)]
pub struct CurvePoint {
    pub phi_phi0: f64,
    pub outcome: Result<T2Star>,
}

/// Evaluate `T₂*` across a bias grid (in Φ₀ units), composing the dispersion
/// derivatives with the envelope crossing. Per-point failures (e.g. biases at
/// the half-quantum degeneracy) are recorded without aborting the sweep.
pub fn t2_star_curve(
    disp: &TransmonDispersion,
    params: &DephasingParams,
    phi_grid: &[f64],
) -> Vec<CurvePoint> {
    phi_grid
        .par_iter()
        .map(|&phi| CurvePoint {
            phi_phi0: phi,
            outcome: t2_star_at(disp, params, phi),
        })
        .collect()
}

/// `T₂*` at a single reduced bias.
pub fn t2_star_at(
    disp: &TransmonDispersion,
    params: &DephasingParams,
    phi_phi0: f64,
) -> Result<T2Star> {
    let (d1, d2) = match params.sigma_unit {
        FluxUnit::Phi0 => disp.d1_d2_phi0(phi_phi0)?,
        FluxUnit::Weber => disp.d1_d2(phi_phi0 * crate::transmon::FLUX_QUANTUM_WB)?,
    };
    let gamma1 = params.gamma1.at(phi_phi0);
    Ok(t2_star(d1, d2, params.sigma_phi, params.gamma0, gamma1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_normalization() {
        assert_eq!(coherence_factor(1e10, -2e11, 0.0, 1e-5), 1.0);
        assert_eq!(coherence_factor(1e10, -2e11, 1e-4, 0.0), 1.0);
        assert_eq!(total_envelope(0.0, 0.0, 0.0, 0.0, 0.0, 123.0), 1.0);
    }

    #[test]
    fn pure_linear_coupling_is_gaussian_decay() {
        let (d1, sigma) = (2e10, 5e-5);
        for &t in &[1e-7, 1e-6, 5e-6] {
            let got = coherence_factor(d1, 0.0, sigma, t);
            let expect = (-(d1 * sigma * t).powi(2) / 2.0).exp();
            assert!((got - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn relaxation_limited_envelope() {
        let gamma1 = 3e4;
        for &t in &[1e-6, 1e-5, 1e-4] {
            let got = total_envelope(0.0, 0.0, 0.0, 0.0, gamma1, t);
            assert!((got - (-0.5 * gamma1 * t).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn t2_closed_forms() {
        // Pure exponential: T₂* = 1/(Γ₁/2 + Γ₀).
        let t2 = t2_star(0.0, 0.0, 0.0, 1e4, 3e4).finite().unwrap();
        let expect = 1.0 / (1.5e4 + 1e4);
        assert!((t2 - expect).abs() < 1e-8 * expect);

        // Pure Gaussian: T₂* = √2/(D₁σ).
        let (d1, sigma) = (2e10, 5e-5);
        let t2 = t2_star(d1, 0.0, sigma, 0.0, 0.0).finite().unwrap();
        let expect = 2.0_f64.sqrt() / (d1 * sigma);
        assert!((t2 - expect).abs() < 1e-8 * expect);
    }

    #[test]
    fn unbounded_when_all_channels_vanish() {
        assert_eq!(t2_star(0.0, 0.0, 0.0, 0.0, 0.0), T2Star::Unbounded);
        assert_eq!(t2_star(1e10, 2e11, 0.0, 0.0, 0.0), T2Star::Unbounded);
    }

    #[test]
    fn envelope_is_monotone() {
        let (d1, d2, sigma, g0, g1) = (3e9, -2e11, 8e-5, 1e3, 2e4);
        let mut prev = f64::INFINITY;
        for i in 0..2000 {
            let t = i as f64 * 1e-7;
            let e = total_envelope(d1, d2, sigma, g0, g1, t);
            assert!(e <= prev * (1.0 + 1e-12));
            prev = e;
        }
    }

    #[test]
    fn sweet_spot_power_law() {
        // At D₁ = 0 with no exponential channels, |W|·(D₂σ²t)^{1/2} → 1.
        let (d2, sigma) = (-2e11_f64, 1e-4_f64);
        let q = d2.abs() * sigma * sigma;
        let t = 1e3 / q;
        let w = coherence_factor(0.0, d2, sigma, t);
        let scaled = w * (q * t).sqrt();
        assert!((scaled - 1.0).abs() < 1e-3, "scaled {scaled}");
    }

    #[test]
    fn gamma1_table_interpolation() {
        let table = Gamma1Source::Table(vec![(0.0, 1e4), (0.1, 3e4), (0.2, 2e4)]);
        assert_eq!(table.at(-0.5), 1e4);
        assert_eq!(table.at(0.0), 1e4);
        assert!((table.at(0.05) - 2e4).abs() < 1e-9);
        assert!((table.at(0.15) - 2.5e4).abs() < 1e-9);
        assert_eq!(table.at(0.9), 2e4);
    }

    #[test]
    fn curve_is_non_increasing_without_constant_channels() {
        let disp = TransmonDispersion::default();
        let params = DephasingParams::new(
            1e-4,
            FluxUnit::Phi0,
            0.0,
            Gamma1Source::Constant(0.0),
        )
        .unwrap();
        let grid: Vec<f64> = (0..=45).map(|i| i as f64 * 0.01).collect();
        let curve = t2_star_curve(&disp, &params, &grid);
        let mut prev = f64::INFINITY;
        for pt in &curve {
            let t2 = pt.outcome.as_ref().unwrap().finite().unwrap();
            assert!(t2 <= prev * (1.0 + 1e-9), "not monotone at {}", pt.phi_phi0);
            prev = t2;
        }
    }

    #[test]
    fn sweet_spot_t2_bounded_by_gamma0() {
        let disp = TransmonDispersion::default();
        let gamma0 = 2.5e4;
        let params =
            DephasingParams::new(1e-4, FluxUnit::Phi0, gamma0, Gamma1Source::Constant(0.0))
                .unwrap();
        let t2 = t2_star_at(&disp, &params, 0.0)
            .unwrap()
            .finite()
            .unwrap();
        assert!(t2 <= 1.0 / gamma0);
    }

    #[test]
    fn curve_records_per_point_errors() {
        let disp = TransmonDispersion::default();
        let params =
            DephasingParams::new(1e-4, FluxUnit::Phi0, 0.0, Gamma1Source::Constant(1e4))
                .unwrap();
        let curve = t2_star_curve(&disp, &params, &[0.0, 0.5, 0.2]);
        assert!(curve[0].outcome.is_ok());
        assert!(curve[1].outcome.is_err());
        assert!(curve[2].outcome.is_ok());
    }

    #[test]
    fn params_validation() {
        assert!(DephasingParams::new(-1.0, FluxUnit::Phi0, 0.0, Gamma1Source::Constant(0.0))
            .is_err());
        assert!(DephasingParams::new(1e-4, FluxUnit::Phi0, -2.0, Gamma1Source::Constant(0.0))
            .is_err());
        assert!(DephasingParams::new(
            1e-4,
            FluxUnit::Phi0,
            0.0,
            Gamma1Source::Table(vec![(0.1, 1e4), (0.0, 2e4)])
        )
        .is_err());
    }
}
