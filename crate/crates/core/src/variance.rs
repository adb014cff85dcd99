//! Momentum-space flux-variance integrals and the geometry-induced
//! suppression factor.
//!
//! The central quantity is
//! `⟨Φ²⟩ = (2π)⁻¹ ∫₀^∞ ⟨|K̃(k,θ)|²⟩_θ · S_m(k; ξ) · k dk`,
//! the 2D momentum integral reduced to radial form through the angular
//! average of the geometry filter. Gaussian-correlated spectra truncate the
//! domain where the integrand falls below 1e−12 of its peak; the white
//! spectrum decays only as `k⁻²` (times the annulus-filter oscillation), so
//! its high-k tail is integrated analytically from two-term Bessel
//! asymptotics.

use crate::error::{Error, Result};
use crate::geometry::{GradiometricPair, SensitivityKernel, SingleRing};
use crate::numerics::quad::{adaptive, capped_edges, QuadResult};
use crate::numerics::special::{tail_cos_over_k2, tail_sin_over_k2};
use crate::spectrum::{GaussianCorrelated, MagnetizationSpectrum};
use serde::Serialize;
use std::f64::consts::PI;

/// Relative tolerance the adaptive refinement aims for.
const QUAD_TARGET_REL: f64 = 1e-9;
/// Relative error the result must reach to count as converged.
const CONTRACT_REL: f64 = 1e-6;
/// Integrand values below this fraction of the peak truncate the domain.
const TRUNCATION_RATIO: f64 = 1e-12;
/// Budget for the initial panel list.
const MAX_INITIAL_PANELS: usize = 2_000_000;
/// Extra panels the adaptive refinement may add.
const REFINE_BUDGET: usize = 200_000;

/// Wavelength regime of a variance evaluation, assigned from the ratio of the
/// correlation length to the geometry's cancellation scale (sub-loop
/// separation `d` for the pair, loop diameter `2R` for a single ring).
/// Diagnostic only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    ShortWavelength,
    Crossover,
    LongWavelength,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::ShortWavelength => "short_wavelength",
            Regime::Crossover => "crossover",
            Regime::LongWavelength => "long_wavelength",
        }
    }
}

/// Flux variance with its quadrature error estimate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VarianceResult {
    /// `⟨Φ²⟩` in Wb².
    pub value: f64,
    /// Conservative absolute error estimate, at most `1e-6 × value` on
    /// convergence.
    pub estimated_quadrature_error: f64,
    pub regime: Regime,
}

fn regime_for(kernel: &dyn SensitivityKernel, spectrum: &dyn MagnetizationSpectrum) -> Regime {
    let scale = match kernel.separation() {
        Some(d) if d > 0.0 => d,
        _ => 2.0 * kernel.ring().radius,
    };
    match spectrum.correlation_length() {
        // White noise is the zero-correlation-length limit.
        None => Regime::ShortWavelength,
        Some(xi) => {
            let ratio = xi / scale;
            if ratio < 0.1 {
                Regime::ShortWavelength
            } else if ratio > 10.0 {
                Regime::LongWavelength
            } else {
                Regime::Crossover
            }
        }
    }
}

/// Panel-width cap keeping the fastest integrand oscillation (`2R₂` from the
/// squared annulus filter, `d` from the pair interference) below half a
/// period per panel.
fn oscillation_cap(kernel: &dyn SensitivityKernel) -> f64 {
    let r2 = kernel.ring().outer_radius();
    let d = kernel.separation().unwrap_or(0.0);
    PI / (2.0 * (r2 + d))
}

/// Scan the integrand on a log grid and return the truncation wavenumber
/// where it has fallen below `TRUNCATION_RATIO` of its peak.
fn gaussian_truncation<F: Fn(f64) -> f64>(f: &F, kernel: &dyn SensitivityKernel, xi: f64) -> f64 {
    let r2 = kernel.ring().outer_radius();
    let mut inv_scales = vec![1.0 / xi, 1.0 / r2];
    if let Some(d) = kernel.separation() {
        if d > 0.0 {
            inv_scales.push(1.0 / d);
        }
    }
    let k_lo = 1e-3 * inv_scales.iter().cloned().fold(f64::INFINITY, f64::min);
    let k_hi = 8.0 / xi;

    const SCAN: usize = 2048;
    let ratio = (k_hi / k_lo).ln() / (SCAN - 1) as f64;
    let grid: Vec<f64> = (0..SCAN).map(|i| k_lo * (ratio * i as f64).exp()).collect();
    let vals: Vec<f64> = grid.iter().map(|&k| f(k)).collect();

    let (peak_idx, peak) = vals
        .iter()
        .enumerate()
        .fold((0, 0.0_f64), |(bi, bv), (i, &v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        });
    if peak <= 0.0 {
        return k_hi;
    }
    let threshold = TRUNCATION_RATIO * peak;
    for i in peak_idx..SCAN {
        if vals[i] < threshold {
            return grid[i];
        }
    }
    k_hi
}

fn run_adaptive<F: Fn(f64) -> f64>(f: &F, k_max: f64, cap: f64) -> Result<QuadResult> {
    let count = (k_max / cap).ceil().max(1.0);
    if count > MAX_INITIAL_PANELS as f64 {
        return Err(Error::QuadratureNotConverged {
            partial: 0.0,
            est_rel: f64::INFINITY,
            panels: count as usize,
        });
    }
    let edges = capped_edges(k_max, cap);
    Ok(adaptive(f, &edges, QUAD_TARGET_REL, edges.len() + REFINE_BUDGET))
}

/// Analytic `∫_T^∞ |K̃(k)|² S₀ k dk` for one annulus against a flat spectrum,
/// from the two-term large-argument form of `J₁`. Returns the tail value and
/// a bound on its own error.
fn white_single_tail(
    r1: f64,
    r2: f64,
    amplitude: f64,
    s0: f64,
    t: f64,
) -> (f64, f64) {
    let w = r2 - r1;
    let prefactor = 8.0 * PI * amplitude * amplitude * s0;
    let sqrt_r1r2 = (r1 * r2).sqrt();
    let bracket = (r1 + r2) / (2.0 * t)
        - 0.5 * r2 * tail_sin_over_k2(2.0 * r2, t)
        - 0.5 * r1 * tail_sin_over_k2(2.0 * r1, t)
        - sqrt_r1r2 * tail_cos_over_k2(w, t)
        + sqrt_r1r2 * tail_sin_over_k2(r1 + r2, t);
    let tail = prefactor * bracket;
    // The dropped next order of the J₁ expansion integrates to
    // O(√(R₂/R₁)/T²) against the prefactor; the factor 2 is slack.
    let err = 2.0 * prefactor * (r2 / r1).sqrt() / (t * t);
    (tail, err.abs())
}

/// Truncation wavenumber for the white-spectrum quadrature: deep enough that
/// the Si/Ci asymptotics apply and the analytic-tail error fits the
/// convergence budget.
fn white_truncation(kernel: &dyn SensitivityKernel) -> f64 {
    let ring = kernel.ring();
    let r1 = ring.inner_radius();
    let r2 = ring.outer_radius();
    let w = ring.width;
    // Si/Ci asymptotic floor: the smallest argument is min(2R₁, w)·T ≥ 20.
    let t_floor = 20.0 / (2.0 * r1).min(w);
    // J₁ next-order error ≤ 2e-7 of the integral (which is 2π²α²S₀(R₂²−R₁²)).
    let t_j1 = (8.0 * (r2 / r1).sqrt() / (2e-7 * PI * (r2 * r2 - r1 * r1))).sqrt();
    let mut t = t_floor.max(t_j1);
    if let Some(d) = kernel.separation() {
        // Keep the unevaluated J₀ tail of the pair filter below 3e-7 of the
        // integral: the bound scales as T^{-3/2}.
        let t_j0 = ((8.0 / (3.0 * PI)) * (2.0 / (PI * d)).sqrt() / (w * 3e-7)).powf(2.0 / 3.0);
        t = t.max(t_j0);
    }
    t
}

/// White-spectrum evaluation: adaptive quadrature up to `T`, analytic tail
/// beyond.
fn white_variance(
    kernel: &dyn SensitivityKernel,
    spectrum: &dyn MagnetizationSpectrum,
) -> Result<(f64, f64, usize)> {
    let ring = kernel.ring();
    let r1 = ring.inner_radius();
    let r2 = ring.outer_radius();
    let s0 = spectrum.amplitude();

    let t = white_truncation(kernel);
    let f = |k: f64| kernel.angular_average_filter(k) * spectrum.density(k) * k;
    let quad = run_adaptive(&f, t, oscillation_cap(kernel))?;

    let (tail_single, tail_single_err) = white_single_tail(r1, r2, ring.amplitude, s0, t);
    let (tail, mut tail_err) = match kernel.separation() {
        None => (tail_single, tail_single_err),
        Some(d) => {
            // Pair filter = 2(1 − J₀(kd)) × single. The −J₀ part is left out
            // of the analytic tail; bound it by the filter envelope times the
            // J₀ envelope.
            let amp = ring.amplitude;
            let j0_bound = 32.0 * PI * amp * amp * s0 * (r1 + r2)
                * (2.0 / (PI * d)).sqrt()
                * (2.0 / 3.0)
                * t.powf(-1.5);
            (2.0 * tail_single, 2.0 * tail_single_err + j0_bound)
        }
    };
    tail_err += tail.abs() * 1e-9; // Si/Ci truncation slack

    let value = (quad.value + tail) / (2.0 * PI);
    let est = (quad.abs_error + tail_err) / (2.0 * PI);
    Ok((value, est, quad.panels))
}

fn gaussian_variance(
    kernel: &dyn SensitivityKernel,
    spectrum: &dyn MagnetizationSpectrum,
    xi: f64,
) -> Result<(f64, f64, usize)> {
    let f = |k: f64| kernel.angular_average_filter(k) * spectrum.density(k) * k;
    let k_max = gaussian_truncation(&f, kernel, xi);
    let quad = run_adaptive(&f, k_max, oscillation_cap(kernel))?;
    Ok((quad.value / (2.0 * PI), quad.abs_error / (2.0 * PI), quad.panels))
}

/// Evaluate `⟨Φ²⟩` for a geometry against a noise spectrum.
pub fn flux_variance(
    kernel: &dyn SensitivityKernel,
    spectrum: &dyn MagnetizationSpectrum,
) -> Result<VarianceResult> {
    let regime = regime_for(kernel, spectrum);

    // Exact zeros: no noise, or coincident counter-wound loops.
    let degenerate_pair = matches!(kernel.separation(), Some(d) if d == 0.0);
    if spectrum.amplitude() == 0.0 || degenerate_pair {
        return Ok(VarianceResult {
            value: 0.0,
            estimated_quadrature_error: 0.0,
            regime,
        });
    }

    let (value, est, panels) = match spectrum.correlation_length() {
        Some(xi) => gaussian_variance(kernel, spectrum, xi)?,
        None => white_variance(kernel, spectrum)?,
    };

    if est > CONTRACT_REL * value.abs() {
        return Err(Error::QuadratureNotConverged {
            partial: value,
            est_rel: est / value.abs().max(f64::MIN_POSITIVE),
            panels,
        });
    }
    Ok(VarianceResult {
        value,
        estimated_quadrature_error: est,
        regime,
    })
}

/// Geometry-induced suppression factor `S(ξ) = ⟨Φ_X²⟩ / ⟨Φ₈²⟩` for a single
/// ring and a counter-wound pair sharing the same annulus parameters.
pub fn suppression_factor(
    ring: crate::geometry::RingSpec,
    separation: f64,
    spectrum: &dyn MagnetizationSpectrum,
) -> Result<f64> {
    if separation.is_nan() || separation <= 0.0 {
        return Err(Error::InvalidParameter {
            field: "separation",
            reason: format!("suppression factor needs d > 0, got {separation}"),
        });
    }
    let single = SingleRing::new(ring);
    let pair = GradiometricPair::new(ring, separation)?;
    let var_x = flux_variance(&single, spectrum)?;
    let var_8 = flux_variance(&pair, spectrum)?;
    if var_8.value <= f64::MIN_POSITIVE {
        return Err(Error::DegenerateSuppression {
            xi_m: spectrum.correlation_length(),
            d_m: separation,
        });
    }
    Ok(var_x.value / var_8.value)
}

/// One point of a correlation-length sweep.
#[derive(Debug)]
pub struct SweepPoint {
    pub xi: f64,
    pub outcome: Result<VarianceResult>,
}

/// Evaluate `⟨Φ²⟩` on a grid of correlation lengths with a Gaussian-correlated
/// spectrum of fixed amplitude. Per-point failures are recorded without
/// aborting the sweep.
pub fn variance_sweep(
    kernel: &dyn SensitivityKernel,
    xi_grid: &[f64],
    amplitude: f64,
) -> Result<Vec<SweepPoint>> {
    if xi_grid.is_empty() {
        return Err(Error::InvalidParameter {
            field: "xi_grid",
            reason: "must not be empty".into(),
        });
    }
    if !xi_grid.iter().all(|&x| x.is_finite() && x > 0.0)
        || !xi_grid.windows(2).all(|w| w[1] > w[0])
    {
        return Err(Error::InvalidParameter {
            field: "xi_grid",
            reason: "must be strictly increasing and positive".into(),
        });
    }
    Ok(xi_grid
        .iter()
        .map(|&xi| {
            let outcome = GaussianCorrelated::new(xi, amplitude)
                .and_then(|spec| flux_variance(kernel, &spec));
            SweepPoint { xi, outcome }
        })
        .collect())
}
