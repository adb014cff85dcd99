//! Sampling oracles for the Ramsey envelope: the Gaussian phase average of
//! `e^{i(D₁δ + D₂δ²/2)t}` against the closed-form coherence factor, a dense
//! grid scan for the `T₂*` crossing, and unit-consistency of the envelope
//! under Φ₀ ↔ Wb rescaling.

use gradiflux_core::numerics::special::normal_quantile;
use gradiflux_core::ramsey::{
    coherence_factor, t2_star, t2_star_at, total_envelope, DephasingParams, FluxUnit,
    Gamma1Source, T2Star,
};
use gradiflux_core::transmon::{TransmonDispersion, FLUX_QUANTUM_WB};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// |⟨e^{i(aδ + bδ²/2)}⟩| over a stratified standard normal sample.
///
/// Midpoint stratification of the quantile keeps the estimate deterministic
/// and drives the sampling error well below the iid √N floor, which at
/// N = 10⁶ would sit right at the 1e-3 tolerance for strongly dephased
/// points.
fn phase_average_stratified(a: f64, b: f64, n: usize) -> f64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for i in 0..n {
        let u = (i as f64 + 0.5) / n as f64;
        let z = normal_quantile(u);
        let phase = a * z + 0.5 * b * z * z;
        re += phase.cos();
        im += phase.sin();
    }
    let n = n as f64;
    ((re / n).powi(2) + (im / n).powi(2)).sqrt()
}

#[test]
fn coherence_factor_matches_phase_average_grid() {
    // 25 points spanning (D₁σt, D₂σ²t) ∈ [0, 10]²; realized with σ = t = 1.
    let levels = [0.0, 0.3, 1.0, 3.0, 10.0];
    let samples = 1_000_000;
    for &a in &levels {
        for &b in &levels {
            let analytic = coherence_factor(a, b, 1.0, 1.0);
            let sampled = phase_average_stratified(a, b, samples);
            assert!(
                (analytic - sampled).abs() < 1e-3,
                "(D1σt, D2σ²t) = ({a}, {b}): analytic {analytic:.6}, sampled {sampled:.6}"
            );
        }
    }
}

#[test]
fn coherence_factor_matches_iid_monte_carlo() {
    // Plain seeded iid sampling on a moderately dephased point.
    let (a, b) = (1.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(20240817);
    let normal = StandardNormal;
    let n = 1_000_000;
    let mut re = 0.0;
    let mut im = 0.0;
    for _ in 0..n {
        let z: f64 = normal.sample(&mut rng);
        let phase = a * z + 0.5 * b * z * z;
        re += phase.cos();
        im += phase.sin();
    }
    let sampled = ((re / n as f64).powi(2) + (im / n as f64).powi(2)).sqrt();
    let analytic = coherence_factor(a, b, 1.0, 1.0);
    assert!(
        (analytic - sampled).abs() < 1e-3,
        "analytic {analytic:.6}, sampled {sampled:.6}"
    );
}

/// Dense-grid scan with linear interpolation of the 1/e crossing.
fn t2_grid_scan(d1: f64, d2: f64, sigma: f64, gamma0: f64, gamma1: f64, t_max: f64) -> f64 {
    let n = 10_000_000_usize;
    let target = (-1.0_f64).exp();
    let mut prev_t = 0.0;
    let mut prev_e = 1.0;
    for i in 1..=n {
        let t = t_max * i as f64 / n as f64;
        let e = total_envelope(d1, d2, sigma, gamma0, gamma1, t);
        if e <= target {
            // Linear interpolation between the last bracket points.
            return prev_t + (prev_e - target) / (prev_e - e) * (t - prev_t);
        }
        prev_t = t;
        prev_e = e;
    }
    panic!("no crossing found below t_max");
}

#[test]
fn t2_star_matches_grid_scan() {
    let cases = [
        (2e10, -2e11, 5e-5, 0.0, 3.3e4),
        (0.0, -2e11, 1e-4, 1e4, 2e4),
        (5e9, -1e11, 8e-5, 2e4, 5e4),
    ];
    for (d1, d2, sigma, gamma0, gamma1) in cases {
        let bisected = match t2_star(d1, d2, sigma, gamma0, gamma1) {
            T2Star::Finite(t) => t,
            T2Star::Unbounded => panic!("expected finite T2*"),
        };
        let scanned = t2_grid_scan(d1, d2, sigma, gamma0, gamma1, 4.0 * bisected);
        let rel = ((bisected - scanned) / scanned).abs();
        assert!(
            rel < 1e-6,
            "bisected {bisected:.9e} vs scanned {scanned:.9e} (rel {rel:.2e})"
        );
    }
}

#[test]
fn envelope_is_unit_consistent() {
    let disp = TransmonDispersion::default();
    let sigma_phi0 = 7.3e-5;
    for &x in &[0.0, 0.04, 0.17, 0.31] {
        let (d1_p, d2_p) = disp.d1_d2_phi0(x).unwrap();
        let (d1_w, d2_w) = disp.d1_d2(x * FLUX_QUANTUM_WB).unwrap();
        let sigma_wb = sigma_phi0 * FLUX_QUANTUM_WB;
        for &t in &[1e-6, 8e-6, 4e-5] {
            let e_phi0 = total_envelope(d1_p, d2_p, sigma_phi0, 1e4, 3e4, t);
            let e_wb = total_envelope(d1_w, d2_w, sigma_wb, 1e4, 3e4, t);
            assert!(
                (e_phi0 - e_wb).abs() <= 1e-12 * e_phi0.abs().max(1e-300),
                "x={x}, t={t}: {e_phi0} vs {e_wb}"
            );
        }
    }

    // The curve-level API agrees between unit conventions too.
    let p_phi0 = DephasingParams::new(
        sigma_phi0,
        FluxUnit::Phi0,
        1e4,
        Gamma1Source::Constant(3e4),
    )
    .unwrap();
    let p_wb = DephasingParams::new(
        sigma_phi0 * FLUX_QUANTUM_WB,
        FluxUnit::Weber,
        1e4,
        Gamma1Source::Constant(3e4),
    )
    .unwrap();
    for &x in &[0.0, 0.1, 0.3] {
        let a = t2_star_at(&disp, &p_phi0, x).unwrap().finite().unwrap();
        let b = t2_star_at(&disp, &p_wb, x).unwrap().finite().unwrap();
        assert!(((a - b) / a).abs() < 1e-9);
    }
}
