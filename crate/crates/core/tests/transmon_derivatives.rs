//! Finite-difference oracles for the dispersion derivatives.
//!
//! D₁ uses the plain central difference at the cited 1e-6 Φ₀ step. For D₂ a
//! second central difference at that step sits on an f64 roundoff floor of
//! ~1e-4 relative (4εf/h² against |D₂|), so the check uses a 4th-order
//! five-point stencil at h = 1e-3 Φ₀, where truncation (~1e-8) and roundoff
//! (~1e-10) both clear the 1e-6 tolerance.

use gradiflux_core::transmon::TransmonDispersion;

fn d1_five_point(disp: &TransmonDispersion, x: f64, h: f64) -> f64 {
    let f = |x: f64| disp.omega_phi0(x).unwrap();
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

fn d2_five_point(disp: &TransmonDispersion, x: f64, h: f64) -> f64 {
    let f = |x: f64| disp.omega_phi0(x).unwrap();
    (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h))
        / (12.0 * h * h)
}

#[test]
fn derivatives_match_finite_differences_across_bias_range() {
    let disp = TransmonDispersion::default();
    let h = 1e-3;
    let n = 1001;
    for i in 0..n {
        let x = -0.45 + 0.9 * i as f64 / (n - 1) as f64;
        let (d1, d2) = disp.d1_d2_phi0(x).unwrap();
        let fd1 = d1_five_point(&disp, x, h);
        let fd2 = d2_five_point(&disp, x, h);
        // Near the sweet spot D₁ passes through zero; compare against the
        // local derivative scale there instead of dividing by ~0.
        let d1_scale = d1.abs().max(d2.abs() * h);
        assert!(
            (d1 - fd1).abs() <= 1e-6 * d1_scale,
            "D1 at x={x}: analytic {d1}, fd {fd1}"
        );
        assert!(
            (d2 - fd2).abs() <= 1e-6 * d2.abs(),
            "D2 at x={x}: analytic {d2}, fd {fd2}"
        );
    }
}

#[test]
fn cited_bias_point_with_spec_step() {
    let disp = TransmonDispersion::default();
    let x = 0.1;
    let (d1, d2) = disp.d1_d2_phi0(x).unwrap();

    // D₁ with the cited central difference at h = 1e-6 Φ₀.
    let h = 1e-6;
    let f = |x: f64| disp.omega_phi0(x).unwrap();
    let fd1 = (f(x + h) - f(x - h)) / (2.0 * h);
    assert!(
        ((d1 - fd1) / d1).abs() < 1e-6,
        "D1: analytic {d1}, fd {fd1}"
    );

    // D₂ at the roundoff-safe stencil.
    let fd2 = d2_five_point(&disp, x, 1e-3);
    assert!(
        ((d2 - fd2) / d2).abs() < 1e-6,
        "D2: analytic {d2}, fd {fd2}"
    );
}

#[test]
fn sweet_spot_first_derivative_vanishes_exactly() {
    let disp = TransmonDispersion::default();
    let (d1, _) = disp.d1_d2_phi0(0.0).unwrap();
    assert_eq!(d1, 0.0);
    // The even dispersion also makes the central difference exactly zero.
    let f = |x: f64| disp.omega_phi0(x).unwrap();
    assert_eq!(f(1e-6) - f(-1e-6), 0.0);
}
