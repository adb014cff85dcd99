//! Small special-function helpers: sine/cosine integrals at large argument
//! (for the analytic high-k tail of white-noise variance integrals) and the
//! standard normal quantile (for stratified sampling oracles).

use std::f64::consts::FRAC_PI_2;

/// Minimum argument for the asymptotic Si/Ci expansions used here.
pub const SICI_ASYMPTOTIC_MIN: f64 = 20.0;

// Auxiliary functions f(x), g(x) with
//   Si(x) = π/2 − f cos x − g sin x,  Ci(x) = f sin x − g cos x,
// using the standard asymptotic series through 8! (valid for x ≳ 20).
fn aux_fg(x: f64) -> (f64, f64) {
    let u = 1.0 / (x * x);
    let f = (1.0 - u * (2.0 - u * (24.0 - u * (720.0 - u * 40320.0)))) / x;
    let g = (1.0 - u * (6.0 - u * (120.0 - u * (5040.0 - u * 362880.0)))) * u;
    (f, g)
}

/// Sine integral `Si(x) = ∫₀ˣ sin t / t dt` for `x ≥ 20`.
pub fn si_large(x: f64) -> f64 {
    debug_assert!(x >= SICI_ASYMPTOTIC_MIN);
    let (f, g) = aux_fg(x);
    FRAC_PI_2 - f * x.cos() - g * x.sin()
}

/// Cosine integral `Ci(x) = −∫ₓ^∞ cos t / t dt` for `x ≥ 20`.
pub fn ci_large(x: f64) -> f64 {
    debug_assert!(x >= SICI_ASYMPTOTIC_MIN);
    let (f, g) = aux_fg(x);
    f * x.sin() - g * x.cos()
}

/// `∫_T^∞ sin(a k) / k² dk` for `a T ≥ 20`.
pub fn tail_sin_over_k2(a: f64, t: f64) -> f64 {
    (a * t).sin() / t - a * ci_large(a * t)
}

/// `∫_T^∞ cos(a k) / k² dk` for `a T ≥ 20`.
pub fn tail_cos_over_k2(a: f64, t: f64) -> f64 {
    (a * t).cos() / t - a * (FRAC_PI_2 - si_large(a * t))
}

/// Standard normal quantile (inverse CDF), Acklam's rational approximation.
///
/// Relative accuracy about 1.2e-9 over (0, 1); panics outside the open unit
/// interval.
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile needs p in (0, 1)");

    #[allow(clippy::excessive_precision)]
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    #[allow(clippy::excessive_precision)]
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    #[allow(clippy::excessive_precision)]
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    #[allow(clippy::excessive_precision)]
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}
