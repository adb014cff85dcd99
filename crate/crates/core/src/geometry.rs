//! Idealized loop geometries and their flux sensitivity kernels.
//!
//! A loop is modeled as a uniform-weight annulus of mean radius `R` and
//! radial width `w`: the kernel `K(r)` equals the coupling amplitude inside
//! the band and zero elsewhere. The single-ring layout uses one such annulus;
//! the gradiometric layout uses two identical, counter-wound annuli whose
//! centers sit `d` apart along the x axis, so
//! `K₈(r) = K_ring(r + d/2·x̂) − K_ring(r − d/2·x̂)`.
//!
//! In momentum space the annulus transform is closed-form,
//! `K̃(k) = 2πA · [R₂ J₁(kR₂) − R₁ J₁(kR₁)] / k`, and the counter-wound pair
//! picks up the interference factor `|K̃₈|² = 4|K̃|² sin²(k·d/2)`.

use crate::error::{Error, Result};
use libm::{j0, j1};
use std::f64::consts::PI;

/// `k·R` below which the annulus transform switches to its analytic `k → 0`
/// limit instead of evaluating `J₁(kR)/k`.
const SMALL_KR_LIMIT: f64 = 1e-8;

/// Shared annulus parameters of one loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingSpec {
    /// Mean radius `R` in meters.
    pub radius: f64,
    /// Radial width `w` of the sensitive band in meters, `0 < w < 2R`.
    pub width: f64,
    /// Uniform kernel weight inside the band (flux per magnetization per
    /// unit area).
    pub amplitude: f64,
}

impl RingSpec {
    pub fn new(radius: f64, width: f64, amplitude: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter {
                field: "ring_radius",
                reason: format!("must be positive and finite, got {radius}"),
            });
        }
        if !(width.is_finite() && width > 0.0 && width < 2.0 * radius) {
            return Err(Error::InvalidParameter {
                field: "annulus_width",
                reason: format!("must satisfy 0 < w < 2R, got w = {width}, R = {radius}"),
            });
        }
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(Error::InvalidParameter {
                field: "coupling_amplitude",
                reason: format!("must be positive and finite, got {amplitude}"),
            });
        }
        Ok(Self {
            radius,
            width,
            amplitude,
        })
    }

    /// Inner radius `R₁ = R − w/2`.
    pub fn inner_radius(&self) -> f64 {
        self.radius - 0.5 * self.width
    }

    /// Outer radius `R₂ = R + w/2`.
    pub fn outer_radius(&self) -> f64 {
        self.radius + 0.5 * self.width
    }

    /// Annulus area `π(R₂² − R₁²)`.
    pub fn area(&self) -> f64 {
        let r1 = self.inner_radius();
        let r2 = self.outer_radius();
        PI * (r2 * r2 - r1 * r1)
    }

    /// Fourier transform of one annulus centered at the origin (real-valued).
    pub fn transform(&self, k: f64) -> f64 {
        let k = k.abs();
        let r1 = self.inner_radius();
        let r2 = self.outer_radius();
        if k * r2 < SMALL_KR_LIMIT {
            return self.amplitude * self.area();
        }
        self.amplitude * 2.0 * PI * (r2 * j1(k * r2) - r1 * j1(k * r1)) / k
    }

    /// `|K̃(k)|²` of one annulus.
    pub fn transform_sq(&self, k: f64) -> f64 {
        let t = self.transform(k);
        t * t
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        let rho2 = x * x + y * y;
        let r1 = self.inner_radius();
        let r2 = self.outer_radius();
        (r1 * r1..=r2 * r2).contains(&rho2)
    }
}

/// Momentum-space filter and real-space kernel of a loop layout.
///
/// Implementations are pure and immutable; they may be shared freely across
/// threads.
pub trait SensitivityKernel: Send + Sync {
    /// Registry name of the layout.
    fn name(&self) -> &'static str;

    /// Annulus parameters shared by all sub-loops.
    fn ring(&self) -> &RingSpec;

    /// Center-to-center sub-loop separation, if the layout has one.
    fn separation(&self) -> Option<f64>;

    /// `K(r)` at a position in meters.
    fn kernel_real(&self, r: [f64; 2]) -> f64;

    /// `|K̃(k)|²` at a wavevector in 1/m.
    fn filter_sq(&self, k: [f64; 2]) -> f64;

    /// Angular average `(1/2π) ∮ |K̃(k,θ)|² dθ` at radial wavenumber `k`.
    fn angular_average_filter(&self, k: f64) -> f64;

    /// Radius of the disc containing the kernel support.
    fn support_radius(&self) -> f64;

    /// `2R + d` (with `d = 0` for a single ring); sets the Monte Carlo
    /// domain-size rule.
    fn footprint(&self) -> f64;

    /// `∫ K(r)² d²r` in closed form.
    fn kernel_l2(&self) -> f64;
}

/// Single-ring layout (conventional tunable-transmon SQUID idealization).
#[derive(Debug, Clone, Copy)]
pub struct SingleRing {
    ring: RingSpec,
}

impl SingleRing {
    pub fn new(ring: RingSpec) -> Self {
        Self { ring }
    }
}

impl SensitivityKernel for SingleRing {
    fn name(&self) -> &'static str {
        "single_ring"
    }

    fn ring(&self) -> &RingSpec {
        &self.ring
    }

    fn separation(&self) -> Option<f64> {
        None
    }

    fn kernel_real(&self, r: [f64; 2]) -> f64 {
        if self.ring.contains(r[0], r[1]) {
            self.ring.amplitude
        } else {
            0.0
        }
    }

    fn filter_sq(&self, k: [f64; 2]) -> f64 {
        self.ring.transform_sq((k[0] * k[0] + k[1] * k[1]).sqrt())
    }

    fn angular_average_filter(&self, k: f64) -> f64 {
        // Isotropic: the angular average is the filter itself.
        self.ring.transform_sq(k)
    }

    fn support_radius(&self) -> f64 {
        self.ring.outer_radius()
    }

    fn footprint(&self) -> f64 {
        2.0 * self.ring.radius
    }

    fn kernel_l2(&self) -> f64 {
        let a = self.ring.amplitude;
        a * a * self.ring.area()
    }
}

/// Counter-wound double-loop layout: two identical annuli at `±d/2` along x
/// with opposite winding.
#[derive(Debug, Clone, Copy)]
pub struct GradiometricPair {
    ring: RingSpec,
    separation: f64,
}

impl GradiometricPair {
    pub fn new(ring: RingSpec, separation: f64) -> Result<Self> {
        if !(separation.is_finite() && separation >= 0.0) {
            return Err(Error::InvalidParameter {
                field: "separation",
                reason: format!("must be non-negative and finite, got {separation}"),
            });
        }
        Ok(Self { ring, separation })
    }
}

impl SensitivityKernel for GradiometricPair {
    fn name(&self) -> &'static str {
        "gradiometric_pair"
    }

    fn ring(&self) -> &RingSpec {
        &self.ring
    }

    fn separation(&self) -> Option<f64> {
        Some(self.separation)
    }

    fn kernel_real(&self, r: [f64; 2]) -> f64 {
        let half = 0.5 * self.separation;
        let mut value = 0.0;
        if self.ring.contains(r[0] + half, r[1]) {
            value += self.ring.amplitude;
        }
        if self.ring.contains(r[0] - half, r[1]) {
            value -= self.ring.amplitude;
        }
        value
    }

    fn filter_sq(&self, k: [f64; 2]) -> f64 {
        let k_mag = (k[0] * k[0] + k[1] * k[1]).sqrt();
        let phase = (0.5 * k[0] * self.separation).sin();
        4.0 * self.ring.transform_sq(k_mag) * phase * phase
    }

    fn angular_average_filter(&self, k: f64) -> f64 {
        // ⟨sin²(k d cosθ / 2)⟩_θ = (1 − J₀(kd)) / 2 exactly.
        2.0 * self.ring.transform_sq(k) * (1.0 - j0(k.abs() * self.separation))
    }

    fn support_radius(&self) -> f64 {
        0.5 * self.separation + self.ring.outer_radius()
    }

    fn footprint(&self) -> f64 {
        2.0 * self.ring.radius + self.separation
    }

    fn kernel_l2(&self) -> f64 {
        // ∫K₈² = 2A²(annulus area − annulus overlap): the kernels cancel
        // exactly where the two bands intersect.
        let a = self.ring.amplitude;
        let overlap = annulus_overlap_area(
            self.ring.inner_radius(),
            self.ring.outer_radius(),
            self.separation,
        );
        2.0 * a * a * (self.ring.area() - overlap)
    }
}

/// Intersection area of two discs of radii `r1`, `r2` with centers `d` apart.
fn disc_intersection_area(r1: f64, r2: f64, d: f64) -> f64 {
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return PI * r * r;
    }
    let alpha = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0);
    let beta = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0);
    let tri = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
    r1 * r1 * alpha.acos() + r2 * r2 * beta.acos() - 0.5 * tri.max(0.0).sqrt()
}

/// Intersection area of two annuli `R₁ ≤ ρ ≤ R₂` with centers `d` apart.
fn annulus_overlap_area(r1: f64, r2: f64, d: f64) -> f64 {
    disc_intersection_area(r2, r2, d) - 2.0 * disc_intersection_area(r2, r1, d)
        + disc_intersection_area(r1, r1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_ring() -> RingSpec {
        RingSpec::new(5e-6, 1e-6, 1.0).unwrap()
    }

    #[test]
    fn ring_validation() {
        assert!(RingSpec::new(5e-6, 1e-5, 1.0).is_err()); // w = 2R
        assert!(RingSpec::new(0.0, 1e-6, 1.0).is_err());
        assert!(RingSpec::new(5e-6, 1e-6, 0.0).is_err());
        assert!(RingSpec::new(5e-6, -1e-6, 1.0).is_err());
        assert!(GradiometricPair::new(default_ring(), -1.0).is_err());
    }

    #[test]
    fn kernel_real_single_ring_band() {
        let g = SingleRing::new(default_ring());
        // On the mean radius: inside the band.
        assert_eq!(g.kernel_real([5e-6, 0.0]), 1.0);
        assert_eq!(g.kernel_real([0.0, -5e-6]), 1.0);
        // At the origin: outside, since w < 2R.
        assert_eq!(g.kernel_real([0.0, 0.0]), 0.0);
        // Far outside.
        assert_eq!(g.kernel_real([1e-5, 1e-5]), 0.0);
    }

    #[test]
    fn kernel_real_pair_cancels_on_bisector() {
        let g = GradiometricPair::new(default_ring(), 8e-6).unwrap();
        // Points on the perpendicular bisector (x = 0) sit at equal distance
        // from both centers: equal and opposite contributions cancel.
        for y in [3e-6, 4.5e-6, -3.5e-6] {
            let d_from_center = ((4e-6_f64).powi(2) + y * y).sqrt();
            if (4.5e-6..=5.5e-6).contains(&d_from_center) {
                assert_eq!(g.kernel_real([0.0, y]), 0.0);
            }
        }
        // Off the bisector inside only the left band the sign is positive.
        assert_eq!(g.kernel_real([-4e-6 + 5e-6, 0.0]), 1.0);
        assert_eq!(g.kernel_real([4e-6 + 5e-6, 0.0]), -1.0);
    }

    #[test]
    fn filter_zero_frequency_is_area_squared() {
        let ring = default_ring();
        let g = SingleRing::new(ring);
        let expect = ring.area();
        assert!((g.filter_sq([0.0, 0.0]) - expect * expect).abs() < 1e-12 * expect * expect);
    }

    #[test]
    fn pair_with_zero_separation_vanishes() {
        let g = GradiometricPair::new(default_ring(), 0.0).unwrap();
        for k in [[0.0, 0.0], [1e5, 0.0], [2e5, 3e5], [0.0, 9e5]] {
            assert_eq!(g.filter_sq(k), 0.0);
        }
        // Zero up to rounding between two algebraically equal area formulas.
        let scale = 2.0 * default_ring().area();
        assert!(g.kernel_l2().abs() < 1e-12 * scale);
    }

    #[test]
    fn gradiometric_identity_exact() {
        let ring = default_ring();
        let single = SingleRing::new(ring);
        let pair = GradiometricPair::new(ring, 1e-5).unwrap();
        for kx in [0.0, 3e4, 1.7e5, 2.2e6] {
            for ky in [0.0, 5e4, 9e5] {
                let k = [kx, ky];
                let phase = (0.5 * kx * 1e-5_f64).sin();
                let expect = 4.0 * single.filter_sq(k) * phase * phase;
                assert_eq!(pair.filter_sq(k), expect);
            }
        }
    }

    #[test]
    fn zero_mode_rejection_for_all_separations() {
        for d in [0.0, 1e-6, 1e-5, 3e-4] {
            let g = GradiometricPair::new(default_ring(), d).unwrap();
            assert_eq!(g.filter_sq([0.0, 0.0]), 0.0);
            assert_eq!(g.angular_average_filter(0.0), 0.0);
        }
    }

    #[test]
    fn amplitude_scaling_is_quadratic() {
        let base = SingleRing::new(default_ring());
        let scaled = SingleRing::new(RingSpec::new(5e-6, 1e-6, 3.0).unwrap());
        for k in [1e4, 2e5, 4e6] {
            let b = base.angular_average_filter(k);
            let s = scaled.angular_average_filter(k);
            assert!((s - 9.0 * b).abs() <= 1e-12 * s.abs().max(b.abs()));
        }
    }

    #[test]
    fn pair_angular_average_limits() {
        let ring = default_ring();
        let d = 1e-5;
        let single = SingleRing::new(ring);
        let pair = GradiometricPair::new(ring, d).unwrap();

        // kd → ∞: J₀ → 0, so the average tends to 2|K̃|² (J₀ envelope at
        // kd = 5e4 is ~4e-3).
        let k_large = 5e9;
        let ratio = pair.angular_average_filter(k_large) / single.angular_average_filter(k_large);
        assert!((ratio - 2.0).abs() < 1e-2, "ratio {ratio}");

        // Small kd: (1 − J₀(kd)) ≈ (kd)²/4, so the average ≈ |K̃|²(kd)²/2.
        let k_small = 1e2;
        let expect = single.angular_average_filter(k_small) * (k_small * d).powi(2) / 2.0;
        let got = pair.angular_average_filter(k_small);
        assert!((got - expect).abs() < 1e-4 * expect, "got {got}, expect {expect}");
    }

    #[test]
    fn annulus_overlap_limits() {
        let r1 = 4.5e-6;
        let r2 = 5.5e-6;
        let area = PI * (r2 * r2 - r1 * r1);
        // Coincident annuli overlap fully.
        assert!((annulus_overlap_area(r1, r2, 0.0) - area).abs() < 1e-12 * area);
        // Far apart: no overlap.
        assert_eq!(annulus_overlap_area(r1, r2, 2.0 * r2 + 1e-6), 0.0);
        // In between: strictly between 0 and the full area.
        let mid = annulus_overlap_area(r1, r2, 6e-6);
        assert!(mid > 0.0 && mid < area);
    }
}
