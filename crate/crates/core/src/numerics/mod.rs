//! Shared numerical machinery: adaptive quadrature and small special-function
//! helpers used by the variance integrals.

pub mod quad;
pub mod special;

/// Least-squares slope of `ln y` against `ln x`.
///
/// All points must have strictly positive coordinates. Used for log-log
/// scaling diagnostics on variance sweeps.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    assert!(points.len() >= 2, "slope needs at least two points");
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        assert!(x > 0.0 && y > 0.0, "log-log slope needs positive data");
        let lx = x.ln();
        let ly = y.ln();
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Logarithmically spaced grid from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2 && lo > 0.0 && hi > lo);
    let l0 = lo.ln();
    let l1 = hi.ln();
    let step = (l1 - l0) / (points - 1) as f64;
    (0..points)
        .map(|i| match i {
            0 => lo,
            i if i == points - 1 => hi,
            i => (l0 + step * i as f64).exp(),
        })
        .collect()
}

/// Linearly spaced grid from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2 && hi > lo);
    let step = (hi - lo) / (points - 1) as f64;
    (0..points)
        .map(|i| if i == points - 1 { hi } else { lo + step * i as f64 })
        .collect()
}
