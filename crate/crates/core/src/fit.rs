//! Extraction of the flux-noise amplitude `σ_Φ` (and optionally the
//! bias-independent dephasing rate `Γ₀`) from measured `T₂*(Φ)` data.
//!
//! The extraction minimizes the squared residual
//! `Err = Σ_j w_j [T₂*_exp(Φ_j) − T₂*_model(Φ_j)]²` by exhaustive grid search
//! followed by derivative-free local refinement (golden section per axis,
//! coordinate descent for two parameters). The exported landscape is the
//! actual grid-search record, so error surfaces in output files always match
//! re-evaluated residuals.
//!
//! All fluxes here are in Φ₀ units; times are in seconds.

use crate::error::{Error, Result};
use crate::ramsey::{t2_star, T2Star};
use crate::transmon::TransmonDispersion;
use serde::Serialize;

/// One measured point: bias, Ramsey time, optional `T₁`, fit weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataPoint {
    pub phi_phi0: f64,
    pub t2_star_s: f64,
    pub t1_s: Option<f64>,
    pub weight: f64,
}

/// A validated `T₂*`-vs-flux dataset, sorted by |Φ|.
#[derive(Debug, Clone, PartialEq)]
pub struct T2StarDataset {
    pub points: Vec<DataPoint>,
    pub device_label: String,
}

impl T2StarDataset {
    /// Validates and sorts by |Φ| (repeated biases are allowed).
    pub fn new(mut points: Vec<DataPoint>, device_label: impl Into<String>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !(p.phi_phi0.is_finite()) {
                return Err(Error::Dataset(format!("point {i}: non-finite bias")));
            }
            if !(p.t2_star_s.is_finite() && p.t2_star_s > 0.0) {
                return Err(Error::Dataset(format!(
                    "point {i}: t2_star must be positive, got {}",
                    p.t2_star_s
                )));
            }
            if let Some(t1) = p.t1_s {
                if !(t1.is_finite() && t1 > 0.0) {
                    return Err(Error::Dataset(format!(
                        "point {i}: t1 must be positive, got {t1}"
                    )));
                }
            }
            if !(p.weight.is_finite() && p.weight > 0.0) {
                return Err(Error::Dataset(format!(
                    "point {i}: weight must be positive, got {}",
                    p.weight
                )));
            }
        }
        points.sort_by(|a, b| a.phi_phi0.abs().total_cmp(&b.phi_phi0.abs()));
        Ok(Self {
            points,
            device_label: device_label.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Residual with bookkeeping of points whose model `T₂*` was unbounded.
#[derive(Debug, Clone)]
pub struct ResidualValue {
    /// `Σ w_j (T_exp − T_model)²` in s².
    pub err: f64,
    /// Indices (into the sorted dataset) where the unbounded-model cap was
    /// applied.
    pub capped: Vec<usize>,
}

/// Squared residual of the dephasing model against a dataset at fixed
/// parameters. `Γ₁` comes from each point's `t1` column when present, else
/// from `gamma1_default`.
pub fn residual(
    dataset: &T2StarDataset,
    disp: &TransmonDispersion,
    sigma_phi0: f64,
    gamma0: f64,
    gamma1_default: f64,
) -> Result<ResidualValue> {
    if dataset.is_empty() {
        return Err(Error::Dataset("dataset has no points".into()));
    }
    let max_obs = dataset
        .points
        .iter()
        .map(|p| p.t2_star_s)
        .fold(0.0_f64, f64::max);
    let cap = 10.0 * max_obs;

    let mut err = 0.0;
    let mut capped = Vec::new();
    for (idx, p) in dataset.points.iter().enumerate() {
        let (d1, d2) = disp.d1_d2_phi0(p.phi_phi0).map_err(|e| {
            Error::Dataset(format!("point {idx} (phi = {}): {e}", p.phi_phi0))
        })?;
        let gamma1 = p.t1_s.map(|t1| 1.0 / t1).unwrap_or(gamma1_default);
        let contrib = match t2_star(d1, d2, sigma_phi0, gamma0, gamma1) {
            T2Star::Finite(t_model) => {
                let r = p.t2_star_s - t_model;
                p.weight * r * r
            }
            T2Star::Unbounded => {
                capped.push(idx);
                p.weight * cap * cap
            }
        };
        err += contrib;
    }
    Ok(ResidualValue { err, capped })
}

/// Per-axis flags set when the grid minimum landed on a boundary (the grid
/// was too narrow).
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct BoundaryFlags {
    pub sigma_lower: bool,
    pub sigma_upper: bool,
    pub gamma0_lower: bool,
    pub gamma0_upper: bool,
}

impl BoundaryFlags {
    pub fn any(&self) -> bool {
        self.sigma_lower || self.sigma_upper || self.gamma0_lower || self.gamma0_upper
    }
}

/// One grid cell of the exported error landscape.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LandscapeCell {
    pub sigma_phi: f64,
    pub gamma0: f64,
    pub err: f64,
}

/// Best-fit parameters with the search record.
#[derive(Debug, Clone, Serialize)]
pub struct FitOutcome {
    /// Best-fit σ_Φ in Φ₀ units.
    pub sigma_phi_hat: f64,
    /// Best-fit Γ₀ in 1/s; absent for 1-parameter fits.
    pub gamma0_hat: Option<f64>,
    /// Residual at the reported optimum, in s².
    pub err_min: f64,
    /// Full grid-search record (σ outer, Γ₀ inner ordering).
    pub landscape: Vec<LandscapeCell>,
    /// Whether local refinement ran to convergence.
    pub refined: bool,
    pub boundary: BoundaryFlags,
    /// Dataset indices where the unbounded-model cap fired at the optimum.
    pub capped_points: Vec<usize>,
}

const GOLDEN_INV: f64 = 0.618_033_988_749_894_9;

/// Deterministic golden-section minimization on `[a, b]`.
fn golden_min<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> (f64, f64) {
    let mut x1 = b - GOLDEN_INV * (b - a);
    let mut x2 = a + GOLDEN_INV * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..96 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN_INV * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN_INV * (b - a);
            f2 = f(x2);
        }
        if (b - a).abs() <= 1e-14 * (a.abs() + b.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

fn validate_grid(grid: &[f64], field: &'static str, allow_zero: bool) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter {
            field,
            reason: "must not be empty".into(),
        });
    }
    let lower_ok = grid
        .iter()
        .all(|&g| g.is_finite() && if allow_zero { g >= 0.0 } else { g > 0.0 });
    if !lower_ok || !grid.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::InvalidParameter {
            field,
            reason: "must be strictly increasing (and within its domain)".into(),
        });
    }
    Ok(())
}

fn fit_engine(
    dataset: &T2StarDataset,
    disp: &TransmonDispersion,
    gamma1_default: f64,
    sigma_grid: &[f64],
    gamma0_grid: &[f64],
    two_param: bool,
) -> Result<FitOutcome> {
    let min_points = if two_param { 5 } else { 3 };
    if dataset.len() < min_points {
        return Err(Error::Dataset(format!(
            "{}-parameter fit needs at least {min_points} points, got {}",
            if two_param { 2 } else { 1 },
            dataset.len()
        )));
    }
    validate_grid(sigma_grid, "sigma_grid", false)?;
    validate_grid(gamma0_grid, "gamma0_grid", true)?;

    let eval = |sigma: f64, gamma0: f64| -> Result<f64> {
        residual(dataset, disp, sigma, gamma0, gamma1_default).map(|r| r.err)
    };

    // Exhaustive grid search; σ outer / Γ₀ inner with strict improvement
    // keeps the first (smallest-σ, then smallest-Γ₀) cell on ties.
    let mut landscape = Vec::with_capacity(sigma_grid.len() * gamma0_grid.len());
    let mut best = (0usize, 0usize, f64::INFINITY);
    for (i, &sigma) in sigma_grid.iter().enumerate() {
        for (j, &gamma0) in gamma0_grid.iter().enumerate() {
            let err = eval(sigma, gamma0)?;
            landscape.push(LandscapeCell {
                sigma_phi: sigma,
                gamma0,
                err,
            });
            if err < best.2 {
                best = (i, j, err);
            }
        }
    }
    let (bi, bj, grid_err) = best;

    let boundary = BoundaryFlags {
        sigma_lower: bi == 0,
        sigma_upper: bi == sigma_grid.len() - 1,
        gamma0_lower: two_param && bj == 0,
        gamma0_upper: two_param && bj == gamma0_grid.len() - 1,
    };

    // Local refinement: golden section inside the neighboring-cell bracket,
    // in log-σ and linear-Γ₀; coordinate descent alternates the axes.
    let sig_lo = sigma_grid[bi.saturating_sub(1)].ln();
    let sig_hi = sigma_grid[(bi + 1).min(sigma_grid.len() - 1)].ln();
    let gam_lo = gamma0_grid[bj.saturating_sub(1)];
    let gam_hi = gamma0_grid[(bj + 1).min(gamma0_grid.len() - 1)];

    let mut sigma_hat = sigma_grid[bi];
    let mut gamma_hat = gamma0_grid[bj];
    let mut err_hat = grid_err;
    let mut refined = false;

    for _round in 0..24 {
        let before = err_hat;
        if sig_hi > sig_lo {
            let gamma_now = gamma_hat;
            let (ls, fs) = golden_min(
                &|ls: f64| eval(ls.exp(), gamma_now).unwrap_or(f64::INFINITY),
                sig_lo,
                sig_hi,
            );
            if fs < err_hat {
                sigma_hat = ls.exp();
                err_hat = fs;
            }
        }
        if gam_hi > gam_lo {
            let sigma_now = sigma_hat;
            let (g, fg) = golden_min(
                &|g: f64| eval(sigma_now, g).unwrap_or(f64::INFINITY),
                gam_lo,
                gam_hi,
            );
            if fg < err_hat {
                gamma_hat = g;
                err_hat = fg;
            }
        }
        if before - err_hat <= 1e-13 * before.abs() {
            refined = true;
            break;
        }
    }

    // Report the residual re-evaluated at the optimum so the stored value is
    // reproducible from the parameters alone.
    let at_opt = residual(dataset, disp, sigma_hat, gamma_hat, gamma1_default)?;
    Ok(FitOutcome {
        sigma_phi_hat: sigma_hat,
        gamma0_hat: if two_param { Some(gamma_hat) } else { None },
        err_min: at_opt.err,
        landscape,
        refined,
        boundary,
        capped_points: at_opt.capped,
    })
}

/// One-parameter fit: flux noise as the only dephasing channel beyond `Γ₁`
/// (`Γ₀` fixed to zero). Grid search over `sigma_grid`, then golden-section
/// refinement in the best bracket.
pub fn fit_sigma(
    dataset: &T2StarDataset,
    disp: &TransmonDispersion,
    gamma1_default: f64,
    sigma_grid: &[f64],
) -> Result<FitOutcome> {
    fit_engine(dataset, disp, gamma1_default, sigma_grid, &[0.0], false)
}

/// Two-parameter fit of `(σ_Φ, Γ₀)`: exhaustive 2D grid search, then
/// coordinate-descent refinement from the best cell.
pub fn fit_sigma_gamma0(
    dataset: &T2StarDataset,
    disp: &TransmonDispersion,
    gamma1_default: f64,
    sigma_grid: &[f64],
    gamma0_grid: &[f64],
) -> Result<FitOutcome> {
    fit_engine(dataset, disp, gamma1_default, sigma_grid, gamma0_grid, true)
}

/// Default σ_Φ search grid: logarithmic over [1e−6, 1e−3] Φ₀, 61 points.
pub fn default_sigma_grid() -> Vec<f64> {
    crate::numerics::logspace(1e-6, 1e-3, 61)
}

/// Default Γ₀ search grid: linear over [0, 2e5] 1/s, 41 points.
pub fn default_gamma0_grid() -> Vec<f64> {
    crate::numerics::linspace(0.0, 2e5, 41)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ramsey::{t2_star_at, DephasingParams, FluxUnit, Gamma1Source};

    fn synthetic_dataset(
        disp: &TransmonDispersion,
        sigma: f64,
        gamma0: f64,
        gamma1: f64,
        biases: &[f64],
    ) -> T2StarDataset {
        let params =
            DephasingParams::new(sigma, FluxUnit::Phi0, gamma0, Gamma1Source::Constant(gamma1))
                .unwrap();
        let points = biases
            .iter()
            .map(|&phi| DataPoint {
                phi_phi0: phi,
                t2_star_s: t2_star_at(disp, &params, phi)
                    .unwrap()
                    .finite()
                    .unwrap(),
                t1_s: None,
                weight: 1.0,
            })
            .collect();
        T2StarDataset::new(points, "synthetic").unwrap()
    }

    fn biases_11() -> Vec<f64> {
        (0..11).map(|i| i as f64 * 0.02).collect()
    }

    #[test]
    fn dataset_validation_and_sorting() {
        let pts = vec![
            DataPoint {
                phi_phi0: -0.2,
                t2_star_s: 1e-5,
                t1_s: None,
                weight: 1.0,
            },
            DataPoint {
                phi_phi0: 0.05,
                t2_star_s: 2e-5,
                t1_s: Some(3e-5),
                weight: 1.0,
            },
        ];
        let ds = T2StarDataset::new(pts, "q1").unwrap();
        assert_eq!(ds.points[0].phi_phi0, 0.05);
        assert!(T2StarDataset::new(
            vec![DataPoint {
                phi_phi0: 0.0,
                t2_star_s: -1.0,
                t1_s: None,
                weight: 1.0
            }],
            "bad"
        )
        .is_err());
    }

    #[test]
    fn residual_is_zero_on_generating_parameters() {
        let disp = TransmonDispersion::default();
        let (sigma, gamma0, gamma1) = (5e-5, 2.5e4, 1.0 / 3e-5);
        let ds = synthetic_dataset(&disp, sigma, gamma0, gamma1, &biases_11());
        let r = residual(&ds, &disp, sigma, gamma0, gamma1).unwrap();
        // The generating curve reproduces itself; only the T₂* bisection
        // tolerance (1e-9 relative on ~1e-5 s times) remains.
        assert!(r.err < 1e-18, "err {}", r.err);
        assert!(r.capped.is_empty());
    }

    #[test]
    fn residual_rejects_empty_dataset() {
        let disp = TransmonDispersion::default();
        let ds = T2StarDataset {
            points: vec![],
            device_label: "empty".into(),
        };
        assert!(residual(&ds, &disp, 1e-4, 0.0, 1e4).is_err());
    }

    #[test]
    fn residual_minimum_sits_at_generating_sigma() {
        let disp = TransmonDispersion::default();
        let sigma0 = 5e-5;
        let gamma1 = 1.0 / 3e-5;
        let ds = synthetic_dataset(&disp, sigma0, 0.0, gamma1, &biases_11());
        // Scan 101 σ values around σ₀ and check the minimum is at σ₀.
        let mut best = (0.0, f64::INFINITY);
        for i in 0..101 {
            let sigma = sigma0 * (0.5 + i as f64 * 0.01);
            let err = residual(&ds, &disp, sigma, 0.0, gamma1).unwrap().err;
            if err < best.1 {
                best = (sigma, err);
            }
        }
        assert!((best.0 - sigma0).abs() < 1e-2 * sigma0, "min at {}", best.0);
    }

    #[test]
    fn quadratic_form_of_residual() {
        // Scaling the residual vector by c scales Err by exactly c².
        let disp = TransmonDispersion::default();
        let gamma1 = 1.0 / 3e-5;
        let ds = synthetic_dataset(&disp, 5e-5, 0.0, gamma1, &biases_11());
        let (sigma_probe, gamma_probe) = (8e-5, 1e4);
        let base = residual(&ds, &disp, sigma_probe, gamma_probe, gamma1).unwrap();

        // Rebuild the dataset with residuals scaled by c around the model.
        let params = DephasingParams::new(
            sigma_probe,
            FluxUnit::Phi0,
            gamma_probe,
            Gamma1Source::Constant(gamma1),
        )
        .unwrap();
        let c = 3.5;
        let scaled_points: Vec<DataPoint> = ds
            .points
            .iter()
            .map(|p| {
                let model = t2_star_at(&disp, &params, p.phi_phi0)
                    .unwrap()
                    .finite()
                    .unwrap();
                DataPoint {
                    t2_star_s: model + c * (p.t2_star_s - model),
                    ..*p
                }
            })
            .collect();
        let scaled = T2StarDataset::new(scaled_points, "scaled").unwrap();
        let after = residual(&scaled, &disp, sigma_probe, gamma_probe, gamma1).unwrap();
        assert!(
            (after.err - c * c * base.err).abs() <= 1e-9 * after.err,
            "{} vs {}",
            after.err,
            c * c * base.err
        );
    }

    #[test]
    fn one_parameter_roundtrip() {
        let disp = TransmonDispersion::default();
        let sigma0 = 5e-5;
        let gamma1 = 1.0 / 3e-5;
        let ds = synthetic_dataset(&disp, sigma0, 0.0, gamma1, &biases_11());
        let out = fit_sigma(&ds, &disp, gamma1, &default_sigma_grid()).unwrap();
        assert!(
            (out.sigma_phi_hat - sigma0).abs() < 0.01 * sigma0,
            "recovered {}",
            out.sigma_phi_hat
        );
        assert!(out.gamma0_hat.is_none());
        assert!(!out.boundary.any());
        assert!(out.refined);
        assert_eq!(out.landscape.len(), 61);
    }

    #[test]
    fn degenerate_gamma_grid_reduces_to_one_parameter_fit() {
        let disp = TransmonDispersion::default();
        let gamma1 = 1.0 / 3e-5;
        let ds = synthetic_dataset(&disp, 5e-5, 0.0, gamma1, &biases_11());
        let grid = default_sigma_grid();
        let one = fit_sigma(&ds, &disp, gamma1, &grid).unwrap();
        let two = fit_sigma_gamma0(&ds, &disp, gamma1, &grid, &[0.0]).unwrap();
        assert_eq!(one.sigma_phi_hat.to_bits(), two.sigma_phi_hat.to_bits());
        assert_eq!(one.err_min.to_bits(), two.err_min.to_bits());
        assert_eq!(two.gamma0_hat, Some(0.0));
    }

    #[test]
    fn boundary_optimum_is_flagged() {
        let disp = TransmonDispersion::default();
        let gamma1 = 1.0 / 3e-5;
        let ds = synthetic_dataset(&disp, 5e-5, 0.0, gamma1, &biases_11());
        // Grid entirely below the generating σ: the optimum lands on the
        // upper edge.
        let narrow: Vec<f64> = crate::numerics::logspace(1e-6, 1e-5, 11);
        let out = fit_sigma(&ds, &disp, gamma1, &narrow).unwrap();
        assert!(out.boundary.sigma_upper);
    }

    #[test]
    fn refinement_never_worsens_grid_best() {
        let disp = TransmonDispersion::default();
        let gamma1 = 1.0 / 3e-5;
        let ds = synthetic_dataset(&disp, 7e-5, 1.5e4, gamma1, &biases_11());
        let out = fit_sigma_gamma0(
            &ds,
            &disp,
            gamma1,
            &default_sigma_grid(),
            &default_gamma0_grid(),
        )
        .unwrap();
        let grid_best = out
            .landscape
            .iter()
            .map(|c| c.err)
            .fold(f64::INFINITY, f64::min);
        assert!(out.err_min <= grid_best);
    }

    #[test]
    fn landscape_cells_reproduce_residual() {
        let disp = TransmonDispersion::default();
        let gamma1 = 1.0 / 3e-5;
        let ds = synthetic_dataset(&disp, 5e-5, 0.0, gamma1, &biases_11());
        let grid: Vec<f64> = crate::numerics::logspace(1e-5, 2e-4, 7);
        let out = fit_sigma(&ds, &disp, gamma1, &grid).unwrap();
        for cell in &out.landscape {
            let re = residual(&ds, &disp, cell.sigma_phi, cell.gamma0, gamma1)
                .unwrap()
                .err;
            assert!((re - cell.err).abs() <= 1e-12 * re.abs().max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn determinism() {
        let disp = TransmonDispersion::default();
        let gamma1 = 1.0 / 3e-5;
        let ds = synthetic_dataset(&disp, 7e-5, 1.5e4, gamma1, &biases_11());
        let a = fit_sigma_gamma0(
            &ds,
            &disp,
            gamma1,
            &default_sigma_grid(),
            &default_gamma0_grid(),
        )
        .unwrap();
        let b = fit_sigma_gamma0(
            &ds,
            &disp,
            gamma1,
            &default_sigma_grid(),
            &default_gamma0_grid(),
        )
        .unwrap();
        assert_eq!(a.sigma_phi_hat.to_bits(), b.sigma_phi_hat.to_bits());
        assert_eq!(a.gamma0_hat.map(f64::to_bits), b.gamma0_hat.map(f64::to_bits));
        assert_eq!(a.err_min.to_bits(), b.err_min.to_bits());
    }

    #[test]
    fn nesting_of_landscapes() {
        // The Γ₀ = 0 row of the 2D landscape and the 1D landscape are the
        // same residuals, so their minima coincide.
        let disp = TransmonDispersion::default();
        let gamma1 = 1.0 / 3e-5;
        let ds = synthetic_dataset(&disp, 7e-5, 0.0, gamma1, &biases_11());
        let grid = default_sigma_grid();
        let one = fit_sigma(&ds, &disp, gamma1, &grid).unwrap();
        let two = fit_sigma_gamma0(&ds, &disp, gamma1, &grid, &default_gamma0_grid()).unwrap();
        let row_min = two
            .landscape
            .iter()
            .filter(|c| c.gamma0 == 0.0)
            .map(|c| c.err)
            .fold(f64::INFINITY, f64::min);
        let one_min = one
            .landscape
            .iter()
            .map(|c| c.err)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(row_min.to_bits(), one_min.to_bits());
    }

    #[test]
    fn unbounded_model_contributions_are_capped() {
        // With every decay channel zero the model T₂* is unbounded at each
        // point; the residual caps the contribution at (10·max observed)²
        // and flags the points.
        let disp = TransmonDispersion::default();
        let ds = synthetic_dataset(&disp, 5e-5, 0.0, 1.0 / 3e-5, &biases_11());
        let r = residual(&ds, &disp, 0.0, 0.0, 0.0).unwrap();
        let max_obs = ds
            .points
            .iter()
            .map(|p| p.t2_star_s)
            .fold(0.0_f64, f64::max);
        let cap = (10.0 * max_obs) * (10.0 * max_obs);
        assert_eq!(r.capped.len(), ds.len());
        assert!((r.err - cap * ds.len() as f64).abs() <= 1e-12 * r.err);
    }

    #[test]
    fn too_few_points_rejected() {
        let disp = TransmonDispersion::default();
        let gamma1 = 1.0 / 3e-5;
        let ds = synthetic_dataset(&disp, 5e-5, 0.0, gamma1, &[0.0, 0.1]);
        assert!(fit_sigma(&ds, &disp, gamma1, &default_sigma_grid()).is_err());
        let ds4 = synthetic_dataset(&disp, 5e-5, 0.0, gamma1, &[0.0, 0.05, 0.1, 0.15]);
        assert!(fit_sigma_gamma0(
            &ds4,
            &disp,
            gamma1,
            &default_sigma_grid(),
            &default_gamma0_grid()
        )
        .is_err());
        assert!(fit_sigma(&ds4, &disp, gamma1, &default_sigma_grid()).is_ok());
    }
}
