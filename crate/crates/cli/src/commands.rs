//! Subcommand implementations: each builds models from the config, runs the
//! computation, and writes plot-ready CSV / structured JSON artifacts.

use crate::artifacts::{num, write_csv, write_json, Metadata};
use crate::config::RunConfig;
use crate::dataset::{load_dataset, BiasCalibration};
use crate::error::{CliError, CliResult};
use gradiflux_core::fit::{fit_sigma, fit_sigma_gamma0, FitOutcome};
use gradiflux_core::montecarlo::{mc_flux_variance_detailed, Raster};
use gradiflux_core::numerics::{linspace, logspace};
use gradiflux_core::ramsey::{t2_star_at, T2Star};
use gradiflux_core::variance::{flux_variance, suppression_factor, variance_sweep};
use serde::Serialize;
use std::path::{Path, PathBuf};

pub struct XiRange {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub points: Option<usize>,
}

fn out_path(config: &RunConfig, out: Option<PathBuf>, default_name: &str) -> PathBuf {
    out.unwrap_or_else(|| Path::new(&config.output_dir).join(default_name))
}

/// Resolve the ξ grid: CLI flags beat the config's sweep section, which beats
/// a singleton at the configured correlation length.
fn resolve_xi_grid(config: &RunConfig, range: &XiRange) -> CliResult<Vec<f64>> {
    match (range.min, range.max) {
        (Some(lo), Some(hi)) => {
            let points = range.points.unwrap_or(60);
            if !(lo > 0.0 && hi > lo && points >= 2) {
                return Err(CliError::Config(format!(
                    "xi range: need 0 < min < max and points >= 2, got [{lo}, {hi}] x {points}"
                )));
            }
            Ok(logspace(lo, hi, points))
        }
        (None, None) => match config.xi_grid {
            Some((lo, hi, points)) => Ok(logspace(lo, hi, points)),
            None => {
                let xi = config.spectrum.correlation_length.ok_or_else(|| {
                    CliError::Config(
                        "no xi grid: give --xi-min/--xi-max, spectrum.xi_min_m/xi_max_m, \
                         or a gaussian spectrum with correlation_length_m"
                            .into(),
                    )
                })?;
                Ok(vec![xi])
            }
        },
        _ => Err(CliError::Config(
            "--xi-min and --xi-max must be given together".into(),
        )),
    }
}

pub fn cmd_variance(config: &RunConfig, range: XiRange, out: Option<PathBuf>) -> CliResult<()> {
    let kernel = config.build_kernel()?;
    let path = out_path(config, out, "variance.csv");
    let mut rows = Vec::new();
    let mut failures = Vec::new();

    let params: Vec<String>;
    if config.spectrum_kind == "white" {
        let spectrum = config.build_spectrum()?;
        let v = flux_variance(kernel.as_ref(), spectrum.as_ref())?;
        rows.push(format!(
            "0,{},{},{}",
            num(v.value),
            num(v.estimated_quadrature_error),
            v.regime.as_str()
        ));
        params = vec!["spectrum = white (single row, xi_m = 0)".into()];
    } else {
        let grid = resolve_xi_grid(config, &range)?;
        params = vec![format!(
            "xi_grid = [{:e}, {:e}] x {}",
            grid[0],
            grid[grid.len() - 1],
            grid.len()
        )];
        for point in variance_sweep(kernel.as_ref(), &grid, config.spectrum.amplitude)? {
            match point.outcome {
                Ok(v) => rows.push(format!(
                    "{},{},{},{}",
                    num(point.xi),
                    num(v.value),
                    num(v.estimated_quadrature_error),
                    v.regime.as_str()
                )),
                Err(e) => failures.push(format!("xi = {:e}: {e}", point.xi)),
            }
        }
    }

    let meta = Metadata::for_run(config, params);
    write_csv(&path, "variance", &meta, "xi_m,variance,quad_err,regime", &rows)?;
    println!("wrote {} ({} rows)", path.display(), rows.len());
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("variance point failed: {f}");
        }
        return Err(CliError::Numerical(format!(
            "{} of {} sweep points failed",
            failures.len(),
            failures.len() + rows.len()
        )));
    }
    Ok(())
}

pub fn cmd_suppression(config: &RunConfig, range: XiRange, out: Option<PathBuf>) -> CliResult<()> {
    let ring = config
        .geometry
        .ring()
        .map_err(|e| CliError::Config(format!("geometry: {e}")))?;
    let separation = config.geometry.separation.ok_or_else(|| {
        CliError::Config("suppression needs geometry.separation_m (sub-loop spacing)".into())
    })?;
    let grid = resolve_xi_grid(config, &range)?;
    let path = out_path(config, out, "suppression.csv");

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &xi in &grid {
        let outcome = gradiflux_core::spectrum::GaussianCorrelated::new(
            xi,
            config.spectrum.amplitude,
        )
        .and_then(|spec| suppression_factor(ring, separation, &spec));
        match outcome {
            Ok(s) => rows.push(format!("{},{}", num(xi), num(s))),
            Err(e) => failures.push(format!("xi = {xi:e}: {e}")),
        }
    }

    let meta = Metadata::for_run(
        config,
        vec![format!(
            "xi_grid = [{:e}, {:e}] x {}",
            grid[0],
            grid[grid.len() - 1],
            grid.len()
        )],
    );
    write_csv(&path, "suppression", &meta, "xi_m,s_factor", &rows)?;
    println!("wrote {} ({} rows)", path.display(), rows.len());
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("suppression point failed: {f}");
        }
        return Err(CliError::Numerical(format!(
            "{} of {} sweep points failed",
            failures.len(),
            grid.len()
        )));
    }
    Ok(())
}

pub fn cmd_spectrum_curve(
    config: &RunConfig,
    phi_min: f64,
    phi_max: f64,
    points: usize,
    out: Option<PathBuf>,
) -> CliResult<()> {
    if !(phi_max > phi_min && points >= 2) {
        return Err(CliError::Config(format!(
            "phi range: need min < max and points >= 2, got [{phi_min}, {phi_max}] x {points}"
        )));
    }
    let path = out_path(config, out, "spectrum_curve.csv");
    let mut rows = Vec::new();
    for x in linspace(phi_min, phi_max, points) {
        let f01 = config.transmon.f01_hz(x)?;
        rows.push(format!("{},{}", num(x), num(f01)));
    }
    let meta = Metadata::for_run(
        config,
        vec![format!("phi_grid = [{phi_min}, {phi_max}] x {points}")],
    );
    write_csv(&path, "spectrum-curve", &meta, "phi_phi0,f01_hz", &rows)?;
    println!("wrote {} ({} rows)", path.display(), rows.len());
    Ok(())
}

pub fn cmd_ramsey(
    config: &RunConfig,
    phi_phi0: f64,
    t_max_s: Option<f64>,
    points: usize,
    out: Option<PathBuf>,
) -> CliResult<()> {
    if points < 2 {
        return Err(CliError::Config("ramsey needs at least 2 time points".into()));
    }
    let disp = &config.transmon;
    let params = &config.dephasing;
    let t_max = match t_max_s {
        Some(t) if t > 0.0 => t,
        Some(t) => {
            return Err(CliError::Config(format!(
                "t_max_s must be positive, got {t}"
            )))
        }
        None => match t2_star_at(disp, params, phi_phi0)? {
            T2Star::Finite(t2) => 3.0 * t2,
            T2Star::Unbounded => 1e-4,
        },
    };

    let (d1, d2) = match params.sigma_unit {
        gradiflux_core::ramsey::FluxUnit::Phi0 => disp.d1_d2_phi0(phi_phi0)?,
        gradiflux_core::ramsey::FluxUnit::Weber => {
            disp.d1_d2(phi_phi0 * gradiflux_core::transmon::FLUX_QUANTUM_WB)?
        }
    };
    let gamma1 = params.gamma1.at(phi_phi0);

    let path = out_path(config, out, "ramsey.csv");
    let mut rows = Vec::new();
    for i in 0..points {
        let t = t_max * i as f64 / (points - 1) as f64;
        let e = gradiflux_core::ramsey::total_envelope(
            d1,
            d2,
            params.sigma_phi,
            params.gamma0,
            gamma1,
            t,
        );
        rows.push(format!("{},{}", num(t), num(e)));
    }
    let meta = Metadata::for_run(
        config,
        vec![
            format!("phi_phi0 = {phi_phi0}"),
            format!("t_max_s = {t_max:e}"),
            format!("points = {points}"),
        ],
    );
    write_csv(&path, "ramsey", &meta, "t_s,envelope", &rows)?;
    println!("wrote {} ({} rows)", path.display(), rows.len());
    Ok(())
}

pub fn cmd_t2star_curve(
    config: &RunConfig,
    phi_max: f64,
    points: usize,
    out: Option<PathBuf>,
) -> CliResult<()> {
    if !(phi_max > 0.0 && points >= 2) {
        return Err(CliError::Config(format!(
            "t2star-curve: need phi_max > 0 and points >= 2, got {phi_max} x {points}"
        )));
    }
    let grid = linspace(0.0, phi_max, points);
    let curve = gradiflux_core::ramsey::t2_star_curve(&config.transmon, &config.dephasing, &grid);

    let path = out_path(config, out, "t2star_curve.csv");
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for pt in &curve {
        match &pt.outcome {
            Ok(T2Star::Finite(t2)) => rows.push(format!("{},{}", num(pt.phi_phi0), num(*t2))),
            Ok(T2Star::Unbounded) => rows.push(format!("{},unbounded", num(pt.phi_phi0))),
            Err(e) => failures.push(format!("phi = {}: {e}", pt.phi_phi0)),
        }
    }
    let meta = Metadata::for_run(
        config,
        vec![format!("phi_grid = [0, {phi_max}] x {points}")],
    );
    write_csv(&path, "t2star-curve", &meta, "phi_phi0,t2_star_s", &rows)?;
    println!("wrote {} ({} rows)", path.display(), rows.len());
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("t2star point failed: {f}");
        }
        return Err(CliError::Numerical(format!(
            "{} of {} bias points failed",
            failures.len(),
            grid.len()
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct FitArtifact<'a> {
    sigma_phi_hat: f64,
    gamma0_hat: Option<f64>,
    err_min: f64,
    refined: bool,
    boundary_flags: gradiflux_core::fit::BoundaryFlags,
    capped_points: &'a [usize],
    device_label: &'a str,
    n_points: usize,
    metadata: &'a Metadata,
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_fit(
    config: &RunConfig,
    data: PathBuf,
    two_param: bool,
    cal_slope: Option<f64>,
    cal_offset: Option<f64>,
    out: Option<PathBuf>,
    landscape_out: Option<PathBuf>,
) -> CliResult<()> {
    let calibration = match (cal_slope, cal_offset) {
        (None, None) => None,
        (slope, offset) => Some(BiasCalibration::new(
            slope.unwrap_or(1.0),
            offset.unwrap_or(0.0),
        )?),
    };
    let dataset = load_dataset(&data, calibration)?;
    let gamma1 = config.gamma1_constant();

    let outcome: FitOutcome = if two_param {
        fit_sigma_gamma0(
            &dataset,
            &config.transmon,
            gamma1,
            &config.fit_sigma_grid,
            &config.fit_gamma0_grid,
        )?
    } else {
        fit_sigma(&dataset, &config.transmon, gamma1, &config.fit_sigma_grid)?
    };

    let meta = Metadata::for_run(
        config,
        vec![
            format!("data = {}", data.display()),
            format!("two_param = {two_param}"),
            format!("gamma1_per_s = {gamma1}"),
        ],
    );

    let json_path = out_path(config, out, "fit.json");
    write_json(
        &json_path,
        &FitArtifact {
            sigma_phi_hat: outcome.sigma_phi_hat,
            gamma0_hat: outcome.gamma0_hat,
            err_min: outcome.err_min,
            refined: outcome.refined,
            boundary_flags: outcome.boundary,
            capped_points: &outcome.capped_points,
            device_label: &dataset.device_label,
            n_points: dataset.len(),
            metadata: &meta,
        },
    )?;

    let landscape_path = landscape_out
        .unwrap_or_else(|| Path::new(&config.output_dir).join("fit_landscape.csv"));
    let rows: Vec<String> = outcome
        .landscape
        .iter()
        .map(|c| {
            format!(
                "{},{},{},{}",
                num(c.sigma_phi),
                num(c.gamma0),
                num(c.err),
                num(c.err.max(1e-300).log10())
            )
        })
        .collect();
    write_csv(
        &landscape_path,
        "fit-landscape",
        &meta,
        "sigma_phi,gamma0,err,log10_err",
        &rows,
    )?;

    println!(
        "wrote {} and {} (sigma_phi_hat = {:.6e}{})",
        json_path.display(),
        landscape_path.display(),
        outcome.sigma_phi_hat,
        match outcome.gamma0_hat {
            Some(g) => format!(", gamma0_hat = {g:.6e}"),
            None => String::new(),
        }
    );
    if outcome.boundary.any() {
        eprintln!("warning: optimum on a grid boundary; widen the fit grids");
    }
    Ok(())
}

#[derive(Serialize)]
struct McArtifact<'a> {
    mean_sq: f64,
    std_error: f64,
    n_realizations: usize,
    metadata: &'a Metadata,
}

pub fn cmd_montecarlo(
    config: &RunConfig,
    out: Option<PathBuf>,
    samples_out: Option<PathBuf>,
) -> CliResult<()> {
    let kernel = config.build_kernel()?;
    let spectrum = config.build_spectrum()?;
    let raster = if config.mc_supersample {
        Raster::Supersample4
    } else {
        Raster::CellCenter
    };
    let (estimate, phis) = mc_flux_variance_detailed(
        kernel.as_ref(),
        spectrum.as_ref(),
        config.mc_extent_m,
        config.mc_grid_points,
        config.mc_n_realizations,
        config.mc_seed,
        raster,
    )?;

    let meta = Metadata::for_run(
        config,
        vec![
            format!("extent_m = {:e}", config.mc_extent_m),
            format!("grid_points = {}", config.mc_grid_points),
            format!("n_realizations = {}", config.mc_n_realizations),
            format!("supersample = {}", config.mc_supersample),
        ],
    );
    let json_path = out_path(config, out, "montecarlo.json");
    write_json(
        &json_path,
        &McArtifact {
            mean_sq: estimate.mean_sq,
            std_error: estimate.std_error,
            n_realizations: estimate.n_realizations,
            metadata: &meta,
        },
    )?;
    println!(
        "wrote {} (mean_sq = {:.6e} ± {:.2e})",
        json_path.display(),
        estimate.mean_sq,
        estimate.std_error
    );

    if let Some(samples_path) = samples_out {
        let rows: Vec<String> = phis
            .iter()
            .enumerate()
            .map(|(i, &phi)| format!("{i},{}", num(phi)))
            .collect();
        write_csv(&samples_path, "montecarlo-samples", &meta, "realization,phi_wb", &rows)?;
        println!("wrote {} ({} samples)", samples_path.display(), rows.len());
    }
    Ok(())
}

pub fn cmd_validate(config: &RunConfig, data: Option<PathBuf>) -> CliResult<()> {
    let kernel = config.build_kernel()?;
    let spectrum = config.build_spectrum()?;
    println!(
        "config OK (hash {}): geometry = {}, spectrum = {}, E_J/h = {:.4e} Hz, E_C/h = {:.4e} Hz",
        config.config_hash,
        kernel.name(),
        spectrum.name(),
        config.transmon.ej_over_h(),
        config.transmon.ec_over_h()
    );
    for d in &config.defaults_applied {
        println!("default applied: {d}");
    }
    if let Some(path) = data {
        let dataset = load_dataset(&path, None)?;
        // Biases must sit inside the dispersion domain.
        for (i, p) in dataset.points.iter().enumerate() {
            config.transmon.d1_d2_phi0(p.phi_phi0).map_err(|e| {
                CliError::Data(format!("point {i} (phi = {}): {e}", p.phi_phi0))
            })?;
        }
        println!(
            "dataset OK: {} points, device {:?}, bias span [{}, {}] phi0",
            dataset.len(),
            dataset.device_label,
            dataset.points.first().map(|p| p.phi_phi0).unwrap_or(0.0),
            dataset.points.last().map(|p| p.phi_phi0).unwrap_or(0.0),
        );
    }
    Ok(())
}

