//! Run configuration: a strict-keyed TOML file with per-section defaults.
//!
//! Unknown keys are rejected with the offending key named (runs are the
//! reproducibility record, so silent typos are not acceptable), and every
//! default applied during resolution is echoed into output metadata.

use crate::error::{CliError, CliResult};
use gradiflux_core::geometry::SensitivityKernel;
use gradiflux_core::ramsey::{DephasingParams, FluxUnit, Gamma1Source};
use gradiflux_core::registry::{GeometryParams, SpectrumParams, StrategyRegistry};
use gradiflux_core::spectrum::MagnetizationSpectrum;
use gradiflux_core::transmon::TransmonDispersion;
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    geometry: Option<RawGeometry>,
    spectrum: Option<RawSpectrum>,
    transmon: Option<RawTransmon>,
    dephasing: Option<RawDephasing>,
    fit: Option<RawFit>,
    mc: Option<RawMc>,
    output: Option<RawOutput>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    kind: Option<String>,
    ring_radius_m: Option<f64>,
    annulus_width_m: Option<f64>,
    separation_m: Option<f64>,
    coupling_amplitude: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectrum {
    kind: Option<String>,
    correlation_length_m: Option<f64>,
    amplitude: Option<f64>,
    xi_min_m: Option<f64>,
    xi_max_m: Option<f64>,
    xi_points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransmon {
    ej_over_h_hz: Option<f64>,
    ec_over_h_hz: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDephasing {
    sigma_phi: Option<f64>,
    sigma_unit: Option<String>,
    gamma0_per_s: Option<f64>,
    gamma1_per_s: Option<f64>,
    gamma1_table: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFit {
    sigma_min_phi0: Option<f64>,
    sigma_max_phi0: Option<f64>,
    sigma_points: Option<usize>,
    gamma0_min_per_s: Option<f64>,
    gamma0_max_per_s: Option<f64>,
    gamma0_points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMc {
    extent_m: Option<f64>,
    grid_points: Option<usize>,
    n_realizations: Option<usize>,
    seed: Option<u64>,
    supersample: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
}

/// Fully resolved and validated run configuration.
#[derive(Debug)]
pub struct RunConfig {
    pub geometry_kind: String,
    pub geometry: GeometryParams,
    pub spectrum_kind: String,
    pub spectrum: SpectrumParams,
    pub xi_grid: Option<(f64, f64, usize)>,
    pub transmon: TransmonDispersion,
    pub dephasing: DephasingParams,
    pub fit_sigma_grid: Vec<f64>,
    pub fit_gamma0_grid: Vec<f64>,
    pub mc_extent_m: f64,
    pub mc_grid_points: usize,
    pub mc_n_realizations: usize,
    pub mc_seed: u64,
    pub mc_supersample: bool,
    pub output_dir: String,
    /// Defaults applied during resolution, echoed into artifact metadata.
    pub defaults_applied: Vec<String>,
    /// FNV-1a 64 hash of the raw config bytes.
    pub config_hash: String,
}

/// FNV-1a 64-bit hash, hex encoded.
pub fn fnv1a_hex(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}

macro_rules! defaulted {
    ($defaults:ident, $field:expr, $name:literal, $value:expr) => {{
        match $field {
            Some(v) => v,
            None => {
                $defaults.push(format!(concat!($name, " = {}"), $value));
                $value
            }
        }
    }};
}

/// Parse and validate a config file, applying documented defaults.
pub fn load_config(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read(path).map_err(|e| {
        CliError::Config(format!("cannot read config {}: {e}", path.display()))
    })?;
    let text_str = std::str::from_utf8(&text)
        .map_err(|e| CliError::Config(format!("config is not UTF-8: {e}")))?;
    let raw: RawConfig = toml::from_str(text_str)
        .map_err(|e| CliError::Config(format!("config parse error: {e}")))?;
    resolve(raw, fnv1a_hex(&text))
}

fn resolve(raw: RawConfig, config_hash: String) -> CliResult<RunConfig> {
    let mut defaults = Vec::new();

    let g = raw.geometry.unwrap_or_default();
    let geometry_kind = defaulted!(
        defaults,
        g.kind.clone(),
        "geometry.kind",
        "gradiometric_pair".to_string()
    );
    let ring_radius = defaulted!(defaults, g.ring_radius_m, "geometry.ring_radius_m", 5e-6);
    let annulus_width = defaulted!(
        defaults,
        g.annulus_width_m,
        "geometry.annulus_width_m",
        1e-6
    );
    let separation = if geometry_kind == "gradiometric_pair" {
        Some(defaulted!(defaults, g.separation_m, "geometry.separation_m", 1e-5))
    } else {
        g.separation_m
    };
    let coupling_amplitude = defaulted!(
        defaults,
        g.coupling_amplitude,
        "geometry.coupling_amplitude",
        1.0
    );
    let geometry = GeometryParams {
        ring_radius,
        annulus_width,
        separation,
        coupling_amplitude,
    };

    let s = raw.spectrum.unwrap_or_default();
    let spectrum_kind = defaulted!(
        defaults,
        s.kind.clone(),
        "spectrum.kind",
        "gaussian".to_string()
    );
    let correlation_length = if spectrum_kind == "gaussian" {
        Some(defaulted!(
            defaults,
            s.correlation_length_m,
            "spectrum.correlation_length_m",
            1e-6
        ))
    } else {
        s.correlation_length_m
    };
    let amplitude = defaulted!(defaults, s.amplitude, "spectrum.amplitude", 1.0);
    let spectrum = SpectrumParams {
        correlation_length,
        amplitude,
    };
    let xi_grid = match (s.xi_min_m, s.xi_max_m) {
        (Some(lo), Some(hi)) => {
            let points = defaulted!(defaults, s.xi_points, "spectrum.xi_points", 60);
            if !(lo > 0.0 && hi > lo) {
                return Err(CliError::Config(format!(
                    "spectrum.xi_min_m/xi_max_m: need 0 < min < max, got {lo} and {hi}"
                )));
            }
            if points < 2 {
                return Err(CliError::Config(
                    "spectrum.xi_points: need at least 2 points".into(),
                ));
            }
            Some((lo, hi, points))
        }
        (None, None) => None,
        _ => {
            return Err(CliError::Config(
                "spectrum.xi_min_m and spectrum.xi_max_m must be given together".into(),
            ))
        }
    };

    let t = raw.transmon.unwrap_or_default();
    let ej = defaulted!(defaults, t.ej_over_h_hz, "transmon.ej_over_h_hz", 2e10);
    let ec = defaulted!(defaults, t.ec_over_h_hz, "transmon.ec_over_h_hz", 2.5e8);
    let transmon = TransmonDispersion::new(ej, ec)
        .map_err(|e| CliError::Config(format!("transmon: {e}")))?;

    let d = raw.dephasing.unwrap_or_default();
    let sigma_phi = defaulted!(defaults, d.sigma_phi, "dephasing.sigma_phi", 1e-4);
    let sigma_unit_raw = defaulted!(
        defaults,
        d.sigma_unit.clone(),
        "dephasing.sigma_unit",
        "phi0".to_string()
    );
    let sigma_unit = match sigma_unit_raw.as_str() {
        "phi0" => FluxUnit::Phi0,
        "wb" => FluxUnit::Weber,
        other => {
            return Err(CliError::Config(format!(
                "dephasing.sigma_unit: expected \"phi0\" or \"wb\", got {other:?}"
            )))
        }
    };
    let gamma0 = defaulted!(defaults, d.gamma0_per_s, "dephasing.gamma0_per_s", 0.0);
    let gamma1 = match d.gamma1_table {
        Some(rows) => {
            Gamma1Source::Table(rows.iter().map(|r| (r[0], r[1])).collect())
        }
        None => Gamma1Source::Constant(defaulted!(
            defaults,
            d.gamma1_per_s,
            "dephasing.gamma1_per_s",
            33333.333333333336 // 1 / 30 µs
        )),
    };
    let dephasing = DephasingParams::new(sigma_phi, sigma_unit, gamma0, gamma1)
        .map_err(|e| CliError::Config(format!("dephasing: {e}")))?;

    let f = raw.fit.unwrap_or_default();
    let sig_lo = defaulted!(defaults, f.sigma_min_phi0, "fit.sigma_min_phi0", 1e-6);
    let sig_hi = defaulted!(defaults, f.sigma_max_phi0, "fit.sigma_max_phi0", 1e-3);
    let sig_n = defaulted!(defaults, f.sigma_points, "fit.sigma_points", 61);
    if !(sig_lo > 0.0 && sig_hi > sig_lo && sig_n >= 2) {
        return Err(CliError::Config(format!(
            "fit sigma grid: need 0 < sigma_min_phi0 < sigma_max_phi0 and \
             sigma_points >= 2, got [{sig_lo}, {sig_hi}] with {sig_n} points"
        )));
    }
    let gam_lo = defaulted!(defaults, f.gamma0_min_per_s, "fit.gamma0_min_per_s", 0.0);
    let gam_hi = defaulted!(defaults, f.gamma0_max_per_s, "fit.gamma0_max_per_s", 2e5);
    let gam_n = defaulted!(defaults, f.gamma0_points, "fit.gamma0_points", 41);
    if !(gam_lo >= 0.0 && gam_hi > gam_lo && gam_n >= 2) {
        return Err(CliError::Config(format!(
            "fit gamma0 grid: need 0 <= gamma0_min_per_s < gamma0_max_per_s and \
             gamma0_points >= 2, got [{gam_lo}, {gam_hi}] with {gam_n} points"
        )));
    }

    let m = raw.mc.unwrap_or_default();
    let mc_extent_m = defaulted!(defaults, m.extent_m, "mc.extent_m", 2.56e-4);
    let mc_grid_points = defaulted!(defaults, m.grid_points, "mc.grid_points", 1024);
    let mc_n_realizations =
        defaulted!(defaults, m.n_realizations, "mc.n_realizations", 4000);
    let mc_seed = defaulted!(defaults, m.seed, "mc.seed", 1);
    let mc_supersample = defaulted!(defaults, m.supersample, "mc.supersample", false);

    let o = raw.output.unwrap_or_default();
    let output_dir = defaulted!(defaults, o.dir.clone(), "output.dir", "out".to_string());

    let cfg = RunConfig {
        geometry_kind,
        geometry,
        spectrum_kind,
        spectrum,
        xi_grid,
        transmon,
        dephasing,
        fit_sigma_grid: gradiflux_core::numerics::logspace(sig_lo, sig_hi, sig_n),
        fit_gamma0_grid: gradiflux_core::numerics::linspace(gam_lo, gam_hi, gam_n),
        mc_extent_m,
        mc_grid_points,
        mc_n_realizations,
        mc_seed,
        mc_supersample,
        output_dir,
        defaults_applied: defaults,
        config_hash,
    };

    // Validate the model sections eagerly so `validate` and every command
    // fail fast with the field named.
    cfg.build_kernel()?;
    cfg.build_spectrum()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn build_kernel(&self) -> CliResult<Box<dyn SensitivityKernel>> {
        StrategyRegistry::builtin()
            .build_kernel(&self.geometry_kind, &self.geometry)
            .map_err(|e| CliError::Config(format!("geometry: {e}")))
    }

    pub fn build_spectrum(&self) -> CliResult<Box<dyn MagnetizationSpectrum>> {
        StrategyRegistry::builtin()
            .build_spectrum(&self.spectrum_kind, &self.spectrum)
            .map_err(|e| CliError::Config(format!("spectrum: {e}")))
    }

    /// Constant Γ₁ used when a dataset row has no t1 column.
    pub fn gamma1_constant(&self) -> f64 {
        self.dephasing.gamma1.at(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> CliResult<RunConfig> {
        let raw: RawConfig = toml::from_str(text)
            .map_err(|e| CliError::Config(format!("config parse error: {e}")))?;
        resolve(raw, fnv1a_hex(text.as_bytes()))
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse(
            "[geometry]\nkind = \"single_ring\"\n[spectrum]\nkind = \"gaussian\"\n",
        )
        .unwrap();
        assert_eq!(cfg.geometry.ring_radius, 5e-6);
        assert!(cfg
            .defaults_applied
            .iter()
            .any(|d| d.starts_with("geometry.ring_radius_m")));
        assert!(cfg
            .defaults_applied
            .iter()
            .any(|d| d.starts_with("dephasing.gamma1_per_s")));
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse("[spectrum]\nxi_corr = 2e-6\n").unwrap_err();
        assert!(err.to_string().contains("xi_corr"), "{err}");
    }

    #[test]
    fn invariant_violation_names_field() {
        let err = parse(
            "[geometry]\nkind = \"single_ring\"\nring_radius_m = 5e-6\nannulus_width_m = 1e-5\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("annulus_width"), "{err}");
    }

    #[test]
    fn gamma1_table_overrides_constant() {
        let cfg = parse(
            "[dephasing]\ngamma1_table = [[0.0, 1e4], [0.2, 3e4]]\n",
        )
        .unwrap();
        assert!((cfg.dephasing.gamma1.at(0.1) - 2e4).abs() < 1e-9);
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(fnv1a_hex(b""), "cbf29ce484222325");
        assert_eq!(fnv1a_hex(b"a"), fnv1a_hex(b"a"));
        assert_ne!(fnv1a_hex(b"a"), fnv1a_hex(b"b"));
    }
}
