//! `gradiflux`: flux-noise variance, suppression, Ramsey dephasing, and
//! `T₂*(Φ)` fitting for single-loop and gradiometric SQUID transmons.
//!
//! All runs are driven by a TOML config (the reproducibility record); every
//! artifact embeds the config hash, tool version, seed, and the defaults
//! that were applied. Exit codes: 0 ok, 2 config error, 3 data error,
//! 4 numerical error.

mod artifacts;
mod commands;
mod config;
mod dataset;
mod error;

use clap::{Parser, Subcommand};
use commands::XiRange;
use error::CliResult;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "gradiflux",
    version,
    about = "Spatially correlated flux-noise and Ramsey dephasing modeling for SQUID transmons"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Flux variance vs correlation length (CSV: xi_m,variance,quad_err,regime).
    Variance {
        #[arg(long)]
        config: PathBuf,
        /// Sweep lower bound in meters (with --xi-max).
        #[arg(long)]
        xi_min: Option<f64>,
        /// Sweep upper bound in meters.
        #[arg(long)]
        xi_max: Option<f64>,
        /// Points on the logarithmic sweep grid.
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Suppression factor S(xi) of the gradiometric pair (CSV: xi_m,s_factor).
    Suppression {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        xi_min: Option<f64>,
        #[arg(long)]
        xi_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Transition frequency vs flux bias (CSV: phi_phi0,f01_hz).
    SpectrumCurve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = -0.45)]
        phi_min: f64,
        #[arg(long, default_value_t = 0.45)]
        phi_max: f64,
        #[arg(long, default_value_t = 181)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ramsey envelope vs delay at a fixed bias (CSV: t_s,envelope).
    Ramsey {
        #[arg(long)]
        config: PathBuf,
        /// Flux bias in units of the flux quantum.
        #[arg(long, default_value_t = 0.1)]
        phi_phi0: f64,
        /// Largest delay in seconds (default: 3 × T2* at the bias).
        #[arg(long)]
        t_max_s: Option<f64>,
        #[arg(long, default_value_t = 501)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// T2* vs flux bias (CSV: phi_phi0,t2_star_s).
    T2starCurve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0.45)]
        phi_max: f64,
        #[arg(long, default_value_t = 91)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit sigma_phi (and optionally gamma0) to a measured T2* dataset.
    Fit {
        #[arg(long)]
        config: PathBuf,
        /// Dataset CSV: phi_bias,t2_star_us[,t1_us][,weight].
        #[arg(long)]
        data: PathBuf,
        /// Fit (sigma_phi, gamma0) instead of sigma_phi alone.
        #[arg(long)]
        two_param: bool,
        /// Instrument-bias calibration slope (phi0 per raw unit).
        #[arg(long)]
        cal_slope: Option<f64>,
        /// Instrument-bias calibration offset (phi0).
        #[arg(long)]
        cal_offset: Option<f64>,
        /// Outcome JSON path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Landscape CSV path.
        #[arg(long)]
        landscape_out: Option<PathBuf>,
    },
    /// Monte Carlo flux-variance estimate (JSON, optional per-sample CSV).
    Montecarlo {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write per-realization flux samples (CSV: realization,phi_wb).
        #[arg(long)]
        samples_out: Option<PathBuf>,
    },
    /// Check a config (and optionally a dataset) without computing anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Variance {
            config,
            xi_min,
            xi_max,
            points,
            out,
        } => {
            let cfg = config::load_config(&config)?;
            commands::cmd_variance(
                &cfg,
                XiRange {
                    min: xi_min,
                    max: xi_max,
                    points,
                },
                out,
            )
        }
        Command::Suppression {
            config,
            xi_min,
            xi_max,
            points,
            out,
        } => {
            let cfg = config::load_config(&config)?;
            commands::cmd_suppression(
                &cfg,
                XiRange {
                    min: xi_min,
                    max: xi_max,
                    points,
                },
                out,
            )
        }
        Command::SpectrumCurve {
            config,
            phi_min,
            phi_max,
            points,
            out,
        } => {
            let cfg = config::load_config(&config)?;
            commands::cmd_spectrum_curve(&cfg, phi_min, phi_max, points, out)
        }
        Command::Ramsey {
            config,
            phi_phi0,
            t_max_s,
            points,
            out,
        } => {
            let cfg = config::load_config(&config)?;
            commands::cmd_ramsey(&cfg, phi_phi0, t_max_s, points, out)
        }
        Command::T2starCurve {
            config,
            phi_max,
            points,
            out,
        } => {
            let cfg = config::load_config(&config)?;
            commands::cmd_t2star_curve(&cfg, phi_max, points, out)
        }
        Command::Fit {
            config,
            data,
            two_param,
            cal_slope,
            cal_offset,
            out,
            landscape_out,
        } => {
            let cfg = config::load_config(&config)?;
            commands::cmd_fit(&cfg, data, two_param, cal_slope, cal_offset, out, landscape_out)
        }
        Command::Montecarlo {
            config,
            out,
            samples_out,
        } => {
            let cfg = config::load_config(&config)?;
            commands::cmd_montecarlo(&cfg, out, samples_out)
        }
        Command::Validate { config, data } => {
            let cfg = config::load_config(&config)?;
            commands::cmd_validate(&cfg, data)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
