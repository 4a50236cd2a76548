//! `ouphase`: design reports, covariance sweeps, and Monte Carlo validation
//! for the adaptive phase estimation filters.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ouphase::closed_loop::{log_spaced, uniform_grid};
use ouphase::config::RunConfig;
use ouphase::mc::SimConfig;
use ouphase::report;
use ouphase::{Error, Result};

/// Output directory override; relative `--out` paths are resolved against it.
const OUT_DIR_ENV: &str = "OUPHASE_OUT_DIR";

#[derive(Parser)]
#[command(name = "ouphase", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// key=value config file (lambda, kappa, photon_flux, mu, delta)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the uncertainty level from the config file
    #[arg(long)]
    mu: Option<f64>,
}

impl Common {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(mu) = self.mu {
            cfg.uncertainty = ouphase::UncertaintyModel::new(mu, cfg.uncertainty.delta)?;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the filter designs and analytic error covariances
    Design {
        #[command(flatten)]
        common: Common,
    },
    /// CSV of sigma2 vs lambda for the exponential and Kalman filters
    SweepLambda {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "sweep_lambda.csv")]
        out: PathBuf,
        /// Log-spaced grid start, rad/s
        #[arg(long, default_value_t = 1e2)]
        grid_start: f64,
        /// Log-spaced grid stop, rad/s
        #[arg(long, default_value_t = 1e7)]
        grid_stop: f64,
        #[arg(long, default_value_t = 200)]
        grid_points: usize,
    },
    /// CSV of sigma2 vs delta for the Kalman and robust filters
    SweepDelta {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "sweep_delta.csv")]
        out: PathBuf,
        #[arg(long, default_value_t = -1.0)]
        delta_min: f64,
        #[arg(long, default_value_t = 1.0)]
        delta_max: f64,
        #[arg(long, default_value_t = 81)]
        delta_points: usize,
    },
    /// Monte Carlo vs Lyapunov audit table over the nine spot cases
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "validate.csv")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-8)]
        dt: f64,
        #[arg(long, default_value_t = 2e-3)]
        t_total: f64,
        #[arg(long, default_value_t = 200)]
        n_traj: usize,
        #[arg(long, default_value_t = 0.2)]
        burn_in: f64,
    },
}

fn resolve_out(out: PathBuf) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if out.is_relative() => PathBuf::from(dir).join(out),
        _ => out,
    }
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Design { common } => {
            print!("{}", report::cmd_design(&common.load()?)?);
            Ok(())
        }
        Command::SweepLambda {
            common,
            out,
            grid_start,
            grid_stop,
            grid_points,
        } => {
            if grid_start <= 0.0 || grid_stop <= grid_start || grid_points == 0 {
                return Err(Error::GridNotAscending);
            }
            let grid = if grid_points == 1 {
                vec![grid_start]
            } else {
                log_spaced(grid_start, grid_stop, grid_points)
            };
            report::cmd_sweep_lambda(&common.load()?, &grid, &resolve_out(out))
        }
        Command::SweepDelta {
            common,
            out,
            delta_min,
            delta_max,
            delta_points,
        } => {
            let cfg = common.load()?;
            let grid = if delta_points == 1 {
                vec![delta_min]
            } else {
                uniform_grid(delta_min, delta_max, delta_points)
            };
            report::cmd_sweep_delta(&cfg, cfg.uncertainty.mu, &grid, &resolve_out(out))
        }
        Command::Validate {
            common,
            out,
            seed,
            dt,
            t_total,
            n_traj,
            burn_in,
        } => {
            let sim = SimConfig {
                dt,
                t_total,
                n_traj,
                burn_in_fraction: burn_in,
                seed,
            };
            report::cmd_validate(&common.load()?, &sim, &resolve_out(out))
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
