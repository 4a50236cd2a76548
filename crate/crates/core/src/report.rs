//! CLI command implementations: design reports, covariance sweep CSVs, and
//! the Monte Carlo validation table. Every CSV is written together with a
//! JSON run manifest so the output is reproducible from the manifest alone.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::closed_loop::{augment, error_covariance, sweep_delta, sweep_lambda};
use crate::config::RunConfig;
use crate::filter::{
    analytic_cov_kalman, analytic_cov_prl, chi_opt, design_kalman, design_prl, FilterLabel,
    FirstOrderFilter,
};
use crate::mc::{simulate_closed_loop, SimConfig};
use crate::model::UncertaintyModel;
use crate::robust::design_robust;
use crate::Result;

/// Record of one CLI invocation, emitted next to every CSV.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub parameters: serde_json::Map<String, serde_json::Value>,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            parameters: serde_json::Map::new(),
            seed: None,
            outputs: Vec::new(),
            wall_clock_seconds: 0.0,
        }
    }

    fn param(&mut self, key: &str, value: impl Serialize) {
        self.parameters
            .insert(key.to_string(), serde_json::to_value(value).unwrap());
    }

    fn record_run_config(&mut self, cfg: &RunConfig) {
        self.param("lambda", cfg.params.lambda);
        self.param("kappa", cfg.params.kappa);
        self.param("photon_flux", cfg.params.photon_flux());
        self.param("mu", cfg.uncertainty.mu);
        self.param("delta", cfg.uncertainty.delta);
    }

    fn write_next_to(&self, csv_path: &Path) -> Result<()> {
        let path = manifest_path(csv_path);
        let json = serde_json::to_string_pretty(self).expect("manifest serialization");
        std::fs::write(path, json + "\n")?;
        Ok(())
    }
}

/// `foo.csv` -> `foo.manifest.json`.
pub fn manifest_path(csv_path: &Path) -> PathBuf {
    let mut name = csv_path.file_stem().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    csv_path.with_file_name(name)
}

/// Shortest round-trip decimal formatting; NaN rendered as the sentinel "nan".
fn fmt(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x}")
    }
}

/// Human-readable design report for the configured parameters: the derived
/// constants, all filter transfer functions, and the analytic covariances.
/// Includes the robust design whenever `mu > 0`.
pub fn cmd_design(cfg: &RunConfig) -> Result<String> {
    let p = &cfg.params;
    let prl = design_prl(p);
    let kalman = design_kalman(p);
    let mut out = String::new();
    use std::fmt::Write as _;
    writeln!(out, "parameters:").unwrap();
    writeln!(out, "  lambda      = {} rad/s", p.lambda).unwrap();
    writeln!(out, "  kappa       = {} rad/s", p.kappa).unwrap();
    writeln!(out, "  photon flux = {} 1/s", p.photon_flux()).unwrap();
    writeln!(out, "derived:").unwrap();
    writeln!(out, "  2|alpha|    = {}", 2.0 * p.alpha_mag).unwrap();
    writeln!(out, "  sqrt(kappa) = {}", p.kappa.sqrt()).unwrap();
    writeln!(out, "  chi_opt     = {}", chi_opt(p)).unwrap();
    writeln!(out, "  K           = {}", kalman.gain_b).unwrap();
    writeln!(out, "filters:").unwrap();
    writeln!(out, "  G_P(s) = {}", prl.transfer_function()).unwrap();
    writeln!(out, "  G_K(s) = {}", kalman.transfer_function()).unwrap();
    writeln!(out, "error covariance:").unwrap();
    writeln!(out, "  sigma2_prl    = {}", analytic_cov_prl(p)).unwrap();
    writeln!(out, "  sigma2_kalman = {}", analytic_cov_kalman(p)).unwrap();
    if cfg.uncertainty.mu > 0.0 {
        let d = design_robust(p, cfg.uncertainty.mu)?;
        writeln!(out, "robust design (mu = {}):", cfg.uncertainty.mu).unwrap();
        writeln!(out, "  epsilon_opt = {}", d.epsilon).unwrap();
        writeln!(out, "  Q_plus      = {}", d.q_plus).unwrap();
        writeln!(out, "  G_R(s) = {}", d.filter.transfer_function()).unwrap();
    }
    Ok(out)
}

/// Writes the lambda sweep CSV (`lambda,sigma2_prl,sigma2_kalman`) plus its
/// manifest.
pub fn cmd_sweep_lambda(cfg: &RunConfig, lambda_grid: &[f64], out_path: &Path) -> Result<()> {
    let start = Instant::now();
    let rows = sweep_lambda(cfg.params.kappa, cfg.params.alpha_mag, lambda_grid)?;

    let mut file = std::io::BufWriter::new(std::fs::File::create(out_path)?);
    writeln!(file, "lambda,sigma2_prl,sigma2_kalman")?;
    for r in &rows {
        writeln!(
            file,
            "{},{},{}",
            fmt(r.lambda),
            fmt(r.sigma2_prl),
            fmt(r.sigma2_kalman)
        )?;
    }
    file.flush()?;

    let mut manifest = RunManifest::new("sweep-lambda");
    manifest.record_run_config(cfg);
    manifest.param("lambda_grid_start", lambda_grid.first());
    manifest.param("lambda_grid_stop", lambda_grid.last());
    manifest.param("lambda_grid_points", lambda_grid.len());
    manifest.outputs = vec![out_path.display().to_string()];
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    manifest.write_next_to(out_path)
}

/// Writes the delta sweep CSV
/// (`delta,sigma2_kalman,sigma2_robust,q_plus_bound`) plus its manifest.
pub fn cmd_sweep_delta(
    cfg: &RunConfig,
    mu: f64,
    delta_grid: &[f64],
    out_path: &Path,
) -> Result<()> {
    let start = Instant::now();
    let rows = sweep_delta(&cfg.params, mu, delta_grid)?;

    let mut file = std::io::BufWriter::new(std::fs::File::create(out_path)?);
    writeln!(file, "delta,sigma2_kalman,sigma2_robust,q_plus_bound")?;
    for r in &rows {
        writeln!(
            file,
            "{},{},{},{}",
            fmt(r.delta),
            fmt(r.sigma2_kalman),
            fmt(r.sigma2_robust),
            fmt(r.q_plus_bound)
        )?;
    }
    file.flush()?;

    let mut manifest = RunManifest::new("sweep-delta");
    manifest.record_run_config(cfg);
    manifest.param("mu", mu);
    manifest.param("delta_grid_points", delta_grid.len());
    manifest.outputs = vec![out_path.display().to_string()];
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    manifest.write_next_to(out_path)
}

/// The nine Monte Carlo spot cases: each filter against the nominal plant and
/// against strongly perturbed plants.
pub fn validation_cases() -> Vec<(FilterLabel, f64, f64)> {
    let mut cases = Vec::new();
    for label in [FilterLabel::Prl, FilterLabel::Kalman, FilterLabel::Robust] {
        for (mu, delta) in [(0.0, 0.0), (0.5, 1.0), (0.8, 1.0)] {
            cases.push((label, mu, delta));
        }
    }
    cases
}

fn filter_for(label: FilterLabel, cfg: &RunConfig, mu: f64) -> Result<FirstOrderFilter> {
    Ok(match label {
        FilterLabel::Prl => design_prl(&cfg.params),
        FilterLabel::Kalman => design_kalman(&cfg.params),
        FilterLabel::Robust => design_robust(&cfg.params, mu)?.filter,
    })
}

/// One row of the Monte Carlo vs. Lyapunov audit table.
#[derive(Debug, Clone, Copy)]
pub struct ValidationRow {
    pub label: FilterLabel,
    pub mu: f64,
    pub delta: f64,
    pub analytic_sigma2: f64,
    pub mc_mse: f64,
    pub mc_stderr: f64,
    pub agrees_3se: bool,
}

/// Runs the nine spot cases, comparing ensemble MSE against the Lyapunov
/// covariance at 3 standard errors.
pub fn run_validation(cfg: &RunConfig, sim: &SimConfig) -> Result<Vec<ValidationRow>> {
    validation_cases()
        .into_iter()
        .map(|(label, mu, delta)| {
            let filter = filter_for(label, cfg, mu)?;
            let u = UncertaintyModel { mu, delta };
            let analytic = error_covariance(&augment(&cfg.params, &filter, &u))?.sigma2;
            let est = simulate_closed_loop(&cfg.params, &filter, &u, sim)?;
            let agrees_3se = est.standard_error.is_finite()
                && (est.mse - analytic).abs() <= 3.0 * est.standard_error;
            Ok(ValidationRow {
                label,
                mu,
                delta,
                analytic_sigma2: analytic,
                mc_mse: est.mse,
                mc_stderr: est.standard_error,
                agrees_3se,
            })
        })
        .collect()
}

/// Writes the validation CSV
/// (`filter,mu,delta,analytic_sigma2,mc_mse,mc_stderr,agrees_3se`) plus its
/// manifest.
pub fn cmd_validate(cfg: &RunConfig, sim: &SimConfig, out_path: &Path) -> Result<()> {
    let start = Instant::now();
    let rows = run_validation(cfg, sim)?;

    let mut file = std::io::BufWriter::new(std::fs::File::create(out_path)?);
    writeln!(file, "filter,mu,delta,analytic_sigma2,mc_mse,mc_stderr,agrees_3se")?;
    for r in &rows {
        writeln!(
            file,
            "{},{},{},{},{},{},{}",
            r.label,
            fmt(r.mu),
            fmt(r.delta),
            fmt(r.analytic_sigma2),
            fmt(r.mc_mse),
            fmt(r.mc_stderr),
            r.agrees_3se
        )?;
    }
    file.flush()?;

    let mut manifest = RunManifest::new("validate");
    manifest.record_run_config(cfg);
    manifest.param("dt", sim.dt);
    manifest.param("t_total", sim.t_total);
    manifest.param("n_traj", sim.n_traj);
    manifest.param("burn_in_fraction", sim.burn_in_fraction);
    manifest.seed = Some(sim.seed);
    manifest.outputs = vec![out_path.display().to_string()];
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    manifest.write_next_to(out_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn design_report_contains_printed_values() {
        let report = cmd_design(&RunConfig::default()).unwrap();
        assert!(report.contains("sigma2_prl    = 0.0495"), "{report}");
        assert!(report.contains("sigma2_kalman = 0.0440"), "{report}");
        assert!(!report.contains("robust design"));
    }

    #[test]
    fn design_report_lambda_zero() {
        let mut cfg = RunConfig::default();
        cfg.params.lambda = 0.0;
        let report = cmd_design(&cfg).unwrap();
        assert!(report.contains("sigma2_prl    = 0.0542"), "{report}");
        assert!(report.contains("sigma2_kalman = 0.0542"), "{report}");
    }

    #[test]
    fn design_report_includes_robust_block() {
        let mut cfg = RunConfig::default();
        cfg.uncertainty.mu = 0.05;
        let report = cmd_design(&cfg).unwrap();
        assert!(report.contains("Q_plus"), "{report}");
        assert!(report.contains("G_R(s)"), "{report}");
    }

    #[test]
    fn manifest_path_derivation() {
        assert_eq!(
            manifest_path(Path::new("/tmp/out/sweep.csv")),
            PathBuf::from("/tmp/out/sweep.manifest.json")
        );
    }

    #[test]
    fn nan_formats_as_sentinel() {
        assert_eq!(fmt(f64::NAN), "nan");
        assert_eq!(fmt(0.0495), "0.0495");
    }
}
