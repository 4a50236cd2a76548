//! Euler-Maruyama Monte Carlo simulation of the closed loop, used as an
//! independent check on the Lyapunov covariances.
//!
//! Per step, with independent standard normals `xi`, `eta`:
//!
//! ```text
//! phi'      = phi - lambda(1 - mu delta) phi dt + sqrt(kappa dt) xi
//! theta     = phi + eta / (2|alpha| sqrt(dt))
//! estimate' = estimate + (-a estimate + b theta) dt
//! ```
//!
//! Each trajectory draws from its own ChaCha8 stream `(seed, trajectory
//! index)`, so results do not depend on the degree of parallelism. Normals
//! come from a Box-Muller transform (exactly two uniforms per pair, no
//! rejection), keeping streams aligned step for step.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::filter::FirstOrderFilter;
use crate::model::{SystemParams, UncertaintyModel};
use crate::{Error, Result};

/// Discretization and ensemble settings for one simulation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Time step, seconds.
    pub dt: f64,
    /// Trajectory duration, seconds.
    pub t_total: f64,
    /// Number of independent trajectories.
    pub n_traj: usize,
    /// Fraction of each trajectory discarded before averaging.
    pub burn_in_fraction: f64,
    pub seed: u64,
}

impl SimConfig {
    /// Spot-check defaults: `dt = 1e-8 s`, `t_total = 2e-3 s`, 200
    /// trajectories, 20% burn-in.
    pub fn default_with_seed(seed: u64) -> Self {
        Self {
            dt: 1e-8,
            t_total: 2e-3,
            n_traj: 200,
            burn_in_fraction: 0.2,
            seed,
        }
    }

    fn validate(&self, params: &SystemParams, filter: &FirstOrderFilter, mu: f64) -> Result<()> {
        if !(self.dt > 0.0 && self.t_total > 0.0) {
            return Err(Error::InvalidSimConfig(
                "dt and t_total must be positive".into(),
            ));
        }
        if self.n_traj == 0 {
            return Err(Error::InvalidSimConfig("n_traj must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.burn_in_fraction) {
            return Err(Error::InvalidSimConfig(
                "burn_in_fraction must lie in [0, 1)".into(),
            ));
        }
        let fastest = (params.lambda * (1.0 + mu)).max(filter.pole_a);
        if self.dt * fastest > 0.05 {
            return Err(Error::InvalidSimConfig(format!(
                "dt = {} too coarse for fastest rate {fastest} (need dt <= {})",
                self.dt,
                0.05 / fastest
            )));
        }
        // slowest mode must have time to reach steady state
        let plant_rate_min = params.lambda * (1.0 - mu);
        let slowest = if plant_rate_min > 0.0 {
            plant_rate_min.min(filter.pole_a)
        } else {
            filter.pole_a
        };
        if self.t_total * slowest < 20.0 {
            return Err(Error::InvalidSimConfig(format!(
                "t_total = {} shorter than 20 time constants of slowest rate {slowest}",
                self.t_total
            )));
        }
        Ok(())
    }
}

/// Ensemble estimate of the steady-state mean-square estimation error.
///
/// `standard_error` is computed from the `n_samples = n_traj` i.i.d.
/// per-trajectory time averages; it is NaN for a single trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseEstimate {
    pub mse: f64,
    pub standard_error: f64,
    pub n_samples: usize,
}

/// Uniform in (0, 1] from the top 53 bits of a u64.
fn unit_uniform(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Box-Muller pair of independent standard normals.
fn normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1 = unit_uniform(rng);
    let u2 = unit_uniform(rng);
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
    (r * c, r * s)
}

fn simulate_trajectory(
    params: &SystemParams,
    filter: &FirstOrderFilter,
    uncertainty: &UncertaintyModel,
    cfg: &SimConfig,
    traj_index: u64,
    noise_scale: (f64, f64),
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(traj_index);

    let dt = cfg.dt;
    let plant_rate = uncertainty.perturbed_lambda(params.lambda);
    let (q_scale, r_scale) = noise_scale;
    let process_step = (params.kappa * dt).sqrt() * q_scale;
    let meas_noise = r_scale / (2.0 * params.alpha_mag * dt.sqrt());
    let (a, b) = (filter.pole_a, filter.gain_b);

    let n_steps = (cfg.t_total / dt).round() as usize;
    let burn = (cfg.burn_in_fraction * n_steps as f64).floor() as usize;

    // start the plant in its stationary distribution when it exists
    let mut phi = if plant_rate > 0.0 && process_step > 0.0 {
        let (z, _) = normal_pair(&mut rng);
        (params.kappa / (2.0 * plant_rate)).sqrt() * q_scale * z
    } else {
        0.0
    };
    let mut est = 0.0;

    let mut sum = 0.0;
    for k in 0..n_steps {
        if k >= burn {
            let e = phi - est;
            sum += e * e;
        }
        let (xi, eta) = normal_pair(&mut rng);
        let theta = phi + meas_noise * eta;
        est += (-a * est + b * theta) * dt;
        phi += -plant_rate * phi * dt + process_step * xi;
    }
    sum / (n_steps - burn) as f64
}

fn run_ensemble(
    params: &SystemParams,
    filter: &FirstOrderFilter,
    uncertainty: &UncertaintyModel,
    cfg: &SimConfig,
    noise_scale: (f64, f64),
) -> Result<MseEstimate> {
    cfg.validate(params, filter, uncertainty.mu)?;
    let means: Vec<f64> = (0..cfg.n_traj as u64)
        .into_par_iter()
        .map(|i| simulate_trajectory(params, filter, uncertainty, cfg, i, noise_scale))
        .collect();
    // ordered sequential reduction: identical result for any thread count
    let n = means.len() as f64;
    let mse = means.iter().sum::<f64>() / n;
    let standard_error = if means.len() > 1 {
        let var = means.iter().map(|m| (m - mse) * (m - mse)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        f64::NAN
    };
    Ok(MseEstimate {
        mse,
        standard_error,
        n_samples: means.len(),
    })
}

/// Simulates the closed loop and returns the time-and-ensemble averaged
/// squared estimation error. Deterministic for a fixed seed.
pub fn simulate_closed_loop(
    params: &SystemParams,
    filter: &FirstOrderFilter,
    uncertainty: &UncertaintyModel,
    cfg: &SimConfig,
) -> Result<MseEstimate> {
    run_ensemble(params, filter, uncertainty, cfg, (1.0, 1.0))
}

/// Repeats the simulation at `dt`, `dt/2`, `dt/4` with matched duration so
/// discretization bias can be audited against the Lyapunov value.
pub fn convergence_check(
    params: &SystemParams,
    filter: &FirstOrderFilter,
    uncertainty: &UncertaintyModel,
    cfg: &SimConfig,
) -> Result<Vec<(f64, MseEstimate)>> {
    [1.0, 2.0, 4.0]
        .iter()
        .map(|&div| {
            let refined = SimConfig {
                dt: cfg.dt / div,
                ..*cfg
            };
            simulate_closed_loop(params, filter, uncertainty, &refined).map(|m| (refined.dt, m))
        })
        .collect()
}
