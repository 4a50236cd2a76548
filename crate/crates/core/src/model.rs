//! Plant and uncertainty parameters.
//!
//! The phase evolves as an Ornstein-Uhlenbeck process
//! `dphi = -lambda phi dt + sqrt(kappa) dV`, measured through the linearized
//! homodyne channel `theta = phi + w/(2|alpha|)`. Both driving noises are
//! unit-intensity white by default.

use crate::{Error, Result};

/// Parameters of the OU phase process and the linearized homodyne measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Mean reversion rate lambda, rad/s. `0` is admitted as an analytic
    /// limit case; operations needing the open-loop plant variance
    /// `kappa/(2 lambda)` require it strictly positive.
    pub lambda: f64,
    /// Inverse coherence time kappa, rad/s.
    pub kappa: f64,
    /// Coherent-state amplitude |alpha|, s^(-1/2); photon flux is |alpha|^2.
    pub alpha_mag: f64,
    /// Process-noise intensity Q (unity for a Wiener driver).
    pub q_intensity: f64,
    /// Measurement-noise intensity R (unity for a Wiener driver).
    pub r_intensity: f64,
}

impl SystemParams {
    pub fn new(lambda: f64, kappa: f64, alpha_mag: f64) -> Self {
        Self {
            lambda,
            kappa,
            alpha_mag,
            q_intensity: 1.0,
            r_intensity: 1.0,
        }
    }

    /// Photon flux N = |alpha|^2.
    pub fn photon_flux(&self) -> f64 {
        self.alpha_mag * self.alpha_mag
    }

    /// `4 |alpha|^2`, the coefficient that recurs in every Riccati equation.
    pub fn four_alpha_sq(&self) -> f64 {
        4.0 * self.alpha_mag * self.alpha_mag
    }

    /// Checks all invariants, returning the parameters unchanged when valid.
    /// The first violated invariant is reported by name.
    pub fn validate(self) -> Result<Self> {
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "lambda must be non-negative, got {}",
                self.lambda
            )));
        }
        if !self.kappa.is_finite() || self.kappa <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "kappa must be positive, got {}",
                self.kappa
            )));
        }
        if !self.alpha_mag.is_finite() || self.alpha_mag <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha_mag must be positive, got {}",
                self.alpha_mag
            )));
        }
        if !self.q_intensity.is_finite() || self.q_intensity <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "q_intensity must be positive, got {}",
                self.q_intensity
            )));
        }
        if !self.r_intensity.is_finite() || self.r_intensity <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "r_intensity must be positive, got {}",
                self.r_intensity
            )));
        }
        Ok(self)
    }
}

/// Multiplicative uncertainty in the mean reversion rate: the true plant rate
/// is `lambda (1 - mu * delta)` with `|delta| <= 1` and `0 <= mu < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyModel {
    /// Uncertainty level mu in `[0, 1)`.
    pub mu: f64,
    /// Realized perturbation delta in `[-1, 1]`.
    pub delta: f64,
}

impl UncertaintyModel {
    /// The nominal (unperturbed) plant.
    pub const NONE: Self = Self {
        mu: 0.0,
        delta: 0.0,
    };

    pub fn new(mu: f64, delta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&mu) {
            return Err(Error::InvalidParameter(format!(
                "mu must lie in [0, 1), got {mu}"
            )));
        }
        if !(-1.0..=1.0).contains(&delta) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in [-1, 1], got {delta}"
            )));
        }
        Ok(Self { mu, delta })
    }

    /// Effective plant rate `lambda (1 - mu delta)`.
    pub fn perturbed_lambda(&self, lambda: f64) -> f64 {
        lambda * (1.0 - self.mu * self.delta)
    }
}

/// Nominal experimental parameter set: photon flux `1.3499e6 s^-1`,
/// `kappa = 1.5868e4 rad/s`, `lambda = 6.1451e4 rad/s`.
pub mod nominal {
    use super::SystemParams;

    pub const PHOTON_FLUX: f64 = 1.3499e6;
    pub const KAPPA: f64 = 1.5868e4;
    pub const LAMBDA: f64 = 6.1451e4;

    pub fn params() -> SystemParams {
        SystemParams::new(LAMBDA, KAPPA, PHOTON_FLUX.sqrt())
    }
}
