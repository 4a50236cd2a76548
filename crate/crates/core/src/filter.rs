//! First-order feedback filter designs and their analytic error covariances.
//!
//! Every filter in this crate is the single-state system
//! `d/dt(estimate) = -a * estimate + b * theta`, i.e. the transfer function
//! `b/(s + a)` from the instantaneous estimate `theta` to the fed-back phase
//! estimate.

use crate::model::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterLabel {
    Prl,
    Kalman,
    Robust,
}

impl std::fmt::Display for FilterLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FilterLabel::Prl => write!(f, "prl"),
            FilterLabel::Kalman => write!(f, "kalman"),
            FilterLabel::Robust => write!(f, "robust"),
        }
    }
}

/// Stable first-order filter `b/(s + a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrderFilter {
    /// Denominator coefficient `a` (the pole is at `-a`), rad/s.
    pub pole_a: f64,
    /// Numerator coefficient `b`, rad/s.
    pub gain_b: f64,
    pub label: FilterLabel,
}

impl FirstOrderFilter {
    /// Transfer function rendered as `b/(s+a)` at full precision.
    pub fn transfer_function(&self) -> String {
        format!("{}/(s+{})", self.gain_b, self.pole_a)
    }
}

/// Optimal feedback gain in the `lambda -> 0` limit:
/// `chi_opt = 2 |alpha| sqrt(kappa)`.
pub fn chi_opt(params: &SystemParams) -> f64 {
    2.0 * params.alpha_mag * params.kappa.sqrt()
}

/// The exponential feedback filter `chi/(s + chi)` at `chi = chi_opt`.
pub fn design_prl(params: &SystemParams) -> FirstOrderFilter {
    design_prl_with_chi(params, None)
}

/// Same filter with an explicit `chi`; `None` selects `chi_opt`.
pub fn design_prl_with_chi(params: &SystemParams, chi: Option<f64>) -> FirstOrderFilter {
    let chi = chi.unwrap_or_else(|| chi_opt(params));
    FirstOrderFilter {
        pole_a: chi,
        gain_b: chi,
        label: FilterLabel::Prl,
    }
}

/// Kalman gain `K = -lambda + sqrt(4 kappa |alpha|^2 + lambda^2)`.
pub fn kalman_gain(params: &SystemParams) -> f64 {
    let l = params.lambda;
    let kq = params.kappa * params.four_alpha_sq();
    // rationalized form of -lambda + sqrt(lambda^2 + 4 kappa |alpha|^2)
    kq / (l + (kq + l * l).sqrt())
}

/// The continuous Kalman filter `K/(s + lambda + K)`.
pub fn design_kalman(params: &SystemParams) -> FirstOrderFilter {
    let k = kalman_gain(params);
    FirstOrderFilter {
        pole_a: params.lambda + k,
        gain_b: k,
        label: FilterLabel::Kalman,
    }
}

/// Closed-form error covariance of the exponential filter loop:
/// `sigma_P^2 = chi_opt (lambda + 2 chi_opt) / (8 |alpha|^2 (lambda + chi_opt))`.
pub fn analytic_cov_prl(params: &SystemParams) -> f64 {
    let chi = chi_opt(params);
    let l = params.lambda;
    let a2 = params.alpha_mag * params.alpha_mag;
    chi * (l + 2.0 * chi) / (8.0 * a2 * (l + chi))
}

/// Error covariance of the Kalman loop: `sigma_K^2 = K / (4 |alpha|^2)`,
/// identical to the stabilising Riccati solution.
pub fn analytic_cov_kalman(params: &SystemParams) -> f64 {
    kalman_gain(params) / params.four_alpha_sq()
}
