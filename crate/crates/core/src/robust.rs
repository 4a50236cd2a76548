//! Guaranteed-cost robust filter synthesis for multiplicative uncertainty in
//! the mean reversion rate.
//!
//! The design minimizes the error-covariance upper bound `Q+(eps)` over the
//! scaling parameter `eps`; the minimizer has the closed form implemented by
//! [`epsilon_opt`]. The resulting filter is
//! `G_R(s) = 4|alpha|^2 Q+ / (s + lambda + (4|alpha|^2 - eps) Q+)`.

use crate::filter::{design_kalman, FilterLabel, FirstOrderFilter};
use crate::lti::{solve_kalman_riccati, solve_robust_riccati};
use crate::model::SystemParams;
use crate::{Error, Result};

/// A synthesized robust filter together with the scaling parameter and the
/// guaranteed error-covariance bound it achieves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustDesign {
    /// Scaling parameter eps; 0 only in the `mu = 0` Kalman reduction.
    pub epsilon: f64,
    /// Guaranteed upper bound `Q+` on the error covariance for all `|delta| <= 1`.
    pub q_plus: f64,
    pub filter: FirstOrderFilter,
}

/// Closed-form minimizer of `Q+(eps)`:
/// `eps_opt = (-lambda mu + lambda + sqrt(mu^2 lambda^2 - 2 lambda^2 mu + lambda^2
///            + 4|alpha|^2 kappa)) * mu lambda / kappa`.
///
/// Zero when `mu = 0` (no uncertainty, the Kalman case).
pub fn epsilon_opt(params: &SystemParams, mu: f64) -> f64 {
    let l = params.lambda;
    let k = params.kappa;
    let inner = mu * mu * l * l - 2.0 * l * l * mu + l * l + params.four_alpha_sq() * k;
    (-l * mu + l + inner.sqrt()) * mu * l / k
}

/// Synthesizes the robust filter at `eps = eps_opt(mu)`.
///
/// `mu = 0` is returned as the Kalman design directly: the bound formula is
/// 0/0 at `eps = 0` and the reduction to the Kalman filter is exact in the
/// limit. `lambda = 0` reduces the same way, since the perturbation
/// `mu lambda delta` vanishes.
pub fn design_robust(params: &SystemParams, mu: f64) -> Result<RobustDesign> {
    if !(0.0..1.0).contains(&mu) {
        return Err(Error::InvalidParameter(format!(
            "mu must lie in [0, 1), got {mu}"
        )));
    }
    if mu == 0.0 || params.lambda == 0.0 {
        let filter = FirstOrderFilter {
            label: FilterLabel::Robust,
            ..design_kalman(params)
        };
        return Ok(RobustDesign {
            epsilon: 0.0,
            q_plus: solve_kalman_riccati(params),
            filter,
        });
    }
    let epsilon = epsilon_opt(params, mu);
    let four_a2 = params.four_alpha_sq();
    if !(epsilon > 0.0 && epsilon < four_a2) {
        return Err(Error::EpsilonOptOutOfRange {
            epsilon,
            limit: four_a2,
        });
    }
    let q_plus = solve_robust_riccati(params, mu, epsilon)?;
    Ok(RobustDesign {
        epsilon,
        q_plus,
        filter: FirstOrderFilter {
            pole_a: params.lambda + (four_a2 - epsilon) * q_plus,
            gain_b: four_a2 * q_plus,
            label: FilterLabel::Robust,
        },
    })
}

/// Point on a `Q+(eps)` curve; `q_plus` is `None` where no real stabilising
/// solution exists at that `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPoint {
    pub epsilon: f64,
    pub q_plus: Option<f64>,
}

/// Evaluates `Q+` pointwise over an `eps` grid. Points where the Riccati
/// equation has no real stabilising solution are flagged rather than dropped.
pub fn robust_bound_curve(params: &SystemParams, mu: f64, eps_grid: &[f64]) -> Vec<BoundPoint> {
    eps_grid
        .iter()
        .map(|&epsilon| BoundPoint {
            epsilon,
            q_plus: solve_robust_riccati(params, mu, epsilon).ok(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::analytic_cov_kalman;
    use crate::model::nominal;

    /// Independent minimizer: log grid scan over (0, 4|alpha|^2) refined by
    /// golden-section search on Q+(eps).
    fn epsilon_opt_by_search(params: &SystemParams, mu: f64) -> f64 {
        let four_a2 = params.four_alpha_sq();
        let q = |eps: f64| solve_robust_riccati(params, mu, eps).unwrap_or(f64::INFINITY);
        let n = 10_000;
        let (lo_exp, hi_exp) = (-8.0f64, 0.0f64);
        let mut best = (f64::INFINITY, four_a2 * 1e-4);
        for i in 0..n {
            let t = (i as f64 + 0.5) / n as f64;
            let eps = four_a2 * 10f64.powf(lo_exp + (hi_exp - lo_exp) * t) * 0.999_999;
            let v = q(eps);
            if v < best.0 {
                best = (v, eps);
            }
        }
        // golden-section refine around the grid minimum
        let ratio = 10f64.powf((hi_exp - lo_exp) / n as f64);
        let (mut a, mut b) = (best.1 / ratio / ratio, best.1 * ratio * ratio);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - phi * (b - a);
            let d = a + phi * (b - a);
            if q(c) < q(d) {
                b = d;
            } else {
                a = c;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn epsilon_opt_zero_at_mu_zero() {
        assert_eq!(epsilon_opt(&nominal::params(), 0.0), 0.0);
    }

    #[test]
    fn epsilon_opt_matches_search_oracle() {
        let p = nominal::params();
        for mu in [0.05, 0.8] {
            let closed = epsilon_opt(&p, mu);
            let searched = epsilon_opt_by_search(&p, mu);
            assert!(
                (closed - searched).abs() / searched < 1e-3,
                "mu={mu}: closed {closed} vs search {searched}"
            );
        }
    }

    #[test]
    fn epsilon_opt_stationarity() {
        let p = nominal::params();
        for mu in [0.05, 0.5, 0.8] {
            let e = epsilon_opt(&p, mu);
            let h = 1e-6 * e;
            let qp = solve_robust_riccati(&p, mu, e + h).unwrap();
            let qm = solve_robust_riccati(&p, mu, e - h).unwrap();
            let grad = (qp - qm) / (2.0 * h);
            let q0 = solve_robust_riccati(&p, mu, e).unwrap();
            assert!(grad.abs() <= 1e-4 * q0 / e, "mu={mu}: grad={grad}");
        }
    }

    #[test]
    fn mu_zero_reduces_to_kalman() {
        let p = nominal::params();
        let robust = design_robust(&p, 0.0).unwrap();
        let kalman = design_kalman(&p);
        assert!((robust.filter.pole_a - kalman.pole_a).abs() / kalman.pole_a < 1e-9);
        assert!((robust.filter.gain_b - kalman.gain_b).abs() / kalman.gain_b < 1e-9);
        assert_eq!(robust.epsilon, 0.0);
    }

    #[test]
    fn robustness_costs_nominal_performance() {
        let p = nominal::params();
        let d = design_robust(&p, 0.5).unwrap();
        assert!(d.q_plus >= analytic_cov_kalman(&p));
    }

    #[test]
    fn bound_monotone_in_mu() {
        let p = nominal::params();
        let mut prev = 0.0;
        for mu in [0.0, 0.05, 0.5, 0.8] {
            let q = design_robust(&p, mu).unwrap().q_plus;
            assert!(q >= prev, "mu={mu}: {q} < {prev}");
            prev = q;
        }
    }

    #[test]
    fn coefficients_continuous_at_mu_zero() {
        let p = nominal::params();
        let kalman = design_kalman(&p);
        let mut prev_gap = f64::INFINITY;
        for mu in [1e-3, 1e-6] {
            let d = design_robust(&p, mu).unwrap();
            let gap = ((d.filter.pole_a - kalman.pole_a) / kalman.pole_a).abs()
                + ((d.filter.gain_b - kalman.gain_b) / kalman.gain_b).abs();
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-5);
    }

    #[test]
    fn curve_minimum_near_epsilon_opt() {
        let p = nominal::params();
        let mu = 0.5;
        let e_opt = epsilon_opt(&p, mu);
        let grid: Vec<f64> = (0..2000)
            .map(|i| p.four_alpha_sq() * 10f64.powf(-6.0 + 6.0 * (i as f64 + 0.5) / 2000.0) * 0.999)
            .collect();
        let curve = robust_bound_curve(&p, mu, &grid);
        let min_pt = curve
            .iter()
            .filter_map(|pt| pt.q_plus.map(|q| (pt.epsilon, q)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        // grid minimum should land at the grid point nearest eps_opt
        let nearest = grid
            .iter()
            .copied()
            .min_by(|a, b| (a - e_opt).abs().total_cmp(&(b - e_opt).abs()))
            .unwrap();
        assert_eq!(min_pt.0, nearest);
    }

    #[test]
    fn curve_single_point_grid() {
        let p = nominal::params();
        let e = epsilon_opt(&p, 0.5);
        let curve = robust_bound_curve(&p, 0.5, &[e]);
        assert_eq!(curve.len(), 1);
        assert!(curve[0].q_plus.is_some());
    }

    #[test]
    fn curve_mu_zero_converges_to_kalman() {
        let p = nominal::params();
        let kalman = solve_kalman_riccati(&p);
        let grid = [p.four_alpha_sq() * 1e-9];
        let curve = robust_bound_curve(&p, 0.0, &grid);
        let q = curve[0].q_plus.unwrap();
        assert!((q - kalman).abs() / kalman < 1e-6);
    }
}
