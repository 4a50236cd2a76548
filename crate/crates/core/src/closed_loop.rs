//! The 2-state augmented closed loop (plant + feedback filter) and its exact
//! steady-state estimation-error covariance via the Lyapunov equation.
//!
//! State is `[phi, estimate]`; the error is `e = phi - estimate`, so the
//! scalar covariance is `p1 - 2 p2 + p3`.

use crate::filter::{analytic_cov_kalman, analytic_cov_prl, design_kalman, FirstOrderFilter};
use crate::lti::{solve_lyapunov, Matrix2, SymmetricSolution};
use crate::model::{SystemParams, UncertaintyModel};
use crate::robust::design_robust;
use crate::{Error, Result};

/// Plant + filter state-space model `xdot = A x + B w` with an error selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentedSystem {
    pub a_bar: Matrix2,
    pub b_bar: Matrix2,
    pub error_selector: [f64; 2],
}

/// Steady-state covariance matrix and the scalar error covariance it implies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceResult {
    pub p_s: SymmetricSolution,
    pub sigma2: f64,
}

/// Builds the closed loop of a (possibly delta-perturbed) plant with a
/// first-order feedback filter:
///
/// ```text
/// A = [ -lambda(1 - mu delta)    0   ]    B = [ sqrt(kappa)        0         ]
///     [        b               -a    ]        [     0        b / (2|alpha|)  ]
/// ```
pub fn augment(
    params: &SystemParams,
    filter: &FirstOrderFilter,
    uncertainty: &UncertaintyModel,
) -> AugmentedSystem {
    let plant_rate = uncertainty.perturbed_lambda(params.lambda);
    AugmentedSystem {
        a_bar: Matrix2([[-plant_rate, 0.0], [filter.gain_b, -filter.pole_a]]),
        b_bar: Matrix2::diag(
            params.kappa.sqrt(),
            filter.gain_b / (2.0 * params.alpha_mag),
        ),
        error_selector: [1.0, -1.0],
    }
}

/// Solves the Lyapunov equation for the augmented loop and contracts with the
/// error selector.
///
/// For the standard `[1, -1]` selector the scalar covariance is recomputed
/// from a Lyapunov solve in `(phi, e)` coordinates: the direct contraction
/// `p1 - 2 p2 + p3` cancels catastrophically when the plant variance is many
/// orders above the error covariance, while the error-coordinate solve is
/// well conditioned.
pub fn error_covariance(sys: &AugmentedSystem) -> Result<CovarianceResult> {
    let bbt = sys.b_bar.mul(&sys.b_bar.transpose());
    let p_s = solve_lyapunov(&sys.a_bar, &bbt)?;
    let [c0, c1] = sys.error_selector;
    let sigma2 = if sys.error_selector == [1.0, -1.0] {
        error_coordinate_sigma2(sys)?
    } else {
        c0 * c0 * p_s.p1 + 2.0 * c0 * c1 * p_s.p2 + c1 * c1 * p_s.p3
    };
    Ok(CovarianceResult { p_s, sigma2 })
}

/// Variance of `e = x1 - x2` via the change of coordinates `(x1, e)`.
/// Assumes a diagonal `b_bar`, which every loop built here satisfies.
fn error_coordinate_sigma2(sys: &AugmentedSystem) -> Result<f64> {
    let [[a11, a12], [a21, a22]] = sys.a_bar.0;
    let (b1, b2) = (sys.b_bar.0[0][0], sys.b_bar.0[1][1]);
    let a_t = Matrix2([
        [a11 + a12, -a12],
        [a11 + a12 - a21 - a22, a22 - a12],
    ]);
    let b_t = Matrix2([[b1, 0.0], [b1, -b2]]);
    let sol = solve_lyapunov(&a_t, &b_t.mul(&b_t.transpose()))?;
    Ok(sol.p3)
}

/// One row of the lambda sweep behind the filter-comparison figure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaSweepPoint {
    pub lambda: f64,
    pub sigma2_prl: f64,
    pub sigma2_kalman: f64,
}

/// Error covariance of both nominal filters across a strictly ascending
/// lambda grid, at fixed `kappa` and `|alpha|`.
pub fn sweep_lambda(kappa: f64, alpha_mag: f64, lambda_grid: &[f64]) -> Result<Vec<LambdaSweepPoint>> {
    ensure_ascending_positive(lambda_grid)?;
    Ok(lambda_grid
        .iter()
        .map(|&lambda| {
            let p = SystemParams::new(lambda, kappa, alpha_mag);
            LambdaSweepPoint {
                lambda,
                sigma2_prl: analytic_cov_prl(&p),
                sigma2_kalman: analytic_cov_kalman(&p),
            }
        })
        .collect())
}

/// Default lambda grid: 200 log-spaced points over [1e2, 1e7] rad/s.
pub fn default_lambda_grid() -> Vec<f64> {
    log_spaced(1e2, 1e7, 200)
}

pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (llo, lhi) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| 10f64.powf(llo + (lhi - llo) * i as f64 / (n - 1) as f64))
        .collect()
}

/// One row of a delta sweep: both filters run against the same perturbed
/// plant, plus the (delta-independent) robust bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaSweepPoint {
    pub delta: f64,
    pub sigma2_kalman: f64,
    pub sigma2_robust: f64,
    pub q_plus_bound: f64,
}

/// True error covariance of the nominal Kalman design and the robust design
/// against the delta-perturbed plant, for each delta in the grid.
pub fn sweep_delta(
    params: &SystemParams,
    mu: f64,
    delta_grid: &[f64],
) -> Result<Vec<DeltaSweepPoint>> {
    let kalman = design_kalman(params);
    let robust = design_robust(params, mu)?;
    delta_grid
        .iter()
        .map(|&delta| {
            if !(-1.0..=1.0).contains(&delta) {
                return Err(Error::InvalidParameter(format!(
                    "delta grid point {delta} outside [-1, 1]"
                )));
            }
            let u = UncertaintyModel { mu, delta };
            let sigma2_kalman = error_covariance(&augment(params, &kalman, &u))?.sigma2;
            let sigma2_robust = error_covariance(&augment(params, &robust.filter, &u))?.sigma2;
            Ok(DeltaSweepPoint {
                delta,
                sigma2_kalman,
                sigma2_robust,
                q_plus_bound: robust.q_plus,
            })
        })
        .collect()
}

/// Default delta grid: 81 uniform points in [-1, 1].
pub fn default_delta_grid() -> Vec<f64> {
    uniform_grid(-1.0, 1.0, 81)
}

pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn ensure_ascending_positive(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|&x| x <= 0.0) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::GridNotAscending);
    }
    Ok(())
}
