//! Fixed-size steady-state solvers: the continuous Lyapunov equation for the
//! 2-state augmented loop, the scalar algebraic Riccati equations, and a
//! Hurwitz check. Everything here is exact linear algebra on 2x2 / scalar
//! problems; no iterative methods.

use crate::model::SystemParams;
use crate::{Error, Result};

/// Row-major 2x2 real matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2(pub [[f64; 2]; 2]);

impl Matrix2 {
    pub fn diag(d0: f64, d1: f64) -> Self {
        Matrix2([[d0, 0.0], [0.0, d1]])
    }

    pub fn identity() -> Self {
        Self::diag(1.0, 1.0)
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let r0 = self.0[0][0].abs() + self.0[0][1].abs();
        let r1 = self.0[1][0].abs() + self.0[1][1].abs();
        r0.max(r1)
    }

    pub fn mul(&self, rhs: &Matrix2) -> Matrix2 {
        let a = &self.0;
        let b = &rhs.0;
        Matrix2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }

    pub fn transpose(&self) -> Matrix2 {
        Matrix2([
            [self.0[0][0], self.0[1][0]],
            [self.0[0][1], self.0[1][1]],
        ])
    }

    pub fn add(&self, rhs: &Matrix2) -> Matrix2 {
        Matrix2([
            [self.0[0][0] + rhs.0[0][0], self.0[0][1] + rhs.0[0][1]],
            [self.0[1][0] + rhs.0[1][0], self.0[1][1] + rhs.0[1][1]],
        ])
    }
}

/// Symmetric solution `[[p1, p2], [p2, p3]]` of a 2x2 Lyapunov equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricSolution {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl SymmetricSolution {
    pub fn as_matrix(&self) -> Matrix2 {
        Matrix2([[self.p1, self.p2], [self.p2, self.p3]])
    }
}

/// True iff both eigenvalues of `a` have real part below `-tol`, with
/// `tol = 1e-12 * max(1, ||a||_inf)`. For a 2x2 this is trace < 0 and det > 0.
pub fn is_hurwitz(a: &Matrix2) -> bool {
    let tol = 1e-12 * a.norm_inf().max(1.0);
    // trace < -2 tol and det > tol^2 would be the literal eigenvalue bound;
    // trace/det margins scaled by tol give the same decision for the systems
    // built here.
    a.trace() < -tol && a.det() > tol * tol
}

/// Solves `a P + P a^T + bbt = 0` for the symmetric steady-state covariance.
///
/// Expanding over the three unknowns `(p1, p2, p3)` gives a 3x3 linear system
/// solved by Gaussian elimination with partial pivoting.
pub fn solve_lyapunov(a: &Matrix2, bbt: &Matrix2) -> Result<SymmetricSolution> {
    if !is_hurwitz(a) {
        return Err(Error::NotHurwitz);
    }
    let [[a11, a12], [a21, a22]] = a.0;
    let m = [
        [2.0 * a11, 2.0 * a12, 0.0],
        [a21, a11 + a22, a12],
        [0.0, 2.0 * a21, 2.0 * a22],
    ];
    let rhs = [-bbt.0[0][0], -bbt.0[0][1], -bbt.0[1][1]];

    let mut x = solve3(&m, &rhs)?;
    // one step of iterative refinement recovers digits lost to conditioning
    let residual = [
        rhs[0] - (m[0][0] * x[0] + m[0][1] * x[1] + m[0][2] * x[2]),
        rhs[1] - (m[1][0] * x[0] + m[1][1] * x[1] + m[1][2] * x[2]),
        rhs[2] - (m[2][0] * x[0] + m[2][1] * x[1] + m[2][2] * x[2]),
    ];
    let correction = solve3(&m, &residual)?;
    for i in 0..3 {
        x[i] += correction[i];
    }

    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::SingularLyapunov);
    }
    Ok(SymmetricSolution {
        p1: x[0],
        p2: x[1],
        p3: x[2],
    })
}

/// 3x3 Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn solve3(m: &[[f64; 3]; 3], rhs: &[f64; 3]) -> Result<[f64; 3]> {
    let mut aug = [
        [m[0][0], m[0][1], m[0][2], rhs[0]],
        [m[1][0], m[1][1], m[1][2], rhs[1]],
        [m[2][0], m[2][1], m[2][2], rhs[2]],
    ];
    for col in 0..3 {
        let pivot_row = (col..3)
            .max_by(|&i, &j| aug[i][col].abs().total_cmp(&aug[j][col].abs()))
            .unwrap();
        if aug[pivot_row][col] == 0.0 {
            return Err(Error::SingularLyapunov);
        }
        aug.swap(col, pivot_row);
        for row in col + 1..3 {
            let f = aug[row][col] / aug[col][col];
            for k in col..4 {
                aug[row][k] -= f * aug[col][k];
            }
        }
    }
    let x2 = aug[2][3] / aug[2][2];
    let x1 = (aug[1][3] - aug[1][2] * x2) / aug[1][1];
    let x0 = (aug[0][3] - aug[0][1] * x1 - aug[0][2] * x2) / aug[0][0];
    Ok([x0, x1, x2])
}

/// Residual `||a P + P a^T + bbt||_inf` of a candidate Lyapunov solution.
pub fn lyapunov_residual(a: &Matrix2, bbt: &Matrix2, p: &SymmetricSolution) -> f64 {
    let pm = p.as_matrix();
    a.mul(&pm).add(&pm.mul(&a.transpose())).add(bbt).norm_inf()
}

/// Positive stabilising root `P` of the Kalman Riccati equation
/// `-2 lambda P - 4|alpha|^2 P^2 + kappa = 0`:
/// `P = (-lambda + sqrt(4 kappa |alpha|^2 + lambda^2)) / (4|alpha|^2)`.
pub fn solve_kalman_riccati(params: &SystemParams) -> f64 {
    let four_a2 = params.four_alpha_sq();
    let lambda = params.lambda;
    // rationalized form of (-lambda + sqrt(..)) / (4|alpha|^2): avoids the
    // cancellation when 4 kappa |alpha|^2 << lambda^2
    params.kappa / (lambda + (params.kappa * four_a2 + lambda * lambda).sqrt())
}

/// Stabilising root `Q+` of the guaranteed-cost Riccati equation
/// `eps Q^2 - 4|alpha|^2 Q^2 - 2 lambda Q + mu^2 lambda^2 / eps + kappa = 0`.
///
/// Requires `0 < eps < 4|alpha|^2` so the quadratic opens downward in
/// `(4|alpha|^2 - eps) Q^2` and the `+sqrt` root is the stabilising one
/// (closed-loop coefficient `-lambda - (4|alpha|^2 - eps) Q+` negative).
pub fn solve_robust_riccati(params: &SystemParams, mu: f64, epsilon: f64) -> Result<f64> {
    let four_a2 = params.four_alpha_sq();
    if !(epsilon > 0.0 && epsilon < four_a2) {
        return Err(Error::EpsilonOutOfRange {
            epsilon,
            limit: four_a2,
        });
    }
    let lambda = params.lambda;
    let kappa = params.kappa;
    let ml2 = mu * mu * lambda * lambda;
    let e = epsilon;
    let disc = lambda * lambda * e * e - e * e * e * kappa - e * e * ml2
        + four_a2 * e * e * kappa
        + four_a2 * e * ml2;
    if disc < 0.0 {
        return Err(Error::NoStabilisingSolution);
    }
    // rationalized form of (-lambda eps + sqrt(disc)) / (eps (4|alpha|^2 - eps)),
    // using disc - lambda^2 eps^2 = eps (4|alpha|^2 - eps)(eps kappa + mu^2 lambda^2)
    let q_plus = (e * kappa + ml2) / (lambda * e + disc.sqrt());
    debug_assert!(-lambda - (four_a2 - e) * q_plus < 0.0);
    Ok(q_plus)
}

/// Residual of the guaranteed-cost Riccati equation at a candidate `q`.
pub fn robust_riccati_residual(params: &SystemParams, mu: f64, epsilon: f64, q: f64) -> f64 {
    let four_a2 = params.four_alpha_sq();
    let lambda = params.lambda;
    (epsilon - four_a2) * q * q - 2.0 * lambda * q
        + mu * mu * lambda * lambda / epsilon
        + params.kappa
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::design_prl;
    use crate::model::nominal;

    #[test]
    fn hurwitz_negative_identity() {
        assert!(is_hurwitz(&Matrix2([[-1.0, 0.0], [0.0, -1.0]])));
    }

    #[test]
    fn hurwitz_rejects_zero_eigenvalues() {
        assert!(!is_hurwitz(&Matrix2([[0.0, 1.0], [0.0, 0.0]])));
    }

    #[test]
    fn hurwitz_nominal_augmented_drift() {
        let p = nominal::params();
        let chi = design_prl(&p).gain_b;
        // eigenvalues are -lambda and -chi_opt
        assert!(is_hurwitz(&Matrix2([[-p.lambda, 0.0], [chi, -chi]])));
    }

    #[test]
    fn lyapunov_isotropic_balance() {
        let a = Matrix2([[-1.0, 0.0], [0.0, -1.0]]);
        let bbt = Matrix2::diag(2.0, 2.0);
        let s = solve_lyapunov(&a, &bbt).unwrap();
        assert!((s.p1 - 1.0).abs() < 1e-14);
        assert!(s.p2.abs() < 1e-14);
        assert!((s.p3 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lyapunov_matches_closed_form_at_nominal() {
        // closed loop of the exponential filter: P1 = kappa/(2 lambda), etc.
        let p = nominal::params();
        let chi = design_prl(&p).gain_b;
        let a = Matrix2([[-p.lambda, 0.0], [chi, -chi]]);
        let b = Matrix2::diag(p.kappa.sqrt(), chi / (2.0 * p.alpha_mag));
        let bbt = b.mul(&b.transpose());
        let s = solve_lyapunov(&a, &bbt).unwrap();

        let (l, k, a2) = (p.lambda, p.kappa, p.alpha_mag * p.alpha_mag);
        let p1 = k / (2.0 * l);
        let p2 = chi * k / (2.0 * l * (l + chi));
        let p3 = (4.0 * chi * a2 * k + chi * l * l + chi * chi * l) / (8.0 * a2 * l * (l + chi));
        assert!((s.p1 - p1).abs() / p1 < 1e-12);
        assert!((s.p2 - p2).abs() / p2 < 1e-12);
        assert!((s.p3 - p3).abs() / p3 < 1e-12);
    }

    #[test]
    fn lyapunov_rejects_unstable_drift() {
        let a = Matrix2([[1.0, 0.0], [0.0, -1.0]]);
        assert!(matches!(
            solve_lyapunov(&a, &Matrix2::identity()),
            Err(Error::NotHurwitz)
        ));
    }

    #[test]
    fn kalman_riccati_nominal() {
        let p = nominal::params();
        let pk = solve_kalman_riccati(&p);
        assert!((pk - 0.044).abs() < 5e-4);
        // residual of the Riccati equation at the returned root
        let res = -2.0 * p.lambda * pk - p.four_alpha_sq() * pk * pk + p.kappa;
        assert!(res.abs() <= 1e-9 * p.kappa);
        // stabilising: closed-loop pole is negative
        assert!(-p.lambda - p.four_alpha_sq() * pk < 0.0);
    }

    #[test]
    fn kalman_riccati_lambda_zero_limit() {
        let p = SystemParams::new(0.0, 1.5868e4, 1.3499e6_f64.sqrt());
        let pk = solve_kalman_riccati(&p);
        let expected = p.kappa.sqrt() / (2.0 * p.alpha_mag);
        assert!((pk - expected).abs() / expected < 1e-14);
    }

    #[test]
    fn kalman_riccati_zero_kappa() {
        let p = SystemParams::new(1.0, 0.0, 1.0);
        assert_eq!(solve_kalman_riccati(&p), 0.0);
    }

    #[test]
    fn robust_riccati_epsilon_range_enforced() {
        let p = nominal::params();
        assert!(matches!(
            solve_robust_riccati(&p, 0.5, 0.0),
            Err(Error::EpsilonOutOfRange { .. })
        ));
        assert!(matches!(
            solve_robust_riccati(&p, 0.5, p.four_alpha_sq()),
            Err(Error::EpsilonOutOfRange { .. })
        ));
    }

    #[test]
    fn robust_riccati_mu_zero_small_eps_approaches_kalman() {
        let p = nominal::params();
        let kalman = solve_kalman_riccati(&p);
        let mut prev_gap = f64::INFINITY;
        for exp in [-2, -4, -6, -8] {
            let eps = p.four_alpha_sq() * 10f64.powi(exp);
            let q = solve_robust_riccati(&p, 0.0, eps).unwrap();
            let gap = (q - kalman).abs() / kalman;
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-6);
    }

    #[test]
    fn robust_riccati_residual_small_on_grid() {
        let p = nominal::params();
        let four_a2 = p.four_alpha_sq();
        for mu in [0.05, 0.5, 0.8] {
            for i in 0..50 {
                let t = (i as f64 + 0.5) / 50.0;
                // log-spaced over (1e-6, ~1) * 4|alpha|^2
                let eps = four_a2 * 10f64.powf(-6.0 * (1.0 - t)) * 0.999;
                let q = solve_robust_riccati(&p, mu, eps).unwrap();
                let res = robust_riccati_residual(&p, mu, eps, q);
                assert!(
                    res.abs() <= 1e-9 * p.kappa,
                    "mu={mu} eps={eps} residual={res}"
                );
            }
        }
    }
}
