//! Adaptive estimation of a continuously varying optical phase driven by an
//! Ornstein-Uhlenbeck process.
//!
//! Three first-order feedback filters are designed and compared:
//!
//! - the exponential feedback filter `G_P(s) = chi/(s + chi)` with
//!   `chi = 2|alpha| sqrt(kappa)`,
//! - the optimal continuous Kalman filter `G_K(s) = K/(s + lambda + K)`,
//! - a guaranteed-cost robust filter `G_R(s)` that tolerates multiplicative
//!   uncertainty in the mean reversion rate `lambda`.
//!
//! Steady-state estimation-error covariances are computed three independent
//! ways: closed-form expressions ([`filter`]), the Lyapunov equation of the
//! 2-state augmented loop ([`closed_loop`]), and Euler-Maruyama Monte Carlo
//! simulation ([`mc`]). The `ouphase` binary exposes design reports,
//! covariance sweeps, and the Monte Carlo validation table as CSV.

pub mod closed_loop;
pub mod config;
pub mod filter;
pub mod lti;
pub mod mc;
pub mod model;
pub mod report;
pub mod robust;

pub use closed_loop::{AugmentedSystem, CovarianceResult};
pub use filter::{FilterLabel, FirstOrderFilter};
pub use lti::{Matrix2, SymmetricSolution};
pub use mc::{MseEstimate, SimConfig};
pub use model::{SystemParams, UncertaintyModel};
pub use robust::RobustDesign;

/// Errors produced by parameter validation, the solvers, and the CLI front end.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    InvalidParameter(String),
    #[error("no steady-state covariance: drift matrix is not Hurwitz")]
    NotHurwitz,
    #[error("singular linear system in Lyapunov solve")]
    SingularLyapunov,
    #[error("epsilon must lie in (0, 4|alpha|^2): got {epsilon}, limit {limit}")]
    EpsilonOutOfRange { epsilon: f64, limit: f64 },
    #[error("no real stabilising solution of the robust Riccati equation")]
    NoStabilisingSolution,
    #[error("optimal epsilon {epsilon} falls outside (0, 4|alpha|^2) = (0, {limit})")]
    EpsilonOptOutOfRange { epsilon: f64, limit: f64 },
    #[error("invalid simulation config: {0}")]
    InvalidSimConfig(String),
    #[error("config parse error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },
    #[error("grid must be strictly ascending")]
    GridNotAscending,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
