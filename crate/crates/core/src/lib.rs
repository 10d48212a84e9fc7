//! Solvers for structured nonconvex composite minimization
//!
//! ```text
//! min_x  F(x) = f(x) + g(x) + hbar(x) - hunder(x)
//! ```
//!
//! where `f` is smooth with a cheap proximity operator, `g` is proper lower
//! semicontinuous (possibly an indicator), `hbar` is smooth, and `hunder` is
//! continuous convex, so that `hbar - hunder` is a difference-of-convex (DC)
//! regularizer. The main iteration is the doubly relaxed
//! forward-Douglas-Rachford splitting (DRFDR) with stepsize `gamma` and
//! relaxation parameters `theta` and `eta`; classic schemes
//! (Douglas-Rachford, Peaceman-Rachford, Davis-Yin, relaxed forward-backward)
//! are parameter choices of the same loop.
//!
//! The crate is organized around:
//! - [`point`]: dense vector/matrix points with a Frobenius inner product;
//! - [`oracles`]: evaluation/gradient/prox/subgradient oracles and
//!   [`ObjectiveSpec`](oracles::ObjectiveSpec);
//! - [`params`]: admissible stepsize ranges (the quadratic `phi`, its roots,
//!   and the case analysis);
//! - [`prox`]: the proximity and subgradient operator toolkit;
//! - [`solver`]: the DRFDR loop, Lyapunov monitoring, stopping rules;
//! - [`baselines`]: forward-backward and GPPA baselines plus named presets;
//! - [`problems`]: builders and generators for the benchmark problems.

pub mod baselines;
pub mod config;
pub mod error;
pub mod oracles;
pub mod params;
pub mod point;
pub mod problems;
pub mod prox;
pub mod report;
pub mod solver;

pub use config::{GammaRestartConfig, SolverConfig, StoppingRule};
pub use error::{OracleError, SolverError};
pub use oracles::{MetricFn, ObjectiveSpec, ProxOracle, SmoothOracle, SubgradOracle};
pub use params::{CaseLabel, GammaRange, ProblemConstants};
pub use point::{check_fd_gradient, inner, Point};
pub use report::{SolveReport, TerminationReason, Trajectory};
pub use solver::{solve, IterateState, LyapunovRecord, SolveContext};
