//! Run reports and recorded trajectories.

use serde::{Deserialize, Serialize};

use crate::point::Point;

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminationReason {
    Converged,
    MaxIters,
    Diverged,
}

impl std::fmt::Display for TerminationReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TerminationReason::Converged => "converged",
            TerminationReason::MaxIters => "max_iters",
            TerminationReason::Diverged => "diverged",
        };
        f.write_str(s)
    }
}

/// Per-iteration records, one entry per completed iteration `n = 1..=iterations`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Trajectory {
    /// Objective value `F(y_n)`.
    pub objective: Vec<f64>,
    /// Lyapunov value `L_n`.
    pub lyapunov: Vec<f64>,
    /// `|y_n - y_{n-1}|`.
    pub y_step: Vec<f64>,
    /// `|y_n - x_n|`.
    pub fixed_point_residual: Vec<f64>,
    /// Squared step of the full triple, `|x_n - x_{n-1}|^2 + |y_n - y_{n-1}|^2
    /// + |z_n - z_{n-1}|^2`.
    pub triple_step_sq: Vec<f64>,
    /// Problem-supplied residual of `y_n`, when the problem has one.
    pub observed_residual: Vec<f64>,
    /// Stepsize used at iteration `n` (varies under the restart heuristic).
    pub gamma: Vec<f64>,
    /// Iterations at which the restart heuristic changed gamma; Lyapunov
    /// monotonicity is only meaningful between consecutive events.
    pub restart_events: Vec<usize>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.objective.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objective.is_empty()
    }
}

/// Outcome of one solver run.
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Final iterate `y`.
    pub final_point: Point,
    pub iterations: usize,
    pub termination: TerminationReason,
    /// Wall-clock seconds spent iterating (monotonic clock; excludes problem
    /// generation, includes all prox/SVD work).
    pub wall_seconds: f64,
    /// `F` at the final iterate.
    pub final_objective: f64,
    /// Relative error against the ground truth, when the problem supplies one.
    pub rel_error: Option<f64>,
    /// Per-iteration records when recording was requested.
    pub trajectory: Option<Trajectory>,
    /// Name of the RNG that generated the instance, for replay.
    pub rng_name: Option<&'static str>,
}
