//! Solver configuration: stepsize, relaxation parameters, stopping rules, and
//! the stepsize-restart heuristic.

use serde::{Deserialize, Serialize};

/// Termination test applied after each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StoppingRule {
    /// Stop when `|y_{n+1} - y_n| < tol`.
    YStep { tol: f64 },
    /// Stop when `|y_{n+1} - y_n| / |y_n| < tol` (absolute step when `y_n = 0`).
    RelYStep { tol: f64 },
    /// Stop when a problem-supplied residual of `y_{n+1}` drops below `tol`.
    ObservedResidual { tol: f64 },
}

impl StoppingRule {
    pub fn tol(&self) -> f64 {
        match *self {
            StoppingRule::YStep { tol }
            | StoppingRule::RelYStep { tol }
            | StoppingRule::ObservedResidual { tol } => tol,
        }
    }

    fn validate(&self) -> Result<(), String> {
        if self.tol() > 0.0 {
            Ok(())
        } else {
            Err(format!("stopping tolerance must be positive, got {}", self.tol()))
        }
    }
}

/// Decreasing-stepsize heuristic: start at `k * gamma0` and shrink gamma
/// whenever the iterates show signs of blowing up, but never below `gamma0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaRestartConfig {
    /// Stepsize floor; the update only fires while `gamma > gamma0`.
    pub gamma0: f64,
    /// Initial multiplier: the run starts at `gamma = k * gamma0`.
    pub k: f64,
    /// `|x_n|` beyond this norm counts as a blowup (default `1e10`).
    pub blowup_norm: f64,
    /// `|x_{n+1} - x_n| > step_blowup_coeff / n` counts as a blowup
    /// (default `1000`).
    pub step_blowup_coeff: f64,
}

impl GammaRestartConfig {
    pub fn new(gamma0: f64, k: f64) -> Self {
        Self {
            gamma0,
            k,
            blowup_norm: 1e10,
            step_blowup_coeff: 1000.0,
        }
    }

    /// Stepsize the run starts from.
    pub fn initial_gamma(&self) -> f64 {
        self.k * self.gamma0
    }
}

/// Full configuration of a DRFDR run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Stepsize gamma > 0.
    pub gamma: f64,
    /// Relaxation parameter theta in (0, 1].
    pub theta: f64,
    /// Relaxation parameter eta > 0.
    pub eta: f64,
    pub max_iters: usize,
    pub stopping: StoppingRule,
    pub restart: Option<GammaRestartConfig>,
    /// Record per-iteration objective/Lyapunov/residual trajectories.
    pub record_trajectory: bool,
}

impl SolverConfig {
    /// Configuration with `theta = 1`, `eta = 1`, a `1e-6` y-step tolerance,
    /// and no trajectory recording.
    pub fn new(gamma: f64) -> Self {
        Self {
            gamma,
            theta: 1.0,
            eta: 1.0,
            max_iters: 1000,
            stopping: StoppingRule::YStep { tol: 1e-6 },
            restart: None,
            record_trajectory: false,
        }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_stopping(mut self, stopping: StoppingRule) -> Self {
        self.stopping = stopping;
        self
    }

    pub fn with_restart(mut self, restart: GammaRestartConfig) -> Self {
        self.restart = Some(restart);
        self.gamma = restart.initial_gamma();
        self
    }

    pub fn with_recording(mut self) -> Self {
        self.record_trajectory = true;
        self
    }

    /// Checks the structural constraints on the parameters (positivity and
    /// ranges); stepsize admissibility against the objective's constants is a
    /// separate concern handled by [`crate::params::validate_config`].
    pub fn validate(&self) -> Result<(), String> {
        if !(self.gamma > 0.0) {
            return Err(format!("gamma must be positive, got {}", self.gamma));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(format!("theta must lie in (0, 1], got {}", self.theta));
        }
        if !(self.eta > 0.0) {
            return Err(format!("eta must be positive, got {}", self.eta));
        }
        if self.max_iters == 0 {
            return Err("max_iters must be >= 1".to_string());
        }
        self.stopping.validate()?;
        if let Some(r) = &self.restart {
            if !(r.gamma0 > 0.0 && r.k > 0.0 && r.blowup_norm > 0.0 && r.step_blowup_coeff > 0.0) {
                return Err("restart parameters must be positive".to_string());
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_catches_bad_parameters() {
        assert!(SolverConfig::new(0.1).validate().is_ok());
        assert!(SolverConfig::new(0.0).validate().is_err());
        assert!(SolverConfig::new(0.1).with_theta(1.5).validate().is_err());
        assert!(SolverConfig::new(0.1).with_theta(0.0).validate().is_err());
        assert!(SolverConfig::new(0.1).with_eta(0.0).validate().is_err());
        assert!(SolverConfig::new(0.1).with_max_iters(0).validate().is_err());
        let bad_tol = SolverConfig::new(0.1).with_stopping(StoppingRule::YStep { tol: 0.0 });
        assert!(bad_tol.validate().is_err());
    }

    #[test]
    fn restart_sets_initial_gamma() {
        let cfg = SolverConfig::new(0.2).with_restart(GammaRestartConfig::new(0.2, 5.0));
        assert_eq!(cfg.gamma, 1.0);
        assert!(cfg.validate().is_ok());
    }
}
