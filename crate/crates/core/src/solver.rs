//! The doubly relaxed forward-Douglas-Rachford iteration.
//!
//! One iteration, given `(y_n, z_n)` and a subgradient selection
//! `y*_n` of `hunder` at `y_n`:
//!
//! ```text
//! x_{n+1} = prox_{gamma f}(z_n)
//! y_{n+1} = prox_{theta gamma g}((theta+1) x_{n+1} - theta z_n
//!             - theta gamma grad_hbar(x_{n+1}) + theta gamma y*_n)
//! z_{n+1} = z_n + eta (y_{n+1} - x_{n+1})
//! ```
//!
//! Along the run the solver can monitor the Lyapunov value
//!
//! ```text
//! L_n = f(x_n) + g(y_n) + hbar(x_n) + <grad_hbar(x_n), y_n - x_n>
//!       - hunder(y_{n-1}) - <y*_{n-1}, y_n - y_{n-1}>
//!       + (1/gamma) <z_n - x_n, y_n - x_n>
//!       - (2 eta theta - 1) / (2 theta gamma) |y_n - x_n|^2,
//! ```
//!
//! which decreases by at least `phi(gamma) / (2 eta theta gamma)
//! |x_{n+1} - x_n|^2` per iteration whenever the stepsize is admissible.

use std::time::Instant;

use crate::config::{GammaRestartConfig, SolverConfig, StoppingRule};
use crate::error::SolverError;
use crate::oracles::{MetricFn, ObjectiveSpec};
use crate::params;
use crate::point::{inner, Point};
use crate::report::{SolveReport, TerminationReason, Trajectory};

/// Iterate norm beyond which a run without a restart heuristic is declared
/// divergent.
pub const DEFAULT_BLOWUP_NORM: f64 = 1e10;

/// Full iterate `(x_n, y_n, z_n)` plus the lagged quantities the Lyapunov
/// value and the diagnostics need.
#[derive(Debug, Clone)]
pub struct IterateState {
    /// `x_n` (the initialization point while `n = 0`).
    pub x: Point,
    /// `y_n`.
    pub y: Point,
    /// `z_n`.
    pub z: Point,
    /// `y_{n-1}`.
    pub y_prev: Point,
    /// `z_{n-1}`.
    pub z_prev: Point,
    /// Subgradient of `hunder` at `y_{n-1}` that produced `y_n`.
    pub y_star: Point,
    pub n: usize,
    /// `L_n`, filled when monitoring is on; undefined before the first step.
    pub lyapunov: Option<f64>,
    /// `|x_n - x_{n-1}|`.
    pub last_x_step: f64,
    /// `|y_n - y_{n-1}|`.
    pub last_y_step: f64,
}

impl IterateState {
    /// State before the first iteration.
    pub fn initial(y0: Point, z0: Point) -> Self {
        assert_eq!(y0.shape(), z0.shape(), "y0 and z0 shapes differ");
        let zeros = Point::zeros(y0.nrows(), y0.ncols());
        Self {
            x: y0.clone(),
            y: y0.clone(),
            z: z0.clone(),
            y_prev: y0,
            z_prev: z0,
            y_star: zeros,
            n: 0,
            lyapunov: None,
            last_x_step: 0.0,
            last_y_step: 0.0,
        }
    }
}

/// One iteration of the splitting.
pub fn drfdr_step(
    state: &IterateState,
    spec: &ObjectiveSpec,
    config: &SolverConfig,
) -> Result<IterateState, SolverError> {
    let gamma = config.gamma;
    let theta = config.theta;
    let eta = config.eta;
    let n = state.n;
    let wrap = |source| SolverError::Oracle {
        iteration: n + 1,
        source,
    };

    let y_star = spec.hunder.subgrad(&state.y).map_err(wrap)?;
    let x_next = spec
        .f
        .prox(&state.z, gamma)
        .ok_or(SolverError::MissingProx)?
        .map_err(wrap)?;
    let grad_hbar = spec.hbar.grad(&x_next);
    let arg = &x_next * (theta + 1.0) - &state.z * theta - &grad_hbar * (theta * gamma)
        + &y_star * (theta * gamma);
    let y_next = spec.g.prox(&arg, theta * gamma).map_err(wrap)?;
    let z_next = &state.z + (&y_next - &x_next) * eta;

    Ok(IterateState {
        last_x_step: (&x_next - &state.x).norm(),
        last_y_step: (&y_next - &state.y).norm(),
        x: x_next,
        y: y_next,
        z: z_next,
        y_prev: state.y.clone(),
        z_prev: state.z.clone(),
        y_star,
        n: n + 1,
        lyapunov: None,
    })
}

/// Lyapunov value and the slack in its one-step bounds.
#[derive(Debug, Clone, Copy)]
pub struct LyapunovRecord {
    /// `L_n`.
    pub l: f64,
    /// `L_n - L_{n-1}`, when the previous value is known.
    pub decrease_slack: Option<f64>,
    /// `L_n` minus its lower bound
    /// `F(y_n) + 0.5 (1/(theta gamma) - kappa - ell) |y_n - x_n|^2`;
    /// nonnegative up to rounding under the standing assumptions.
    pub lower_gap: f64,
    /// Upper bound
    /// `F(y_n) + <y*_n - y*_{n-1}, y_n - y_{n-1}> + 0.5 (1/(theta gamma) +
    /// kappa + ell) |y_n - x_n|^2` minus `L_n`; also nonnegative.
    pub upper_gap: f64,
}

/// Evaluates `L_n` and its bound gaps at a state with `n >= 1`; `None` at the
/// initial state, where the value is not defined.
pub fn lyapunov(
    state: &IterateState,
    spec: &ObjectiveSpec,
    config: &SolverConfig,
    prev_l: Option<f64>,
) -> Result<Option<LyapunovRecord>, SolverError> {
    if state.n == 0 {
        return Ok(None);
    }
    let gamma = config.gamma;
    let theta = config.theta;
    let eta = config.eta;
    let y_minus_x = &state.y - &state.x;
    let dy = &state.y - &state.y_prev;
    let fp_sq = y_minus_x.norm_squared();

    let l = spec.f.eval(&state.x)
        + spec.g.eval(&state.y)
        + spec.hbar.eval(&state.x)
        + inner(&spec.hbar.grad(&state.x), &y_minus_x)
        - spec.hunder.eval(&state.y_prev)
        - inner(&state.y_star, &dy)
        + inner(&(&state.z - &state.x), &y_minus_x) / gamma
        - (2.0 * eta * theta - 1.0) / (2.0 * theta * gamma) * fp_sq;

    let objective = spec.objective(&state.y);
    let kappa_ell = spec.kappa() + spec.ell();
    let lower = objective + 0.5 * (1.0 / (theta * gamma) - kappa_ell) * fp_sq;
    let y_star_now = spec.hunder.subgrad(&state.y).map_err(|source| {
        SolverError::Oracle {
            iteration: state.n,
            source,
        }
    })?;
    let upper = objective
        + inner(&(&y_star_now - &state.y_star), &dy)
        + 0.5 * (1.0 / (theta * gamma) + kappa_ell) * fp_sq;

    Ok(Some(LyapunovRecord {
        l,
        decrease_slack: prev_l.map(|p| l - p),
        lower_gap: l - lower,
        upper_gap: upper - l,
    }))
}

/// Stepsize update of the restart heuristic: while `gamma` is above the floor
/// and the iterates blow up (`x_step > coeff/n` or `|x_n|` too large), shrink
/// it to `max(gamma/2, 0.9999 gamma)`.
pub fn apply_gamma_restart(
    gamma: f64,
    restart: &GammaRestartConfig,
    x_step: f64,
    x_norm: f64,
    n: usize,
) -> f64 {
    debug_assert!(n >= 1, "restart heuristic applies from the first iteration");
    let blowing_up =
        x_step > restart.step_blowup_coeff / n as f64 || x_norm > restart.blowup_norm;
    if gamma > restart.gamma0 && blowing_up {
        (gamma / 2.0).max(0.9999 * gamma)
    } else {
        gamma
    }
}

/// Convergence diagnostics at a state with `n >= 1`.
#[derive(Debug, Clone, Copy)]
pub struct StationarityResiduals {
    /// `|y_n - x_n|`; zero exactly at fixed points.
    pub fixed_point_residual: f64,
    /// `|y_n - y_{n-1}|`.
    pub y_step: f64,
    /// Norm of the certified element of `grad f(x_n) + partial g(y_n)`
    /// assembled from the optimality conditions of the x- and y-updates:
    /// `|y*_{n-1} - grad_hbar(x_n) - (y_n - x_n)/(theta gamma)|`.
    pub opt_cond_residual: f64,
}

pub fn stationarity_residuals(
    state: &IterateState,
    spec: &ObjectiveSpec,
    config: &SolverConfig,
) -> StationarityResiduals {
    debug_assert!(state.n >= 1, "residuals are defined from the first iterate");
    let y_minus_x = &state.y - &state.x;
    let witness =
        &state.y_star - &spec.hbar.grad(&state.x) - &y_minus_x / (config.theta * config.gamma);
    StationarityResiduals {
        fixed_point_residual: y_minus_x.norm(),
        y_step: state.last_y_step,
        opt_cond_residual: witness.norm(),
    }
}

/// Optional problem-supplied diagnostics threaded into a solve.
#[derive(Default, Clone, Copy)]
pub struct SolveContext<'a> {
    /// Residual used by [`StoppingRule::ObservedResidual`] and recorded along
    /// the trajectory.
    pub observed_residual: Option<&'a MetricFn>,
    /// Relative error against a ground truth, reported at termination.
    pub rel_error: Option<&'a MetricFn>,
}

/// Runs the splitting from `(y0, z0)` until the stopping rule fires,
/// `max_iters` is reached, or the iterates blow up with no restart heuristic
/// to rein them in.
///
/// A stepsize outside the admissible range only logs a warning: the benchmark
/// problems intentionally start above the bound and rely on the restart
/// heuristic. Coercivity of the objective is the caller's obligation.
pub fn solve(
    spec: &ObjectiveSpec,
    config: &SolverConfig,
    y0: Point,
    z0: Point,
    ctx: &SolveContext,
) -> Result<SolveReport, SolverError> {
    config.validate().map_err(SolverError::Config)?;
    if !spec.f.has_prox() {
        return Err(SolverError::MissingProx);
    }
    if matches!(config.stopping, StoppingRule::ObservedResidual { .. })
        && ctx.observed_residual.is_none()
    {
        return Err(SolverError::Config(
            "observed-residual stopping needs a problem-supplied residual".to_string(),
        ));
    }
    match spec.constants(config.theta, config.eta) {
        Ok(constants) => {
            if let Err(violation) = params::validate_config(&constants, config.gamma) {
                log::warn!("stepsize not certified admissible: {violation}");
            }
        }
        Err(e) => log::warn!("constants out of range, no admissibility check: {e}"),
    }

    let mut cfg = *config;
    let record = cfg.record_trajectory;
    let mut trajectory = Trajectory::default();
    let mut state = IterateState::initial(y0, z0);
    let mut prev_l: Option<f64> = None;
    let blowup_norm = cfg
        .restart
        .map(|r| r.blowup_norm)
        .unwrap_or(DEFAULT_BLOWUP_NORM);
    let mut termination = TerminationReason::MaxIters;
    let started = Instant::now();

    for _ in 0..cfg.max_iters {
        let mut next = drfdr_step(&state, spec, &cfg)?;
        let z_step = (&next.z - &next.z_prev).norm();

        let observed = ctx.observed_residual.map(|r| r(&next.y));
        if record {
            let rec = lyapunov(&next, spec, &cfg, prev_l)?
                .expect("Lyapunov value defined for n >= 1");
            next.lyapunov = Some(rec.l);
            prev_l = Some(rec.l);
            trajectory.objective.push(spec.objective(&next.y));
            trajectory.lyapunov.push(rec.l);
            trajectory.y_step.push(next.last_y_step);
            trajectory
                .fixed_point_residual
                .push((&next.y - &next.x).norm());
            trajectory.triple_step_sq.push(
                next.last_x_step * next.last_x_step
                    + next.last_y_step * next.last_y_step
                    + z_step * z_step,
            );
            trajectory.observed_residual.push(observed.unwrap_or(f64::NAN));
            trajectory.gamma.push(cfg.gamma);
        }

        let converged = match cfg.stopping {
            StoppingRule::YStep { tol } => next.last_y_step < tol,
            StoppingRule::RelYStep { tol } => {
                let denom = next.y_prev.norm();
                if denom > 0.0 {
                    next.last_y_step / denom < tol
                } else {
                    next.last_y_step < tol
                }
            }
            StoppingRule::ObservedResidual { tol } => {
                observed.expect("checked at entry") < tol
            }
        };

        let x_norm = next.x.norm();
        let x_step = next.last_x_step;
        let n = next.n;
        state = next;

        if converged {
            termination = TerminationReason::Converged;
            break;
        }
        if cfg.restart.is_none() && x_norm > blowup_norm {
            termination = TerminationReason::Diverged;
            break;
        }
        if let Some(restart) = cfg.restart {
            let updated = apply_gamma_restart(cfg.gamma, &restart, x_step, x_norm, n);
            if updated != cfg.gamma {
                cfg.gamma = updated;
                if record {
                    trajectory.restart_events.push(n);
                }
            }
        }
    }

    let wall_seconds = started.elapsed().as_secs_f64();
    Ok(SolveReport {
        final_objective: spec.objective(&state.y),
        rel_error: ctx.rel_error.map(|m| m(&state.y)),
        iterations: state.n,
        termination,
        wall_seconds,
        trajectory: record.then_some(trajectory),
        final_point: state.y,
        rng_name: None,
    })
}
