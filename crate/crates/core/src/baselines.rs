//! Baseline algorithms and named parameterizations.
//!
//! Forward-backward splitting (FBS) and the generalized proximal point
//! algorithm (GPPA, a proximal DC step) are coded independently of the main
//! solver so they can serve both as benchmark competitors and as
//! cross-checks. The `make_*` constructors realize Douglas-Rachford (DRS,
//! and DRSR with the Tikhonov term folded into `f`), Davis-Yin (DYS), and
//! Peaceman-Rachford (PRS) as parameter choices of the main loop.

use std::sync::Arc;
use std::time::Instant;

use crate::config::{SolverConfig, StoppingRule};
use crate::error::SolverError;
use crate::oracles::{ObjectiveSpec, ProxOracle, SmoothOracle, SubgradOracle};
use crate::point::Point;
use crate::report::{SolveReport, TerminationReason, Trajectory};
use crate::solver::SolveContext;

/// One forward-backward step `prox_{gamma g}(x - gamma grad f(x))`.
pub fn fbs_step(
    x: &Point,
    smooth: &SmoothOracle,
    nonsmooth: &ProxOracle,
    gamma: f64,
) -> Result<Point, SolverError> {
    assert!(gamma > 0.0, "stepsize must be positive");
    let forward = x - smooth.grad(x) * gamma;
    nonsmooth
        .prox(&forward, gamma)
        .map_err(|source| SolverError::Oracle {
            iteration: 0,
            source,
        })
}

/// DC splitting `g1 + g2 - h` for the proximal point baseline: `g1` proper
/// lsc with a prox, `g2` smooth with Lipschitz gradient, `h` convex.
pub struct GppaSplit {
    pub g1: ProxOracle,
    pub g2: SmoothOracle,
    pub h: SubgradOracle,
    /// Proximal stepsize, `1 / L2` by default.
    pub stepsize: f64,
}

impl GppaSplit {
    pub fn new(g1: ProxOracle, g2: SmoothOracle, h: SubgradOracle) -> Self {
        let stepsize = if g2.lipschitz > 0.0 {
            1.0 / g2.lipschitz
        } else {
            1.0
        };
        Self {
            g1,
            g2,
            h,
            stepsize,
        }
    }

    pub fn with_stepsize(mut self, stepsize: f64) -> Self {
        assert!(stepsize > 0.0, "stepsize must be positive");
        self.stepsize = stepsize;
        self
    }

    /// Value of `g1 + g2 - h`.
    pub fn objective(&self, x: &Point) -> f64 {
        self.g1.eval(x) + self.g2.eval(x) - self.h.eval(x)
    }
}

/// One GPPA step `prox_{t g1}(x - t grad g2(x) + t xi)` with
/// `xi` a subgradient of `h` at `x`.
pub fn gppa_step(x: &Point, split: &GppaSplit) -> Result<Point, SolverError> {
    let t = split.stepsize;
    let wrap = |source| SolverError::Oracle {
        iteration: 0,
        source,
    };
    let xi = split.h.subgrad(x).map_err(wrap)?;
    let arg = x - split.g2.grad(x) * t + xi * t;
    split.g1.prox(&arg, t).map_err(wrap)
}

fn single_sequence_stop(stopping: &StoppingRule, step: f64, prev_norm: f64) -> bool {
    match *stopping {
        StoppingRule::YStep { tol } => step < tol,
        StoppingRule::RelYStep { tol } => {
            if prev_norm > 0.0 {
                step / prev_norm < tol
            } else {
                step < tol
            }
        }
        // handled by the caller, which owns the residual closure
        StoppingRule::ObservedResidual { .. } => false,
    }
}

fn run_single_sequence(
    mut x: Point,
    mut step_fn: impl FnMut(&Point) -> Result<Point, SolverError>,
    objective: impl Fn(&Point) -> f64,
    config: &SolverConfig,
    ctx: &SolveContext,
) -> Result<SolveReport, SolverError> {
    config.validate().map_err(SolverError::Config)?;
    if matches!(config.stopping, StoppingRule::ObservedResidual { .. })
        && ctx.observed_residual.is_none()
    {
        return Err(SolverError::Config(
            "observed-residual stopping needs a problem-supplied residual".to_string(),
        ));
    }
    let record = config.record_trajectory;
    let mut trajectory = Trajectory::default();
    let mut termination = TerminationReason::MaxIters;
    let mut iterations = 0;
    let started = Instant::now();
    for n in 1..=config.max_iters {
        let next = step_fn(&x).map_err(|e| match e {
            SolverError::Oracle { source, .. } => SolverError::Oracle {
                iteration: n,
                source,
            },
            other => other,
        })?;
        let step = (&next - &x).norm();
        let prev_norm = x.norm();
        let observed = ctx.observed_residual.map(|r| r(&next));
        if record {
            trajectory.objective.push(objective(&next));
            trajectory.lyapunov.push(f64::NAN);
            trajectory.y_step.push(step);
            trajectory.fixed_point_residual.push(f64::NAN);
            trajectory.triple_step_sq.push(step * step);
            trajectory.observed_residual.push(observed.unwrap_or(f64::NAN));
            trajectory.gamma.push(config.gamma);
        }
        x = next;
        iterations = n;
        let converged = match config.stopping {
            StoppingRule::ObservedResidual { tol } => observed.expect("checked at entry") < tol,
            _ => single_sequence_stop(&config.stopping, step, prev_norm),
        };
        if converged {
            termination = TerminationReason::Converged;
            break;
        }
        if x.norm() > crate::solver::DEFAULT_BLOWUP_NORM {
            termination = TerminationReason::Diverged;
            break;
        }
    }
    Ok(SolveReport {
        final_objective: objective(&x),
        rel_error: ctx.rel_error.map(|m| m(&x)),
        iterations,
        termination,
        wall_seconds: started.elapsed().as_secs_f64(),
        trajectory: record.then_some(trajectory),
        final_point: x,
        rng_name: None,
    })
}

/// Runs forward-backward splitting from `x0`. Only `gamma`, `max_iters`,
/// `stopping`, and `record_trajectory` of the configuration are used.
pub fn fbs_solve(
    smooth: &SmoothOracle,
    nonsmooth: &ProxOracle,
    x0: Point,
    config: &SolverConfig,
    ctx: &SolveContext,
) -> Result<SolveReport, SolverError> {
    let gamma = config.gamma;
    run_single_sequence(
        x0,
        |x| fbs_step(x, smooth, nonsmooth, gamma),
        |x| smooth.eval(x) + nonsmooth.eval(x),
        config,
        ctx,
    )
}

/// Runs GPPA from `x0`. Only `max_iters`, `stopping`, and
/// `record_trajectory` of the configuration are used; the stepsize lives in
/// the split.
pub fn gppa_solve(
    split: &GppaSplit,
    x0: Point,
    config: &SolverConfig,
    ctx: &SolveContext,
) -> Result<SolveReport, SolverError> {
    run_single_sequence(
        x0,
        |x| gppa_step(x, split),
        |x| split.objective(x),
        config,
        ctx,
    )
}

/// Smooth oracle for `a + b` (no prox attached).
pub fn combine_smooth(a: Arc<SmoothOracle>, b: Arc<SmoothOracle>) -> SmoothOracle {
    let alpha = a.alpha + b.alpha;
    let lipschitz = a.lipschitz + b.lipschitz;
    let (ea, eb) = (Arc::clone(&a), Arc::clone(&b));
    SmoothOracle::new(
        move |x| ea.eval(x) + eb.eval(x),
        move |x| a.grad(x) + b.grad(x),
        alpha,
        lipschitz,
    )
}

/// Davis-Yin: drop the concave part, `theta = 1`, `eta = 1`.
pub fn make_dys(spec: ObjectiveSpec, config: SolverConfig) -> (ObjectiveSpec, SolverConfig) {
    let spec = ObjectiveSpec {
        hunder: SubgradOracle::zero(),
        ..spec
    };
    (spec, config.with_theta(1.0).with_eta(1.0))
}

/// Douglas-Rachford: drop the whole DC regularizer, `theta = 1`, `eta = 1`.
pub fn make_drs(spec: ObjectiveSpec, config: SolverConfig) -> (ObjectiveSpec, SolverConfig) {
    let spec = ObjectiveSpec {
        hbar: SmoothOracle::zero(),
        hunder: SubgradOracle::zero(),
        ..spec
    };
    (spec, config.with_theta(1.0).with_eta(1.0))
}

/// Peaceman-Rachford: drop the DC regularizer, `theta = 1`, `eta = 2`.
pub fn make_prs(spec: ObjectiveSpec, config: SolverConfig) -> (ObjectiveSpec, SolverConfig) {
    let spec = ObjectiveSpec {
        hbar: SmoothOracle::zero(),
        hunder: SubgradOracle::zero(),
        ..spec
    };
    (spec, config.with_theta(1.0).with_eta(2.0))
}

/// Douglas-Rachford with the Tikhonov term `(rho/2) |x|^2` (the problem's
/// `hbar`) folded into `f`'s prox in closed form:
/// `prox_{t (f + rho/2 |.|^2)}(z) = prox_{t' f}(z / (1 + t rho))` with
/// `t' = t / (1 + t rho)`. Requires `hbar` to be exactly `(rho/2) |.|^2`.
pub fn make_drsr(
    spec: ObjectiveSpec,
    rho: f64,
    config: SolverConfig,
) -> (ObjectiveSpec, SolverConfig) {
    assert!(rho >= 0.0, "Tikhonov weight must be nonnegative");
    let f = Arc::new(spec.f);
    let alpha = f.alpha + rho;
    let lipschitz = f.lipschitz + rho;
    let (fe, fg, fp) = (Arc::clone(&f), Arc::clone(&f), Arc::clone(&f));
    let folded = SmoothOracle::new(
        move |x| fe.eval(x) + 0.5 * rho * x.norm_squared(),
        move |x| fg.grad(x) + x * rho,
        alpha,
        lipschitz,
    )
    .with_prox(move |z, t| {
        let scale = 1.0 + t * rho;
        let inner = fp
            .prox(&(z / scale), t / scale)
            .expect("folded prox requires f to have a prox");
        inner
    });
    let spec = ObjectiveSpec {
        f: folded,
        hbar: SmoothOracle::zero(),
        hunder: spec.hunder,
        g: spec.g,
    };
    (spec, config.with_theta(1.0).with_eta(1.0))
}
