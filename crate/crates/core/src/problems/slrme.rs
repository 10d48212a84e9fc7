//! Simultaneously sparse and low-rank matrix estimation:
//!
//! ```text
//! min_X 0.5 |X - A|_F^2 + rho1 |X|_1 + rho2 (|X|_F^2 - kyfan2k_sq(X))
//! ```
//!
//! `f` is the quadratic fit (`kappa = 1`, 1-strongly convex), `g` the
//! entrywise l1 term, and the DC pair is `hbar = rho2 |X|_F^2`
//! (`ell = 2 rho2`) minus `hunder = rho2` times the squared Ky Fan 2-k norm.

use std::sync::Arc;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::baselines::GppaSplit;
use crate::config::{SolverConfig, StoppingRule};
use crate::error::ProblemError;
use crate::oracles::{ObjectiveSpec, ProxOracle, SmoothOracle, SubgradOracle};
use crate::params::{gamma_range, ProblemConstants};
use crate::point::Point;
use crate::prox::{kyfan2k_sq, prox_quadratic_full, soft_threshold, subgrad_kyfan2k_sq};

use super::{rng, BuiltProblem, RNG_NAME};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlrmeInstance {
    /// Block-diagonal ground truth; every block is rank one.
    pub ground_truth: Point,
    /// Noisy input.
    pub noisy: Point,
    pub rho1: f64,
    pub rho2: f64,
    /// Ky Fan rank parameter, the rank of the ground truth by default.
    pub k: usize,
}

/// Block-diagonal ground truth with one `v v^T` block (entries of `v` i.i.d.
/// uniform on `[-1, 1]`) per requested size; Gaussian noise of standard
/// deviation `noise_sigma` is added to `ceil(noise_fraction * m^2)` entries
/// sampled without replacement.
pub fn generate_slrme(
    seed: u64,
    blocks: &[usize],
    noise_fraction: f64,
    noise_sigma: f64,
    rho1: f64,
    rho2: f64,
) -> Result<SlrmeInstance, ProblemError> {
    if blocks.is_empty() || blocks.contains(&0) {
        return Err(ProblemError::BadDimensions(
            "block sizes must be positive".into(),
        ));
    }
    if !(0.0..=1.0).contains(&noise_fraction) {
        return Err(ProblemError::BadDimensions(format!(
            "noise fraction {noise_fraction} outside [0, 1]"
        )));
    }
    let m: usize = blocks.iter().sum();
    let mut r = rng(seed);
    let mut ground_truth = Point::zeros(m, m);
    let mut offset = 0;
    for &size in blocks {
        let v: Vec<f64> = (0..size).map(|_| 2.0 * r.gen::<f64>() - 1.0).collect();
        for i in 0..size {
            for j in 0..size {
                ground_truth[(offset + i, offset + j)] = v[i] * v[j];
            }
        }
        offset += size;
    }
    let mut noisy = ground_truth.clone();
    let count = (noise_fraction * (m * m) as f64).ceil() as usize;
    if count > 0 && noise_sigma > 0.0 {
        for flat in sample(&mut r, m * m, count) {
            let noise: f64 = StandardNormal.sample(&mut r);
            noisy[(flat / m, flat % m)] += noise_sigma * noise;
        }
    }
    Ok(SlrmeInstance {
        ground_truth,
        noisy,
        rho1,
        rho2,
        k: blocks.len(),
    })
}

/// Builds the objective. `alpha` is the convexity modulus claimed for `f`
/// (any value in `[0, 1]` is valid since `f` is exactly 1-strongly convex);
/// the admissible stepsize range grows with it.
pub fn build_slrme(instance: &SlrmeInstance, alpha: f64) -> Result<BuiltProblem, ProblemError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(ProblemError::BadDimensions(format!(
            "alpha {alpha} outside [0, 1] for a 1-strongly-convex fit"
        )));
    }
    let k = instance.k;
    let (m, d) = instance.noisy.shape();
    if k == 0 || k > m.min(d) {
        return Err(ProblemError::BadDimensions(format!(
            "Ky Fan parameter {k} out of range for {m}x{d}"
        )));
    }
    let rho1 = instance.rho1;
    let rho2 = instance.rho2;
    let a = Arc::new(instance.noisy.clone());

    let f = {
        let (a_eval, a_grad, a_prox) = (Arc::clone(&a), Arc::clone(&a), Arc::clone(&a));
        SmoothOracle::new(
            move |x: &Point| 0.5 * (x - a_eval.as_ref()).norm_squared(),
            move |x: &Point| x - a_grad.as_ref(),
            alpha,
            1.0,
        )
        .with_prox(move |z, t| Ok(prox_quadratic_full(z, &a_prox, t)))
    };

    let g = ProxOracle::new(
        move |x: &Point| rho1 * x.iter().map(|v| v.abs()).sum::<f64>(),
        move |u, t| Ok(soft_threshold(u, t * rho1)),
    );

    let hbar = SmoothOracle::new(
        move |x: &Point| rho2 * x.norm_squared(),
        move |x: &Point| x * (2.0 * rho2),
        2.0 * rho2,
        2.0 * rho2,
    );

    let hunder = SubgradOracle::new(
        move |x: &Point| rho2 * kyfan2k_sq(x, k).expect("SVD failed in Ky Fan evaluation"),
        move |x: &Point| subgrad_kyfan2k_sq(x, k, rho2),
    );

    let eta = 1.4;
    let default_gamma = match ProblemConstants::new(alpha, 1.0, 2.0 * rho2, 1.0, eta) {
        Ok(constants) => {
            let range = gamma_range(&constants);
            if range.feasible && range.upper.is_finite() {
                range.upper - 1e-12
            } else {
                0.3
            }
        }
        Err(_) => 0.3,
    };

    let truth = instance.ground_truth.clone();
    let truth_norm = truth.norm();
    let rel_error: Box<crate::oracles::MetricFn> =
        Box::new(move |y: &Point| (y - &truth).norm() / truth_norm);

    Ok(BuiltProblem {
        name: "slrme",
        spec: ObjectiveSpec::new(f, g, hbar, hunder),
        y0: instance.noisy.clone(),
        z0: instance.noisy.clone(),
        observed_residual: None,
        rel_error: Some(rel_error),
        default_config: SolverConfig::new(default_gamma)
            .with_eta(eta)
            .with_max_iters(2000)
            .with_stopping(StoppingRule::RelYStep { tol: 1e-6 }),
        rng_name: Some(RNG_NAME),
    })
}

/// DC split for the GPPA baseline: `g1 = rho1 |.|_1`,
/// `g2 = 0.5 |X - A|_F^2 + rho2 |X|_F^2` (Lipschitz constant `1 + 2 rho2`),
/// `h = rho2` times the squared Ky Fan 2-k norm.
pub fn slrme_gppa_split(instance: &SlrmeInstance) -> GppaSplit {
    let rho1 = instance.rho1;
    let rho2 = instance.rho2;
    let k = instance.k;
    let a = Arc::new(instance.noisy.clone());
    let g1 = ProxOracle::new(
        move |x: &Point| rho1 * x.iter().map(|v| v.abs()).sum::<f64>(),
        move |u, t| Ok(soft_threshold(u, t * rho1)),
    );
    let (a_eval, a_grad) = (Arc::clone(&a), Arc::clone(&a));
    let g2 = SmoothOracle::new(
        move |x: &Point| 0.5 * (x - a_eval.as_ref()).norm_squared() + rho2 * x.norm_squared(),
        move |x: &Point| (x - a_grad.as_ref()) + x * (2.0 * rho2),
        1.0,
        1.0 + 2.0 * rho2,
    );
    let h = SubgradOracle::new(
        move |x: &Point| rho2 * kyfan2k_sq(x, k).expect("SVD failed in Ky Fan evaluation"),
        move |x: &Point| subgrad_kyfan2k_sq(x, k, rho2),
    );
    GppaSplit::new(g1, g2, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::gppa_solve;
    use crate::prox::numerical_rank;
    use crate::report::TerminationReason;
    use crate::solver::{solve, SolveContext};

    fn desk_blocks() -> Vec<usize> {
        vec![30, 40, 10, 20, 10]
    }

    #[test]
    fn generator_builds_rank_one_blocks() {
        let inst = generate_slrme(1, &desk_blocks(), 0.2, 0.1, 0.1, 0.1).unwrap();
        assert_eq!(inst.ground_truth.shape(), (110, 110));
        assert_eq!(inst.k, 5);
        assert_eq!(numerical_rank(&inst.ground_truth).unwrap(), 5);
        // each block alone is rank one
        let block = inst.ground_truth.view((0, 0), (30, 30)).into_owned();
        assert_eq!(numerical_rank(&block).unwrap(), 1);
        // noise hits exactly ceil(0.2 * 110^2) entries
        let diffs = inst
            .noisy
            .iter()
            .zip(inst.ground_truth.iter())
            .filter(|(a, b)| a != b)
            .count();
        assert_eq!(diffs, (0.2f64 * 110.0 * 110.0).ceil() as usize);
    }

    #[test]
    fn published_constants_with_alpha_one() {
        let inst = generate_slrme(1, &[6, 8], 0.2, 0.1, 0.1, 0.1).unwrap();
        let p = build_slrme(&inst, 1.0).unwrap();
        assert_eq!(p.spec.alpha(), 1.0);
        assert_eq!(p.spec.kappa(), 1.0);
        assert!((p.spec.ell() - 0.2).abs() < 1e-15);
        // the default stepsize sits just below the admissible bound
        assert!((p.default_config.gamma - 0.7385).abs() < 5e-3);
        let p0 = build_slrme(&inst, 0.0).unwrap();
        assert!((p0.default_config.gamma - 0.4167).abs() < 5e-3);
    }

    #[test]
    fn noiseless_unregularized_instance_has_trivial_minimizer() {
        let mut inst = generate_slrme(2, &[5, 7], 0.0, 0.0, 0.0, 0.0).unwrap();
        inst.rho1 = 0.0;
        inst.rho2 = 0.0;
        let p = build_slrme(&inst, 1.0).unwrap();
        let report = solve(
            &p.spec,
            &p.default_config.with_stopping(StoppingRule::YStep { tol: 1e-12 }),
            p.y0.clone(),
            p.z0.clone(),
            &p.context(),
        )
        .unwrap();
        assert_eq!(report.termination, TerminationReason::Converged);
        assert!(report.rel_error.unwrap() < 1e-10);
    }

    #[test]
    fn relative_error_metric_is_the_frobenius_ratio() {
        let inst = generate_slrme(3, &[4, 4], 0.1, 0.1, 0.1, 0.1).unwrap();
        let p = build_slrme(&inst, 1.0).unwrap();
        let rel = p.rel_error.as_ref().unwrap();
        let y = &inst.ground_truth * 1.5;
        let expected = (&y - &inst.ground_truth).norm() / inst.ground_truth.norm();
        assert!((rel(&y) - expected).abs() < 1e-14);
        assert_eq!(rel(&inst.ground_truth), 0.0);
    }

    #[test]
    fn gppa_objective_is_nonincreasing() {
        let inst = generate_slrme(5, &[8, 6, 4], 0.25, 0.1, 0.1, 0.1).unwrap();
        let split = slrme_gppa_split(&inst);
        let cfg = SolverConfig::new(split.stepsize)
            .with_max_iters(60)
            .with_stopping(StoppingRule::RelYStep { tol: 1e-12 })
            .with_recording();
        let report = gppa_solve(&split, inst.noisy.clone(), &cfg, &SolveContext::default())
            .unwrap();
        let objective = &report.trajectory.unwrap().objective;
        for w in objective.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "GPPA objective increased: {w:?}");
        }
        // the split's objective is the DC objective itself
        let p = build_slrme(&inst, 1.0).unwrap();
        let x = &inst.noisy;
        assert!((split.objective(x) - p.spec.objective(x)).abs() < 1e-10);
    }
}
