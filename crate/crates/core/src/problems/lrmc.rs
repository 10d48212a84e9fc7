//! Low-rank matrix completion:
//!
//! ```text
//! min_X 0.5 |P_mask(X) - P_mask(M)|^2 + indicator(rank(X) <= r) + (rho/2) |X|_F^2
//! ```
//!
//! `f` is the masked data fit (`kappa = 1`, `alpha = 0`), `g` the rank
//! constraint handled by truncated-SVD projection, `hbar` the Tikhonov term
//! (`ell = rho`), and the concave part is absent.

use std::sync::Arc;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::config::{SolverConfig, StoppingRule};
use crate::error::ProblemError;
use crate::oracles::{ObjectiveSpec, ProxOracle, SmoothOracle, SubgradOracle};
use crate::point::Point;
use crate::prox::{numerical_rank, project_rank, prox_quadratic_masked, MaskedEntries};

use super::{gaussian_matrix, rng, BuiltProblem, RNG_NAME};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LrmcInstance {
    /// Ground-truth matrix of exact rank `rank`.
    pub ground_truth: Point,
    /// Observed entries.
    pub mask: MaskedEntries,
    pub rank: usize,
    /// Tikhonov weight.
    pub rho: f64,
    /// Requested fraction of observed entries.
    pub sampling_ratio: f64,
}

/// Generates a `size x size` rank-`rank` ground truth `M1 M2^T` (i.i.d.
/// Gaussian factors) and observes `ceil(ratio * size^2)` entries sampled
/// uniformly without replacement.
pub fn generate_lrmc(
    seed: u64,
    size: usize,
    rank: usize,
    ratio: f64,
    rho: f64,
) -> Result<LrmcInstance, ProblemError> {
    if rank == 0 || rank > size {
        return Err(ProblemError::BadDimensions(format!(
            "rank {rank} out of range for size {size}"
        )));
    }
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(ProblemError::BadDimensions(format!(
            "sampling ratio {ratio} outside (0, 1]"
        )));
    }
    let mut r = rng(seed);
    let m1 = gaussian_matrix(&mut r, size, rank);
    let m2 = gaussian_matrix(&mut r, size, rank);
    let ground_truth = &m1 * m2.transpose();
    let count = (ratio * (size * size) as f64).ceil() as usize;
    let entries = sample(&mut r, size * size, count)
        .into_iter()
        .map(|flat| (flat / size, flat % size))
        .collect();
    Ok(LrmcInstance {
        ground_truth,
        mask: MaskedEntries {
            rows: size,
            cols: size,
            entries,
        },
        rank,
        rho,
        sampling_ratio: ratio,
    })
}

pub fn build_lrmc(instance: &LrmcInstance) -> Result<BuiltProblem, ProblemError> {
    let rank = instance.rank;
    let rho = instance.rho;
    let m = Arc::new(instance.ground_truth.clone());
    let mask = Arc::new(instance.mask.clone());

    let f = {
        let (m_eval, mask_eval) = (Arc::clone(&m), Arc::clone(&mask));
        let (m_grad, mask_grad) = (Arc::clone(&m), Arc::clone(&mask));
        let (m_prox, mask_prox) = (Arc::clone(&m), Arc::clone(&mask));
        SmoothOracle::new(
            move |x: &Point| 0.5 * mask_eval.masked_diff_norm(x, &m_eval).powi(2),
            move |x: &Point| mask_grad.project(&(x - m_grad.as_ref())),
            0.0,
            1.0,
        )
        .with_prox(move |z, t| Ok(prox_quadratic_masked(z, &m_prox, &mask_prox, t)))
    };

    let g = ProxOracle::new(
        move |x: &Point| match numerical_rank(x) {
            Ok(r) if r <= rank => 0.0,
            _ => f64::INFINITY,
        },
        move |u, _| project_rank(u, rank),
    );

    let hbar = SmoothOracle::new(
        move |x: &Point| 0.5 * rho * x.norm_squared(),
        move |x: &Point| x * rho,
        rho,
        rho,
    );

    let sampled = mask.project(&instance.ground_truth);
    let observed_norm = mask.masked_norm(&instance.ground_truth);
    let observed_residual: Box<crate::oracles::MetricFn> = {
        let (m, mask) = (Arc::clone(&m), Arc::clone(&mask));
        Box::new(move |y: &Point| mask.masked_diff_norm(y, &m) / observed_norm)
    };
    let truth_norm = instance.ground_truth.norm();
    let rel_error: Box<crate::oracles::MetricFn> = {
        let m = Arc::clone(&m);
        Box::new(move |y: &Point| (y - m.as_ref()).norm() / truth_norm)
    };

    Ok(BuiltProblem {
        name: "lrmc",
        spec: ObjectiveSpec::new(f, g, hbar, SubgradOracle::zero()),
        y0: sampled.clone(),
        z0: sampled,
        observed_residual: Some(observed_residual),
        rel_error: Some(rel_error),
        default_config: SolverConfig::new(0.2)
            .with_eta(1.8)
            .with_max_iters(2000)
            .with_stopping(StoppingRule::ObservedResidual { tol: 1e-4 }),
        rng_name: Some(RNG_NAME),
    })
}
