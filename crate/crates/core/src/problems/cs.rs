//! Sparse recovery with an l1-minus-l2 regularizer:
//!
//! ```text
//! min_x 0.5 |Ax - b|^2 + rho (|x|_1 - |x|)
//! ```
//!
//! `f` is the least-squares fit (`kappa = lambda_max(A^T A)`), `g = rho |.|_1`,
//! `hbar = 0`, and `hunder = rho |.|`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::config::{SolverConfig, StoppingRule};
use crate::error::ProblemError;
use crate::oracles::{ObjectiveSpec, ProxOracle, SmoothOracle, SubgradOracle};
use crate::params::{gamma_range, ProblemConstants};
use crate::point::Point;
use crate::prox::{soft_threshold, subgrad_l2norm, LeastSquaresProx};

use super::{gaussian_matrix, power_iteration_lmax, rng, BuiltProblem, RNG_NAME};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CsInstance {
    /// Sensing matrix, `m x d` with `m < d` in the compressed regime.
    pub a: DMatrix<f64>,
    /// Observations `A x_true (+ noise)`.
    pub b: DVector<f64>,
    /// Regularization weight.
    pub rho: f64,
    /// Sparse ground truth, absent for instances built from real data.
    pub x_true: Option<Point>,
}

/// Synthetic instance: Gaussian sensing matrix with entries `N(0, 1/m)`,
/// a `sparsity`-sparse ground truth with entries of magnitude in
/// `[0.5, 1.5]` and random sign, and `b = A x_true + noise_sigma * N(0, 1)`.
pub fn generate_cs(
    seed: u64,
    m: usize,
    d: usize,
    sparsity: usize,
    rho: f64,
    noise_sigma: f64,
) -> Result<CsInstance, ProblemError> {
    if sparsity == 0 || sparsity > d {
        return Err(ProblemError::BadDimensions(format!(
            "sparsity {sparsity} out of range for dimension {d}"
        )));
    }
    if m == 0 {
        return Err(ProblemError::BadDimensions("m must be positive".into()));
    }
    let mut r = rng(seed);
    let a = gaussian_matrix(&mut r, m, d) / (m as f64).sqrt();
    let mut x_true = Point::zeros(d, 1);
    for idx in sample(&mut r, d, sparsity) {
        let magnitude = 0.5 + r.gen::<f64>();
        let sign = if r.gen::<bool>() { 1.0 } else { -1.0 };
        x_true[idx] = sign * magnitude;
    }
    let mut b = &a * DVector::from_column_slice(x_true.as_slice());
    if noise_sigma > 0.0 {
        for v in b.iter_mut() {
            let noise: f64 = StandardNormal.sample(&mut r);
            *v += noise_sigma * noise;
        }
    }
    Ok(CsInstance {
        a,
        b,
        rho,
        x_true: Some(x_true),
    })
}

pub fn build_cs(instance: &CsInstance) -> Result<BuiltProblem, ProblemError> {
    let rho = instance.rho;
    let a = instance.a.clone();
    let b = instance.b.clone();
    let (m, d) = (a.nrows(), a.ncols());

    let kappa = power_iteration_lmax(&a, 1e-12, 100_000)?;
    let alpha = if m < d || kappa == 0.0 {
        0.0
    } else {
        let eig = nalgebra::SymmetricEigen::new(a.tr_mul(&a));
        let lmin = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
        lmin.clamp(0.0, kappa)
    };

    let ls = Arc::new(LeastSquaresProx::new(a.clone(), b.clone()));
    let (a_eval, b_eval) = (a.clone(), b.clone());
    let f = SmoothOracle::new(
        move |x: &Point| {
            let col = DVector::from_column_slice(x.as_slice());
            0.5 * (&a_eval * col - &b_eval).norm_squared()
        },
        move |x: &Point| {
            let col = DVector::from_column_slice(x.as_slice());
            let g = a.tr_mul(&(&a * col - &b));
            Point::from_column_slice(g.len(), 1, g.as_slice())
        },
        alpha,
        kappa,
    )
    .with_prox(move |z, t| ls.prox(z, t));

    let g = ProxOracle::new(
        move |x: &Point| rho * x.iter().map(|v| v.abs()).sum::<f64>(),
        move |u, t| Ok(soft_threshold(u, t * rho)),
    );

    let hunder = SubgradOracle::new(
        move |x: &Point| rho * x.norm(),
        move |x: &Point| Ok(subgrad_l2norm(x, rho)),
    );

    let eta = 1.8;
    let default_gamma = match ProblemConstants::new(alpha, kappa, 0.0, 1.0, eta) {
        Ok(constants) => {
            let range = gamma_range(&constants);
            if range.feasible && range.upper.is_finite() {
                0.95 * range.upper
            } else {
                0.1
            }
        }
        Err(_) => 0.1,
    };

    let rel_error = instance.x_true.as_ref().map(|x_true| {
        let truth = x_true.clone();
        let norm = truth.norm();
        Box::new(move |y: &Point| (y - &truth).norm() / norm) as Box<crate::oracles::MetricFn>
    });

    Ok(BuiltProblem {
        name: "cs",
        spec: ObjectiveSpec::new(f, g, SmoothOracle::zero(), hunder),
        y0: Point::zeros(d, 1),
        z0: Point::zeros(d, 1),
        observed_residual: None,
        rel_error,
        default_config: SolverConfig::new(default_gamma)
            .with_eta(eta)
            .with_max_iters(20_000)
            .with_stopping(StoppingRule::RelYStep { tol: 1e-5 }),
        rng_name: Some(RNG_NAME),
    })
}
