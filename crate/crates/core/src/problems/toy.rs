//! Small analytical test problem:
//!
//! ```text
//! min_x |Ax|^2 + rho |x|_1 + 0.5 exp(-|x|^2) - rho |x|
//! ```
//!
//! with stationary point 0. `f = |Ax|^2` has `kappa = 2 lambda_max(A^T A)`
//! and `alpha = 2 lambda_min(A^T A)`; the DC pair is
//! `hbar = 0.5 exp(-|x|^2)` and `hunder = rho |x|`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::config::{SolverConfig, StoppingRule};
use crate::error::ProblemError;
use crate::oracles::{ObjectiveSpec, ProxOracle, SmoothOracle, SubgradOracle};
use crate::point::Point;
use crate::prox::{soft_threshold, subgrad_l2norm, LeastSquaresProx};

use super::{power_iteration_lmax, BuiltProblem};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToyInstance {
    pub a: DMatrix<f64>,
    pub rho: f64,
}

impl ToyInstance {
    pub fn new(a: DMatrix<f64>, rho: f64) -> Self {
        Self { a, rho }
    }

    pub fn build(&self) -> Result<BuiltProblem, ProblemError> {
        build_toy(&self.a, self.rho)
    }
}

pub fn build_toy(a: &DMatrix<f64>, rho: f64) -> Result<BuiltProblem, ProblemError> {
    if a.nrows() != a.ncols() {
        return Err(ProblemError::BadDimensions(format!(
            "A must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    assert!(rho > 0.0, "rho must be positive");
    let d = a.ncols();
    let gram = a.tr_mul(a);
    let kappa = 2.0 * power_iteration_lmax(a, 1e-12, 100_000)?;
    let alpha = if kappa == 0.0 {
        0.0
    } else {
        let eig = nalgebra::SymmetricEigen::new(gram.clone());
        let lmin = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
        (2.0 * lmin).clamp(0.0, kappa)
    };

    // |Ax|^2 = 0.5 |sqrt(2) A x|^2, so its prox solves (2 gamma A^T A + I) x = z.
    let scaled_a = a * 2.0f64.sqrt();
    let ls = Arc::new(LeastSquaresProx::new(scaled_a, DVector::zeros(a.nrows())));
    let gram_eval = gram.clone();
    let f = SmoothOracle::new(
        move |x: &Point| {
            let col = DVector::from_column_slice(x.as_slice());
            (&gram_eval * &col).dot(&col)
        },
        move |x: &Point| {
            let col = DVector::from_column_slice(x.as_slice());
            let g = &gram * &col * 2.0;
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

    let ell = (-2.0f64).exp();
    let hbar = SmoothOracle::new(
        |x: &Point| 0.5 * (-x.norm_squared()).exp(),
        |x: &Point| x * (-(-x.norm_squared()).exp()),
        -ell,
        ell,
    );

    let hunder = SubgradOracle::new(
        move |x: &Point| rho * x.norm(),
        move |x: &Point| Ok(subgrad_l2norm(x, rho)),
    );

    let start = Point::from_element(d, 1, 10.0);
    Ok(BuiltProblem {
        name: "toy",
        spec: ObjectiveSpec::new(f, g, hbar, hunder),
        y0: start.clone(),
        z0: start,
        observed_residual: None,
        // the stationary target is the origin, so report the plain norm
        rel_error: Some(Box::new(|y: &Point| y.norm())),
        default_config: SolverConfig::new(0.22)
            .with_eta(1.5)
            .with_max_iters(5000)
            .with_stopping(StoppingRule::YStep { tol: 1e-3 }),
        rng_name: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::{check_fd_gradient, vector};
    use crate::solver::{solve, SolveContext};
    use crate::report::TerminationReason;

    #[test]
    fn rank_one_matrix_constants() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let p = build_toy(&a, 0.1).unwrap();
        assert!((p.spec.kappa() - 2.0).abs() < 1e-9);
        assert!(p.spec.alpha().abs() < 1e-9);
        assert!((p.spec.ell() - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn identity_matrix_constants() {
        let p = build_toy(&DMatrix::identity(2, 2), 0.1).unwrap();
        assert!((p.spec.kappa() - 2.0).abs() < 1e-9);
        assert!((p.spec.alpha() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn zero_matrix_degenerates_cleanly() {
        let p = build_toy(&DMatrix::zeros(2, 2), 0.1).unwrap();
        assert_eq!(p.spec.kappa(), 0.0);
        assert_eq!(p.spec.alpha(), 0.0);
        let x = vector(&[1.0, -2.0]);
        assert_eq!(p.spec.f.eval(&x), 0.0);
        // prox of the zero function is the identity
        let out = p.spec.f.prox(&x, 0.3).unwrap().unwrap();
        assert!((out - &x).norm() < 1e-12);
    }

    #[test]
    fn oracle_gradients_pass_finite_differences() {
        let mut r = super::super::rng(13);
        let a = super::super::gaussian_matrix(&mut r, 3, 3);
        let p = build_toy(&a, 0.2).unwrap();
        for _ in 0..20 {
            let x = super::super::gaussian_matrix(&mut r, 3, 1);
            let f_err = check_fd_gradient(&|v| p.spec.f.eval(v), &|v| p.spec.f.grad(v), &x, 1e-5);
            assert!(f_err < 1e-5, "f gradient fd error {f_err}");
            let h_err = check_fd_gradient(
                &|v| p.spec.hbar.eval(v),
                &|v| p.spec.hbar.grad(v),
                &x,
                1e-5,
            );
            assert!(h_err < 1e-5, "hbar gradient fd error {h_err}");
        }
    }

    #[test]
    fn published_setup_converges_to_the_origin() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let p = build_toy(&a, 0.1).unwrap();
        let report = solve(
            &p.spec,
            &p.default_config,
            p.y0.clone(),
            p.z0.clone(),
            &SolveContext::default(),
        )
        .unwrap();
        assert_eq!(report.termination, TerminationReason::Converged);
        assert!(
            report.final_point.norm() < 1e-2,
            "|y| = {}",
            report.final_point.norm()
        );
    }
}
