//! Benchmark problems: instance generators and objective builders.
//!
//! Each `build_*` wires the closed-form proximity/subgradient operators of
//! one problem family into an [`ObjectiveSpec`], together with its constants
//! `(alpha, kappa, ell)`, an initialization, per-problem stopping defaults,
//! and (when a ground truth exists) residual and relative-error metrics.
//!
//! Generators are pure functions of their seed: the same `(seed, dims,
//! params)` always produces bit-identical instances.

mod cs;
mod lrmc;
mod slrme;
mod toy;

pub use cs::{build_cs, generate_cs, CsInstance};
pub use lrmc::{build_lrmc, generate_lrmc, LrmcInstance};
pub use slrme::{build_slrme, generate_slrme, slrme_gppa_split, SlrmeInstance};
pub use toy::{build_toy, ToyInstance};

use std::path::Path;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::config::SolverConfig;
use crate::error::ProblemError;
use crate::oracles::{MetricFn, ObjectiveSpec};
use crate::point::Point;
use crate::solver::SolveContext;

/// Generator backing every synthetic instance; recorded in reports so runs
/// can be replayed.
pub const RNG_NAME: &str = "ChaCha8";

/// The crate-wide seedable generator.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dense matrix with i.i.d. standard Gaussian entries.
pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// An objective wired for the solver, with problem-side metadata.
pub struct BuiltProblem {
    pub name: &'static str,
    pub spec: ObjectiveSpec,
    pub y0: Point,
    pub z0: Point,
    /// Residual driving the problem's published stopping rule, when one
    /// exists (e.g. the observed-entry residual of matrix completion).
    pub observed_residual: Option<Box<MetricFn>>,
    /// Relative error against the ground truth.
    pub rel_error: Option<Box<MetricFn>>,
    /// Stopping rule, iteration cap, and parameters the experiment uses.
    pub default_config: SolverConfig,
    /// Name of the generator behind the instance, `None` for deterministic
    /// inputs.
    pub rng_name: Option<&'static str>,
}

impl BuiltProblem {
    /// Borrows the metric closures for a solve call.
    pub fn context(&self) -> SolveContext<'_> {
        SolveContext {
            observed_residual: self.observed_residual.as_deref(),
            rel_error: self.rel_error.as_deref(),
        }
    }
}

/// Dominant eigenvalue of `A^T A` by power iteration with a fixed internal
/// seed; `0` for the zero matrix.
pub fn power_iteration_lmax(
    a: &DMatrix<f64>,
    tol: f64,
    max_iters: usize,
) -> Result<f64, ProblemError> {
    assert!(tol > 0.0, "tolerance must be positive");
    if a.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let d = a.ncols();
    let mut r = rng(0x9e3779b97f4a7c15);
    let mut v = gaussian_matrix(&mut r, d, 1);
    v /= v.norm();
    let mut lambda_prev = 0.0;
    for _ in 0..max_iters {
        let w = a.tr_mul(&(a * &v));
        let lambda = v.dot(&w);
        let norm = w.norm();
        if norm == 0.0 {
            // v landed in the kernel; restart from a fresh direction
            v = gaussian_matrix(&mut r, d, 1);
            v /= v.norm();
            continue;
        }
        v = w / norm;
        if (lambda - lambda_prev).abs() <= tol * lambda.abs().max(1e-300) {
            return Ok(lambda);
        }
        lambda_prev = lambda;
    }
    Err(ProblemError::PowerIterationDiverged(max_iters))
}

/// Writes an instance as JSON (matrices inline) so a run can be replayed.
pub fn save_json<T: Serialize>(value: &T, path: &Path) -> Result<(), ProblemError> {
    let file = std::fs::File::create(path)
        .map_err(|e| ProblemError::Serde(format!("create {}: {e}", path.display())))?;
    serde_json::to_writer(std::io::BufWriter::new(file), value)
        .map_err(|e| ProblemError::Serde(e.to_string()))
}

/// Reads an instance back from [`save_json`] output.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, ProblemError> {
    let file = std::fs::File::open(path)
        .map_err(|e| ProblemError::Serde(format!("open {}: {e}", path.display())))?;
    serde_json::from_reader(std::io::BufReader::new(file))
        .map_err(|e| ProblemError::Serde(e.to_string()))
}
