//! Proximity and subgradient operators used by the benchmark problems.

use std::sync::Mutex;

use nalgebra::linalg::Cholesky;
use nalgebra::{DMatrix, DVector, Dyn};

use crate::error::OracleError;
use crate::point::Point;

/// Maximum sweeps for the iterative SVD before reporting failure.
const SVD_MAX_ITERS: usize = 10_000;

/// A rank-r factorization `U diag(s) V^T` with orthonormal `U`, `V` columns
/// and nonincreasing singular values.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl TruncatedSvd {
    /// Top-`r` part of the full SVD of `x`.
    pub fn of(x: &Point, r: usize) -> Result<Self, OracleError> {
        let r = r.min(x.nrows().min(x.ncols()));
        let svd = x
            .clone()
            .try_svd(true, true, f64::EPSILON, SVD_MAX_ITERS)
            .ok_or(OracleError::SvdFailed)?;
        let u_full = svd.u.expect("u requested");
        let vt_full = svd.v_t.expect("v_t requested");
        // try_svd sorts descending already; enforce it so a backend change
        // cannot silently break rank selection.
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&i, &j| {
            svd.singular_values[j]
                .partial_cmp(&svd.singular_values[i])
                .expect("singular values are never NaN")
        });
        let u = DMatrix::from_fn(x.nrows(), r, |i, j| u_full[(i, order[j])]);
        let v = DMatrix::from_fn(x.ncols(), r, |i, j| vt_full[(order[j], i)]);
        let singular_values = DVector::from_fn(r, |i, _| svd.singular_values[order[i]]);
        Ok(Self {
            u,
            singular_values,
            v,
        })
    }

    /// Reassembles `U diag(s) V^T`.
    pub fn reconstruct(&self) -> Point {
        let mut scaled = self.u.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= self.singular_values[j];
        }
        &scaled * self.v.transpose()
    }

    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }
}

/// Singular values of `x`, nonincreasing.
pub fn singular_values(x: &Point) -> Result<DVector<f64>, OracleError> {
    let svd = x
        .clone()
        .try_svd(false, false, f64::EPSILON, SVD_MAX_ITERS)
        .ok_or(OracleError::SvdFailed)?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).expect("singular values are never NaN"));
    Ok(DVector::from_vec(s))
}

/// Entrywise soft shrinkage `sign(u_i) max(0, |u_i| - tau)`, the prox of
/// `tau |.|_1`.
pub fn soft_threshold(u: &Point, tau: f64) -> Point {
    assert!(tau >= 0.0, "shrinkage threshold must be nonnegative");
    if tau == 0.0 {
        return u.clone();
    }
    u.map(|v| {
        if v > tau {
            v - tau
        } else if v < -tau {
            v + tau
        } else {
            0.0
        }
    })
}

/// Projection onto matrices of rank at most `r` (best Frobenius approximation
/// via the truncated SVD); a prox of the rank-constraint indicator for any
/// stepsize.
pub fn project_rank(x: &Point, r: usize) -> Result<Point, OracleError> {
    assert!(
        r >= 1 && r <= x.nrows().min(x.ncols()),
        "rank bound {r} out of range for {}x{}",
        x.nrows(),
        x.ncols()
    );
    Ok(TruncatedSvd::of(x, r)?.reconstruct())
}

/// Rank of `x` up to the relative tolerance `1e-8 * sigma_1`, for evaluating
/// the rank-constraint indicator.
pub fn numerical_rank(x: &Point) -> Result<usize, OracleError> {
    let s = singular_values(x)?;
    if s.is_empty() || s[0] == 0.0 {
        return Ok(0);
    }
    let cutoff = 1e-8 * s[0];
    Ok(s.iter().filter(|&&v| v > cutoff).count())
}

/// Prox of `X -> 0.5 |P_mask(X) - P_mask(M)|^2` at `Z` with stepsize `gamma`:
/// observed entries become `(z + gamma m) / (1 + gamma)`, the rest pass
/// through.
pub fn prox_quadratic_masked(z: &Point, m: &Point, mask: &MaskedEntries, gamma: f64) -> Point {
    assert_eq!(z.shape(), m.shape(), "data and iterate shapes differ");
    let mut out = z.clone();
    let scale = 1.0 / (1.0 + gamma);
    for &(i, j) in &mask.entries {
        out[(i, j)] = (z[(i, j)] + gamma * m[(i, j)]) * scale;
    }
    out
}

/// Index set of observed entries of an `rows x cols` matrix.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct MaskedEntries {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize)>,
}

impl MaskedEntries {
    /// `P_mask(X)`: zero outside the observed set.
    pub fn project(&self, x: &Point) -> Point {
        let mut out = Point::zeros(self.rows, self.cols);
        for &(i, j) in &self.entries {
            out[(i, j)] = x[(i, j)];
        }
        out
    }

    /// `|P_mask(X)|` without materializing the projection.
    pub fn masked_norm(&self, x: &Point) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j)| x[(i, j)] * x[(i, j)])
            .sum::<f64>()
            .sqrt()
    }

    /// `|P_mask(X - Y)|`.
    pub fn masked_diff_norm(&self, x: &Point, y: &Point) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j)| {
                let d = x[(i, j)] - y[(i, j)];
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Prox of `X -> 0.5 |X - A|_F^2` at `Z`: `(gamma A + Z) / (1 + gamma)`.
pub fn prox_quadratic_full(z: &Point, a: &Point, gamma: f64) -> Point {
    assert_eq!(z.shape(), a.shape(), "data and iterate shapes differ");
    (a * gamma + z) / (1.0 + gamma)
}

/// Prox of `x -> 0.5 |A x - b|^2` at `z`: solves
/// `(A^T A + I / gamma) x = A^T b + z / gamma`.
pub fn prox_quadratic_leastsquares(
    z: &Point,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    gamma: f64,
) -> Result<Point, OracleError> {
    assert!(gamma > 0.0, "stepsize must be positive");
    let ls = LeastSquaresProx::new(a.clone(), b.clone());
    ls.prox(z, gamma)
}

/// Least-squares prox with a cached Cholesky factorization.
///
/// The factorization of `A^T A + I / gamma` is reused across iterations with
/// the same stepsize and rebuilt when the stepsize changes (e.g. under the
/// restart heuristic). The cache is guarded so concurrent solves sharing an
/// oracle never observe a factorization for a stale stepsize.
pub struct LeastSquaresProx {
    gram: DMatrix<f64>,
    atb: DVector<f64>,
    cache: Mutex<Option<(f64, Cholesky<f64, Dyn>)>>,
}

impl LeastSquaresProx {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Self {
        assert_eq!(a.nrows(), b.len(), "A and b row counts differ");
        let gram = a.tr_mul(&a);
        let atb = a.tr_mul(&b);
        Self {
            gram,
            atb,
            cache: Mutex::new(None),
        }
    }

    pub fn prox(&self, z: &Point, gamma: f64) -> Result<Point, OracleError> {
        assert_eq!(z.ncols(), 1, "least-squares prox expects a column vector");
        assert_eq!(z.nrows(), self.gram.nrows(), "iterate dimension mismatch");
        let mut guard = self.cache.lock().expect("prox cache poisoned");
        let rebuild = !matches!(*guard, Some((g, _)) if g == gamma);
        if rebuild {
            let mut system = self.gram.clone();
            let shift = 1.0 / gamma;
            for i in 0..system.nrows() {
                system[(i, i)] += shift;
            }
            let chol = Cholesky::new(system).ok_or(OracleError::FactorizationFailed)?;
            *guard = Some((gamma, chol));
        }
        let (_, chol) = guard.as_ref().expect("cache filled above");
        let rhs = &self.atb + DVector::from_column_slice(z.as_slice()) / gamma;
        let x = chol.solve(&rhs);
        Ok(Point::from_column_slice(x.len(), 1, x.as_slice()))
    }
}

/// One subgradient of `rho |.|` (the Euclidean/Frobenius norm): `rho y / |y|`
/// for nonzero `y` and `0` at the origin.
pub fn subgrad_l2norm(y: &Point, rho: f64) -> Point {
    let n = y.norm();
    if n == 0.0 {
        Point::zeros(y.nrows(), y.ncols())
    } else {
        y * (rho / n)
    }
}

/// Sum of the `k` largest squared singular values (the squared Ky Fan 2-k
/// norm).
pub fn kyfan2k_sq(x: &Point, k: usize) -> Result<f64, OracleError> {
    assert!(
        k >= 1 && k <= x.nrows().min(x.ncols()),
        "k = {k} out of range for {}x{}",
        x.nrows(),
        x.ncols()
    );
    let s = singular_values(x)?;
    Ok(s.iter().take(k).map(|v| v * v).sum())
}

/// One subgradient of `rho2` times the squared Ky Fan 2-k norm:
/// `2 rho2 U_k S_k V_k^T` from the top-k SVD. Any top-k basis works at ties,
/// so the factorization's natural ordering is kept.
pub fn subgrad_kyfan2k_sq(x: &Point, k: usize, rho2: f64) -> Result<Point, OracleError> {
    assert!(
        k >= 1 && k <= x.nrows().min(x.ncols()),
        "k = {k} out of range for {}x{}",
        x.nrows(),
        x.ncols()
    );
    if x.iter().all(|&v| v == 0.0) {
        return Ok(Point::zeros(x.nrows(), x.ncols()));
    }
    let top = TruncatedSvd::of(x, k)?;
    Ok(top.reconstruct() * (2.0 * rho2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::{inner, vector};
    use crate::problems::{gaussian_matrix, rng};

    /// Grid-search prox oracle for scalar separable objectives: minimizes
    /// `eval(v) + (v - u)^2 / (2 t)` over a grid of step 1e-4 on
    /// `[u - 5t, u + 5t]`.
    fn grid_prox_1d(eval: impl Fn(f64) -> f64, u: f64, t: f64) -> f64 {
        let mut best = u;
        let mut best_val = eval(u);
        let lo = u - 5.0 * t;
        let n = (10.0 * t / 1e-4).ceil() as usize;
        for i in 0..=n {
            let v = lo + i as f64 * 1e-4;
            let val = eval(v) + (v - u) * (v - u) / (2.0 * t);
            if val < best_val {
                best_val = val;
                best = v;
            }
        }
        best
    }

    #[test]
    fn soft_threshold_basic() {
        let u = vector(&[2.0, -0.3, 0.5]);
        assert_eq!(soft_threshold(&u, 0.5), vector(&[1.5, 0.0, 0.0]));
    }

    #[test]
    fn soft_threshold_zero_tau_is_identity() {
        let u = vector(&[1.25, -0.0, 3.5, 0.0]);
        assert_eq!(soft_threshold(&u, 0.0), u);
    }

    #[test]
    fn soft_threshold_matches_grid_oracle() {
        let mut r = rng(11);
        for _ in 0..50 {
            let u = 4.0 * (rand::Rng::gen::<f64>(&mut r) - 0.5);
            let rho = 0.1 + rand::Rng::gen::<f64>(&mut r);
            let t = 0.1 + rand::Rng::gen::<f64>(&mut r);
            let ours = soft_threshold(&vector(&[u]), t * rho)[0];
            let oracle = grid_prox_1d(|v| rho * v.abs(), u, t);
            assert!(
                (ours - oracle).abs() < 2e-4,
                "u={u} rho={rho} t={t}: {ours} vs {oracle}"
            );
        }
    }

    #[test]
    fn rank_projection_is_idempotent_on_feasible_input() {
        let mut r = rng(3);
        let low = gaussian_matrix(&mut r, 6, 2) * gaussian_matrix(&mut r, 2, 6);
        let projected = project_rank(&low, 2).unwrap();
        assert!((&projected - &low).norm() < 1e-8 * low.norm());
    }

    #[test]
    fn rank_projection_of_diagonal() {
        let x = Point::from_diagonal(&nalgebra::DVector::from_column_slice(&[3.0, 2.0, 1.0]));
        let p = project_rank(&x, 2).unwrap();
        let expected = Point::from_diagonal(&nalgebra::DVector::from_column_slice(&[3.0, 2.0, 0.0]));
        assert!((p - expected).norm() < 1e-12);
    }

    #[test]
    fn rank_projection_matches_eckart_young_residual() {
        let mut r = rng(17);
        for _ in 0..20 {
            let x = gaussian_matrix(&mut r, 4, 4);
            let p = project_rank(&x, 1).unwrap();
            let s = singular_values(&x).unwrap();
            let expected = (s[1] * s[1] + s[2] * s[2] + s[3] * s[3]).sqrt();
            assert!(((&x - &p).norm() - expected).abs() < 1e-8 * s[0].max(1.0));
        }
    }

    #[test]
    fn rank_projection_output_has_bounded_rank() {
        let mut r = rng(23);
        for _ in 0..10 {
            let x = gaussian_matrix(&mut r, 7, 5);
            let p = project_rank(&x, 3).unwrap();
            let s = singular_values(&p).unwrap();
            assert!(s[3] < 1e-8 * s[0] && s[4] < 1e-8 * s[0], "rank leak: {s}");
        }
    }

    #[test]
    fn truncated_svd_factors_are_orthonormal() {
        let mut r = rng(29);
        let x = gaussian_matrix(&mut r, 8, 6);
        let t = TruncatedSvd::of(&x, 4).unwrap();
        let utu = t.u.tr_mul(&t.u);
        let vtv = t.v.tr_mul(&t.v);
        let eye = DMatrix::<f64>::identity(4, 4);
        assert!((utu - &eye).norm() < 1e-8);
        assert!((vtv - &eye).norm() < 1e-8);
        for i in 1..t.singular_values.len() {
            assert!(t.singular_values[i] <= t.singular_values[i - 1]);
        }
    }

    #[test]
    fn masked_prox_fixed_point_and_passthrough() {
        let mut r = rng(5);
        let z = gaussian_matrix(&mut r, 4, 4);
        let all: Vec<(usize, usize)> = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).collect();
        let full = MaskedEntries {
            rows: 4,
            cols: 4,
            entries: all,
        };
        // minimizer of f is a fixed point of its prox
        assert!((prox_quadratic_masked(&z, &z, &full, 0.7) - &z).norm() < 1e-14);
        let empty = MaskedEntries {
            rows: 4,
            cols: 4,
            entries: vec![],
        };
        let m = gaussian_matrix(&mut r, 4, 4);
        assert_eq!(prox_quadratic_masked(&z, &m, &empty, 0.7), z);
    }

    #[test]
    fn masked_prox_single_entry() {
        let z = Point::from_element(1, 1, 1.0);
        let m = Point::from_element(1, 1, 0.0);
        let mask = MaskedEntries {
            rows: 1,
            cols: 1,
            entries: vec![(0, 0)],
        };
        let out = prox_quadratic_masked(&z, &m, &mask, 1.0);
        assert!((out[(0, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn full_quadratic_prox() {
        let mut r = rng(31);
        let a = gaussian_matrix(&mut r, 3, 3);
        assert!((prox_quadratic_full(&a, &a, 2.0) - &a).norm() < 1e-14);
        let z = gaussian_matrix(&mut r, 3, 3);
        assert!((prox_quadratic_full(&z, &a, 1e-12) - &z).norm() < 1e-10);
        let a1 = Point::from_element(1, 1, 1.0);
        let z1 = Point::from_element(1, 1, 0.0);
        assert!((prox_quadratic_full(&z1, &a1, 1.0)[(0, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn leastsquares_prox_closed_forms() {
        let z = vector(&[1.0, -2.0]);
        let eye = DMatrix::<f64>::identity(2, 2);
        let zero_b = DVector::zeros(2);
        let half = prox_quadratic_leastsquares(&z, &eye, &zero_b, 1.0).unwrap();
        assert!((half - &z / 2.0).norm() < 1e-12);

        let a0 = DMatrix::<f64>::zeros(3, 2);
        let b0 = DVector::from_column_slice(&[1.0, 2.0, 3.0]);
        let same = prox_quadratic_leastsquares(&z, &a0, &b0, 0.3).unwrap();
        assert!((same - &z).norm() < 1e-12);
    }

    #[test]
    fn leastsquares_prox_scaled_toy_form() {
        // f(x) = |Ax|^2 realized as 0.5 |sqrt(2) A x|^2 with
        // A = [[1, 0], [0, 0]]: the prox solves (2 gamma A^T A + I) x = z.
        let sqrt2 = 2.0f64.sqrt();
        let a = DMatrix::from_row_slice(2, 2, &[sqrt2, 0.0, 0.0, 0.0]);
        let b = DVector::zeros(2);
        let z = vector(&[1.0, 1.0]);
        let out = prox_quadratic_leastsquares(&z, &a, &b, 0.22).unwrap();
        assert!((out[0] - 1.0 / 1.44).abs() < 1e-12);
        assert!((out[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn leastsquares_prox_stationarity() {
        // (x - z)/gamma + A^T (A x - b) = 0 at the output
        let mut r = rng(41);
        for _ in 0..10 {
            let a_raw = gaussian_matrix(&mut r, 5, 3);
            let a = DMatrix::from_column_slice(5, 3, a_raw.as_slice());
            let b_raw = gaussian_matrix(&mut r, 5, 1);
            let b = DVector::from_column_slice(b_raw.as_slice());
            let z = gaussian_matrix(&mut r, 3, 1);
            let gamma = 0.4;
            let x = prox_quadratic_leastsquares(&z, &a, &b, gamma).unwrap();
            let xv = DVector::from_column_slice(x.as_slice());
            let zv = DVector::from_column_slice(z.as_slice());
            let grad = a.tr_mul(&(&a * &xv - &b)) + (&xv - &zv) / gamma;
            assert!(grad.norm() < 1e-9 * (1.0 + xv.norm()));
        }
    }

    #[test]
    fn cached_factorization_tracks_stepsize() {
        let mut r = rng(43);
        let a_raw = gaussian_matrix(&mut r, 4, 4);
        let a = DMatrix::from_column_slice(4, 4, a_raw.as_slice());
        let b = DVector::zeros(4);
        let ls = LeastSquaresProx::new(a.clone(), b.clone());
        let z = gaussian_matrix(&mut r, 4, 1);
        for gamma in [0.5, 0.5, 0.25, 0.5] {
            let got = ls.prox(&z, gamma).unwrap();
            let fresh = prox_quadratic_leastsquares(&z, &a, &b, gamma).unwrap();
            assert!((got - fresh).norm() < 1e-13);
        }
    }

    #[test]
    fn l2_subgradient_values() {
        let zero = vector(&[0.0, 0.0]);
        assert_eq!(subgrad_l2norm(&zero, 0.3), zero);
        let y = vector(&[3.0, 4.0]);
        let s = subgrad_l2norm(&y, 1.0);
        assert!((s - vector(&[0.6, 0.8])).norm() < 1e-15);
    }

    #[test]
    fn l2_subgradient_inequality() {
        let mut r = rng(47);
        let rho = 0.1;
        let y = gaussian_matrix(&mut r, 4, 1);
        let s = subgrad_l2norm(&y, rho);
        for _ in 0..100 {
            let w = gaussian_matrix(&mut r, 4, 1) * 3.0;
            let slack = rho * w.norm() - rho * y.norm() - inner(&s, &(&w - &y));
            assert!(slack >= -1e-8, "convexity violated by {slack}");
        }
    }

    #[test]
    fn kyfan_values() {
        let x = Point::from_diagonal(&nalgebra::DVector::from_column_slice(&[3.0, 2.0, 1.0]));
        assert!((kyfan2k_sq(&x, 2).unwrap() - 13.0).abs() < 1e-12);
        let mut r = rng(53);
        let y = gaussian_matrix(&mut r, 4, 6);
        assert!((kyfan2k_sq(&y, 4).unwrap() - y.norm_squared()).abs() < 1e-8);
    }

    #[test]
    fn kyfan_top1_matches_eigen_oracle() {
        let mut r = rng(59);
        for _ in 0..10 {
            let x = gaussian_matrix(&mut r, 5, 5);
            let gram = x.tr_mul(&x);
            let eig = nalgebra::SymmetricEigen::new(gram);
            let lmax = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
            assert!((kyfan2k_sq(&x, 1).unwrap() - lmax).abs() < 1e-8 * lmax.max(1.0));
        }
    }

    #[test]
    fn kyfan_subgradient_values() {
        let x = Point::from_diagonal(&nalgebra::DVector::from_column_slice(&[3.0, 2.0, 1.0]));
        let s = subgrad_kyfan2k_sq(&x, 2, 1.0).unwrap();
        let expected = Point::from_diagonal(&nalgebra::DVector::from_column_slice(&[6.0, 4.0, 0.0]));
        assert!((s - expected).norm() < 1e-10);

        let zero = Point::zeros(3, 4);
        assert_eq!(subgrad_kyfan2k_sq(&zero, 2, 1.0).unwrap(), zero);

        let mut r = rng(61);
        let y = gaussian_matrix(&mut r, 5, 5);
        let full = subgrad_kyfan2k_sq(&y, 5, 1.0).unwrap();
        assert!((full - &y * 2.0).norm() < 1e-8 * y.norm());
    }

    #[test]
    fn kyfan_subgradient_inequality() {
        let mut r = rng(67);
        let rho2 = 0.1;
        for k in [1usize, 2, 3] {
            let x = gaussian_matrix(&mut r, 4, 4);
            let s = subgrad_kyfan2k_sq(&x, k, rho2).unwrap();
            let fx = rho2 * kyfan2k_sq(&x, k).unwrap();
            for _ in 0..100 {
                let w = gaussian_matrix(&mut r, 4, 4) * 2.0;
                let fw = rho2 * kyfan2k_sq(&w, k).unwrap();
                let slack = fw - fx - inner(&s, &(&w - &x));
                assert!(slack >= -1e-8, "k={k}: convexity violated by {slack}");
            }
        }
    }

    #[test]
    fn masked_projection_is_self_adjoint() {
        let mut r = rng(71);
        let mask = MaskedEntries {
            rows: 5,
            cols: 5,
            entries: vec![(0, 0), (1, 3), (2, 2), (4, 1), (3, 4)],
        };
        for _ in 0..10 {
            let x = gaussian_matrix(&mut r, 5, 5);
            let y = gaussian_matrix(&mut r, 5, 5);
            let lhs = inner(&mask.project(&x), &y);
            let rhs = inner(&x, &mask.project(&y));
            assert!((lhs - rhs).abs() < 1e-12);
            // idempotence
            let px = mask.project(&x);
            assert_eq!(mask.project(&px), px);
        }
    }
}
