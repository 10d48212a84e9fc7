//! Points of the ambient space.
//!
//! Vectors and matrices share one dense representation: a `d`-vector is a
//! `d x 1` matrix, and all inner products are Frobenius inner products, so the
//! solver never needs to know which space it is iterating in.

use nalgebra::DMatrix;

/// A point of the ambient space: a dense real matrix (a vector is `d x 1`).
pub type Point = DMatrix<f64>;

/// Builds a column-vector point from a slice.
pub fn vector(values: &[f64]) -> Point {
    DMatrix::from_column_slice(values.len(), 1, values)
}

/// Frobenius inner product `<a, b> = sum_ij a_ij b_ij`.
///
/// Panics on dimension mismatch, like the underlying matrix operations.
pub fn inner(a: &Point, b: &Point) -> f64 {
    assert_eq!(
        a.shape(),
        b.shape(),
        "inner product of points with different shapes"
    );
    a.dot(b)
}

/// Max relative error between `oracle`'s gradient and a central finite
/// difference with step `h`, taken over all coordinates:
/// `|(eval(x + h e_i) - eval(x - h e_i)) / 2h - grad(x)_i| / (1 + |grad(x)_i|)`.
pub fn check_fd_gradient(
    eval: &dyn Fn(&Point) -> f64,
    grad: &dyn Fn(&Point) -> Point,
    x: &Point,
    h: f64,
) -> f64 {
    assert!(h > 0.0, "finite-difference step must be positive");
    let g = grad(x);
    let mut worst = 0.0f64;
    for idx in 0..x.len() {
        let mut plus = x.clone();
        let mut minus = x.clone();
        plus[idx] += h;
        minus[idx] -= h;
        let fd = (eval(&plus) - eval(&minus)) / (2.0 * h);
        let err = (fd - g[idx]).abs() / (1.0 + g[idx].abs());
        worst = worst.max(err);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inner_of_small_vectors() {
        let a = vector(&[1.0, 2.0]);
        let b = vector(&[3.0, 4.0]);
        assert_eq!(inner(&a, &b), 11.0);
    }

    #[test]
    fn inner_is_norm_squared() {
        let mut rng = crate::problems::rng(7);
        for _ in 0..20 {
            let x = crate::problems::gaussian_matrix(&mut rng, 5, 3);
            let lhs = inner(&x, &x);
            let rhs = x.norm() * x.norm();
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }
    }

    #[test]
    fn inner_of_identity_matrices_is_trace() {
        let i2: Point = DMatrix::identity(2, 2);
        assert_eq!(inner(&i2, &i2), 2.0);
    }

    #[test]
    #[should_panic(expected = "different shapes")]
    fn inner_rejects_dimension_mismatch() {
        let a = vector(&[1.0]);
        let b = vector(&[1.0, 2.0]);
        inner(&a, &b);
    }

    #[test]
    fn fd_check_quadratic() {
        let eval = |x: &Point| x.norm_squared();
        let grad = |x: &Point| x * 2.0;
        let x = vector(&[1.0, 1.0]);
        assert!(check_fd_gradient(&eval, &grad, &x, 1e-5) < 1e-6);
    }

    #[test]
    fn fd_check_gaussian_bump() {
        // h(x) = 0.5 exp(-|x|^2), grad = -x exp(-|x|^2)
        let eval = |x: &Point| 0.5 * (-x.norm_squared()).exp();
        let grad = |x: &Point| x * (-(-x.norm_squared()).exp());
        let x = vector(&[0.3, -0.2]);
        assert!(check_fd_gradient(&eval, &grad, &x, 1e-5) < 1e-6);
    }

    #[test]
    fn fd_check_linear_is_exact() {
        let c = vector(&[2.0, -3.0, 0.5]);
        let eval = {
            let c = c.clone();
            move |x: &Point| inner(&c, x)
        };
        let grad = move |_: &Point| c.clone();
        let x = vector(&[0.4, 12.0, -7.0]);
        assert!(check_fd_gradient(&eval, &grad, &x, 1e-5) < 1e-10);
    }
}
