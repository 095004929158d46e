//! Small dense solves backing the moment and coefficient systems.

use nalgebra::{DMatrix, DVector};

/// Ratio of smallest to largest pivot below which a square system counts as singular.
const PIVOT_RATIO_FLOOR: f64 = 1e-13;

/// Solves `a x = b` by LU with partial pivoting. Returns `None` when the
/// system is numerically singular.
pub fn solve_square(a: DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    assert!(a.is_square());
    let lu = a.lu();
    let u = lu.u();
    let pivots: Vec<f64> = u.diagonal().iter().map(|p| p.abs()).collect();
    let max = pivots.iter().cloned().fold(0.0, f64::max);
    let min = pivots.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || min < PIVOT_RATIO_FLOOR * max {
        return None;
    }
    lu.solve(b)
}

/// Least-squares solution of an overdetermined system together with its
/// numerical rank. Columns are normalised before the SVD so that the rank
/// test is scale-free.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<(DVector<f64>, usize)> {
    let norms: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    if norms.iter().any(|&n| n == 0.0) {
        return None;
    }
    let mut scaled = a.clone();
    for (mut col, n) in scaled.column_iter_mut().zip(&norms) {
        col /= *n;
    }
    let svd = scaled.svd(true, true);
    let smax = svd.singular_values.max();
    let tol = smax * 1e-12;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    let mut x = svd.solve(b, tol).ok()?;
    for (xi, n) in x.iter_mut().zip(&norms) {
        *xi /= *n;
    }
    Some((x, rank))
}
