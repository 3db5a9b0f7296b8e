//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{HpwlError, Result};

/// Squared Euclidean distance between row `i` of `a` and row `j` of `b`.
pub fn row_sq_dist(a: &DMatrix<f64>, i: usize, b: &DMatrix<f64>, j: usize) -> f64 {
    debug_assert_eq!(a.ncols(), b.ncols());
    (0..a.ncols())
        .map(|c| {
            let t = a[(i, c)] - b[(j, c)];
            t * t
        })
        .sum()
}

/// Euclidean norms of the rows of `m`.
pub fn row_norms(m: &DMatrix<f64>) -> Vec<f64> {
    (0..m.nrows()).map(|i| m.row(i).norm()).collect()
}

/// `diag(v) · m`
pub fn scale_rows(m: &DMatrix<f64>, v: &[f64]) -> DMatrix<f64> {
    let mut out = m.clone();
    for (i, s) in v.iter().enumerate() {
        out.row_mut(i).scale_mut(*s);
    }
    out
}

/// Solves `a x = rhs` for symmetric positive definite `a`.
pub fn spd_solve(a: &DMatrix<f64>, rhs: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| HpwlError::NotPositiveDefinite(what.to_string()))?;
    Ok(chol.solve(rhs))
}

/// Solves a general square system with partial-pivot LU.
pub fn lu_solve(a: &DMatrix<f64>, rhs: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    a.clone()
        .lu()
        .solve(rhs)
        .ok_or_else(|| HpwlError::RankDeficient(format!("{what} is singular")))
}

/// Top-`k` eigenpairs of a symmetric matrix.
///
/// Eigenvalues are sorted descending with a stable sort over the order the
/// decomposition returns them, and each eigenvector is flipped so that its
/// largest-magnitude entry (first one on ties) is positive.
pub fn top_eigenpairs(sym: &DMatrix<f64>, k: usize) -> (Vec<f64>, DMatrix<f64>) {
    let n = sym.nrows();
    let eig = nalgebra::SymmetricEigen::new(sym.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let k = k.min(n);
    let mut vecs = DMatrix::<f64>::zeros(n, k);
    let mut vals = Vec::with_capacity(k);
    for (c, &idx) in order.iter().take(k).enumerate() {
        let mut v: DVector<f64> = eig.eigenvectors.column(idx).into_owned();
        let mut pivot = 0;
        for i in 1..n {
            if v[i].abs() > v[pivot].abs() {
                pivot = i;
            }
        }
        if v[pivot] < 0.0 {
            v.neg_mut();
        }
        vecs.set_column(c, &v);
        vals.push(eig.eigenvalues[idx]);
    }
    (vals, vecs)
}

/// Relative Frobenius distance `‖a − b‖ / max(‖b‖, tiny)`.
pub fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}
