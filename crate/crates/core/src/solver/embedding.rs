use nalgebra::DMatrix;

use crate::clustering::ClusterModel;
use crate::error::{HpwlError, Result};
use crate::hypergraph::gaussian_affinity;
use crate::linalg::{row_sq_dist, scale_rows, top_eigenpairs};

/// Diagonal of `D`: 1 on centroid rows, otherwise the Gaussian affinity of
/// the row to the centroid of its cluster.
pub fn build_point_weights(x: &DMatrix<f64>, model: &ClusterModel, sigma: f64) -> Vec<f64> {
    debug_assert!(model.is_snapped());
    (0..x.nrows())
        .map(|i| {
            let c = model.centroid_indices[model.assignments[i]];
            if c == i {
                1.0
            } else {
                gaussian_affinity(row_sq_dist(x, i, x, c), sigma)
            }
        })
        .collect()
}

/// `Z_k = Γ_k Ξ_k^½` from the top-`k` eigenpairs of `(k/d) D½XXᵀD½`.
pub fn build_global_target(x: &DMatrix<f64>, d_diag: &[f64], k: usize) -> Result<DMatrix<f64>> {
    let (n, d) = x.shape();
    if k == 0 || k > n {
        return Err(HpwlError::Argument(format!(
            "embedding dimension must be in 1..={n}, got {k}"
        )));
    }
    let sqrt_d: Vec<f64> = d_diag.iter().map(|v| v.sqrt()).collect();
    let g = scale_rows(x, &sqrt_d);
    let gram = &g * g.transpose() * (k as f64 / d as f64);
    let gram = (&gram + gram.transpose()) * 0.5;
    let (vals, mut vecs) = top_eigenpairs(&gram, k);
    for (c, v) in vals.iter().enumerate() {
        vecs.column_mut(c).scale_mut(v.max(0.0).sqrt());
    }
    Ok(vecs)
}
