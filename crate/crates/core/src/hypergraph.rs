//! Soft hypergraph over centroids.
//!
//! Vertex `v` and hyperedge `e` are both indexed by centroid. Column `e` of
//! the incidence matrix holds the Gaussian affinities between centroid `e`
//! and its `l` nearest centroids (plus itself, with affinity 1).
//!
//! Three Laplacian-like operators are exposed:
//!
//! * [`SoftHypergraph::laplacian`]: `Δ = I − D_v⁻¹ H W D_e⁻¹ Hᵀ`, the
//!   random-walk form;
//! * [`symmetrize`]: `Δ′ = (Δ + Δᵀ) / 2`;
//! * [`SoftHypergraph::pairwise_laplacian`]: the symmetric matrix `L` with
//!   `tr(Yᵀ L Y) = ½ Σ_ij α_ij ‖y_i − y_j‖²`, where `α = D_v⁻¹ H W D_e⁻¹ Hᵀ`.
//!
//! `tr(YᵀΔY)` and `tr(YᵀΔ′Y)` coincide with the pairwise sum only when `α`
//! is column-stochastic as well as row-stochastic, which a soft hypergraph
//! does not guarantee. `Δ′` is in general indefinite (`1ᵀΔ′1 = 0` while
//! `Δ′1 ≠ 0`), whereas `L` is always positive semidefinite.

use nalgebra::DMatrix;

use crate::error::{HpwlError, Result};
use crate::linalg::row_sq_dist;

/// Gaussian kernel `exp(−dist² / σ²)` on a squared distance.
pub fn gaussian_affinity(sq_dist: f64, sigma: f64) -> f64 {
    (-sq_dist / (sigma * sigma)).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftHypergraph {
    /// Vertices × hyperedges membership strengths in `[0, 1]`.
    pub incidence: DMatrix<f64>,
    /// Hyperedge weights, kept on the probability simplex by the solver.
    pub weights: Vec<f64>,
    pub vertex_degrees: Vec<f64>,
    pub edge_degrees: Vec<f64>,
    pub sigma: f64,
    pub neighbors: usize,
}

impl SoftHypergraph {
    /// Wraps an arbitrary incidence matrix and weight vector, computing degrees.
    pub fn from_parts(
        incidence: DMatrix<f64>,
        weights: Vec<f64>,
        sigma: f64,
        neighbors: usize,
    ) -> Result<Self> {
        if weights.len() != incidence.ncols() {
            return Err(HpwlError::Argument(format!(
                "{} weights for {} hyperedges",
                weights.len(),
                incidence.ncols()
            )));
        }
        let mut h = Self {
            vertex_degrees: vec![0.0; incidence.nrows()],
            edge_degrees: vec![0.0; incidence.ncols()],
            incidence,
            weights,
            sigma,
            neighbors,
        };
        h.refresh_degrees()?;
        Ok(h)
    }

    pub fn num_vertices(&self) -> usize {
        self.incidence.nrows()
    }

    pub fn num_edges(&self) -> usize {
        self.incidence.ncols()
    }

    /// Recomputes `d(v) = Σ_e w(e) h(v, e)` and `δ(e) = Σ_v h(v, e)`.
    pub fn refresh_degrees(&mut self) -> Result<()> {
        let h = &self.incidence;
        self.edge_degrees = h.column_iter().map(|c| c.sum()).collect();
        if let Some(e) = self.edge_degrees.iter().position(|&d| d <= 0.0) {
            return Err(HpwlError::Internal(format!("hyperedge {e} has zero degree")));
        }
        self.vertex_degrees = (0..h.nrows())
            .map(|v| (0..h.ncols()).map(|e| self.weights[e] * h[(v, e)]).sum())
            .collect();
        Ok(())
    }

    /// Replaces the hyperedge weights and refreshes the vertex degrees.
    /// The incidence and edge degrees do not depend on the weights.
    pub fn set_weights(&mut self, weights: Vec<f64>) {
        debug_assert_eq!(weights.len(), self.num_edges());
        self.weights = weights;
        let h = &self.incidence;
        self.vertex_degrees = (0..h.nrows())
            .map(|v| (0..h.ncols()).map(|e| self.weights[e] * h[(v, e)]).sum())
            .collect();
    }

    /// Inverse vertex degrees, with zero degrees mapped to zero.
    pub fn inverse_vertex_degrees(&self) -> Vec<f64> {
        let zero = self.vertex_degrees.iter().filter(|&&d| d <= 0.0).count();
        if zero > 0 {
            log::debug!("{zero} vertices lie only in zero-weight hyperedges; treating 1/d(v) as 0");
        }
        self.vertex_degrees
            .iter()
            .map(|&d| if d > 0.0 { 1.0 / d } else { 0.0 })
            .collect()
    }

    /// `α = D_v⁻¹ H W D_e⁻¹ Hᵀ`, the pairwise coefficients of the local term.
    /// Rows of vertices with zero degree are zero.
    pub fn propagation(&self) -> DMatrix<f64> {
        let inv_dv = self.inverse_vertex_degrees();
        let h = &self.incidence;
        let mut left = h.clone();
        for (v, s) in inv_dv.iter().enumerate() {
            left.row_mut(v).scale_mut(*s);
        }
        for e in 0..h.ncols() {
            left.column_mut(e)
                .scale_mut(self.weights[e] / self.edge_degrees[e]);
        }
        left * h.transpose()
    }

    /// `Δ = I − D_v⁻¹ H W D_e⁻¹ Hᵀ`. Fails when some vertex has zero degree.
    pub fn laplacian(&self) -> Result<DMatrix<f64>> {
        if let Some(v) = self.vertex_degrees.iter().position(|&d| d <= 0.0) {
            return Err(HpwlError::Construction(format!(
                "vertex {v} has zero degree; no weighted hyperedge covers it"
            )));
        }
        let n = self.num_vertices();
        Ok(DMatrix::identity(n, n) - self.propagation())
    }

    /// `I − α` with the pseudo-inverse convention for zero vertex degrees
    /// (such a vertex gets an identity row instead of an error).
    pub fn random_walk_laplacian(&self) -> DMatrix<f64> {
        let n = self.num_vertices();
        DMatrix::identity(n, n) - self.propagation()
    }

    /// Symmetric `L` with `tr(YᵀLY) = ½ Σ_ij α_ij ‖y_i − y_j‖²`:
    /// `L = diag((α1 + αᵀ1) / 2) − (α + αᵀ) / 2`.
    pub fn pairwise_laplacian(&self) -> DMatrix<f64> {
        pairwise_laplacian_of(&self.propagation())
    }

    /// Every nonzero membership becomes 1 (ordinary hypergraph).
    pub fn binarized(&self) -> Result<Self> {
        let incidence = self.incidence.map(|v| if v != 0.0 { 1.0 } else { 0.0 });
        Self::from_parts(incidence, self.weights.clone(), self.sigma, self.neighbors)
    }
}

/// `diag((A1 + Aᵀ1) / 2) − (A + Aᵀ) / 2`
pub fn pairwise_laplacian_of(alpha: &DMatrix<f64>) -> DMatrix<f64> {
    let n = alpha.nrows();
    let sym = (alpha + alpha.transpose()) * 0.5;
    let mut l = -sym;
    for i in 0..n {
        let row: f64 = alpha.row(i).sum();
        let col: f64 = alpha.column(i).sum();
        l[(i, i)] += 0.5 * (row + col);
    }
    l
}

/// `(Δ + Δᵀ) / 2`
pub fn symmetrize(delta: &DMatrix<f64>) -> DMatrix<f64> {
    (delta + delta.transpose()) * 0.5
}

/// Mean Euclidean distance over unordered distinct pairs of rows.
pub fn mean_pairwise_distance(c: &DMatrix<f64>) -> f64 {
    let m = c.nrows();
    let mut total = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            total += row_sq_dist(c, i, c, j).sqrt();
        }
    }
    total / ((m * (m - 1)) as f64 / 2.0)
}

/// Builds the centroid hypergraph with uniform initial weights `1/m`.
///
/// Hyperedge `i` contains centroid `i` (affinity 1) and its `l` nearest other
/// centroids, ties broken by lower index. `σ` is the mean pairwise distance.
pub fn build_incidence(c: &DMatrix<f64>, l: usize) -> Result<SoftHypergraph> {
    let m = c.nrows();
    if m < 2 {
        return Err(HpwlError::Construction(format!(
            "need at least 2 distinct centroids, got {m}"
        )));
    }
    if l == 0 || l > m - 1 {
        return Err(HpwlError::Argument(format!(
            "neighbor count must be in 1..={}, got {l}",
            m - 1
        )));
    }
    let sigma = mean_pairwise_distance(c);
    if !(sigma > 0.0) {
        return Err(HpwlError::Construction(
            "all centroids coincide (σ = 0); the data needs more variance".into(),
        ));
    }

    let mut incidence = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        let mut others: Vec<(usize, f64)> = (0..m)
            .filter(|&j| j != i)
            .map(|j| (j, row_sq_dist(c, i, c, j)))
            .collect();
        others.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        incidence[(i, i)] = 1.0;
        for &(j, dist) in others.iter().take(l) {
            incidence[(j, i)] = gaussian_affinity(dist, sigma);
        }
    }
    SoftHypergraph::from_parts(incidence, vec![1.0 / m as f64; m], sigma, l)
}

/// Embeds an `m × m` operator into `n × n` at the centroid rows/columns, so
/// that `Xᵀ Δ_n X = Cᵀ Δ C` when `C` holds those rows of `X`.
pub fn extend_laplacian(delta: &DMatrix<f64>, centroid_indices: &[usize], n: usize) -> DMatrix<f64> {
    let mut out = DMatrix::<f64>::zeros(n, n);
    for (a, &ia) in centroid_indices.iter().enumerate() {
        for (b, &ib) in centroid_indices.iter().enumerate() {
            out[(ia, ib)] = delta[(a, b)];
        }
    }
    out
}
