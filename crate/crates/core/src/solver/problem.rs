use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::Result;
use crate::hypergraph::{symmetrize, SoftHypergraph};
use crate::linalg::scale_rows;
use crate::solver::params::LaplacianForm;
use crate::solver::quadratic::QuadraticModel;

/// Parts of the objective that stay fixed for a whole fit.
#[derive(Debug, Clone)]
pub struct Problem {
    /// `n × d` data.
    pub x: DMatrix<f64>,
    pub centroid_indices: Vec<usize>,
    pub d_diag: Vec<f64>,
    /// `n × k` global target.
    pub z_k: DMatrix<f64>,
    pub tau: f64,
    pub rho: f64,
    pub kappa: f64,
    pub form: LaplacianForm,
}

/// Objective terms at one `(T, W, B)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObjectiveTerms {
    /// Local smoothness term over the embedded centroids.
    pub local: f64,
    /// `‖D½XT − Z‖²` (before the `τ` factor).
    pub global: f64,
    /// `κ‖W‖²`
    pub weight_penalty: f64,
    /// `tr(TᵀBT)` (before the `ρ` factor).
    pub surrogate: f64,
    /// `‖T‖_{2,1}` (before the `ρ` factor).
    pub l21: f64,
    pub tau: f64,
    pub rho: f64,
}

impl ObjectiveTerms {
    /// Smooth objective with the reweighted surrogate of the ℓ2,1 term.
    pub fn total(&self) -> f64 {
        self.local + self.tau * self.global + self.weight_penalty + self.rho * self.surrogate
    }

    /// Objective with the exact ℓ2,1 norm.
    pub fn total_l21(&self) -> f64 {
        self.descent_value() + self.weight_penalty
    }

    /// Part that decreases across P/Q/B iterations at fixed `W`.
    pub fn descent_value(&self) -> f64 {
        self.local + self.tau * self.global + self.rho * self.l21
    }
}

impl Problem {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn centroids(&self) -> DMatrix<f64> {
        self.x.select_rows(self.centroid_indices.iter())
    }

    /// Symmetric `m × m` operator used by the P/Q updates.
    pub fn update_operator(&self, h: &SoftHypergraph) -> Result<DMatrix<f64>> {
        Ok(match self.form {
            LaplacianForm::Pairwise => h.pairwise_laplacian(),
            LaplacianForm::RandomWalk => symmetrize(&h.random_walk_laplacian()),
        })
    }

    pub fn quadratic<'a>(&'a self, local: &'a DMatrix<f64>, b_diag: &'a [f64]) -> QuadraticModel<'a> {
        QuadraticModel {
            x: &self.x,
            centroid_indices: &self.centroid_indices,
            local,
            d_diag: &self.d_diag,
            z_k: &self.z_k,
            b_diag,
            tau: self.tau,
            rho: self.rho,
        }
    }

    pub fn objective(&self, h: &SoftHypergraph, t: &DMatrix<f64>, b_diag: &[f64]) -> Result<ObjectiveTerms> {
        let y = self.centroids() * t;
        let op = match self.form {
            LaplacianForm::Pairwise => h.pairwise_laplacian(),
            LaplacianForm::RandomWalk => h.random_walk_laplacian(),
        };
        let local = (y.transpose() * op * &y).trace();
        let sqrt_d: Vec<f64> = self.d_diag.iter().map(|v| v.sqrt()).collect();
        let global = (scale_rows(&(&self.x * t), &sqrt_d) - &self.z_k).norm_squared();
        let weight_penalty = self.kappa * h.weights.iter().map(|w| w * w).sum::<f64>();
        let surrogate = (0..t.nrows())
            .map(|i| b_diag[i] * t.row(i).norm_squared())
            .sum();
        let l21 = (0..t.nrows()).map(|i| t.row(i).norm()).sum();
        Ok(ObjectiveTerms {
            local,
            global,
            weight_penalty,
            surrogate,
            l21,
            tau: self.tau,
            rho: self.rho,
        })
    }
}
