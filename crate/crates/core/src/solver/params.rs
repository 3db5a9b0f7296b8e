use serde::{Deserialize, Serialize};

use crate::error::{HpwlError, Result};

/// Which operator carries the local (centroid-smoothness) term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplacianForm {
    /// Symmetric Laplacian of the pairwise coefficients `α`; its quadratic
    /// form is exactly `½ Σ α_ij ‖y_i − y_j‖²`. Always PSD.
    #[default]
    Pairwise,
    /// `Δ = I − D_v⁻¹HWD_e⁻¹Hᵀ` in the objective, `(Δ + Δᵀ)/2` in the
    /// updates, and the `tr(RWS)` coefficients in the weight step.
    RandomWalk,
}

/// Selector variant; everything except `Full` is an ablation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    Full,
    /// Unit point weights, hypergraph over every training point.
    IdentityD,
    /// Incidence thresholded to {0, 1}.
    BinaryH,
    /// Global term switched off (`τ = 0`).
    NoGlobal,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Full,
        Variant::IdentityD,
        Variant::BinaryH,
        Variant::NoGlobal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::IdentityD => "identity_d",
            Variant::BinaryH => "binary_h",
            Variant::NoGlobal => "no_global",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = HpwlError;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| HpwlError::Config(format!("unknown variant {s:?}")))
    }
}

/// Hyperparameters. Counts left as `None` are derived from the data shape
/// by [`HpwlParams::resolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HpwlParams {
    /// Weight of the global correlation term.
    pub tau: f64,
    /// Weight of the ℓ2,1 row-sparsity term.
    pub rho: f64,
    /// Weight of the hyperedge-weight ridge.
    pub kappa: f64,
    /// Rank bound `r` of `T = PQ`; defaults to `embed_dim`.
    pub rank: Option<usize>,
    /// Embedding dimension `k`; defaults to `min(m, 30)`.
    pub embed_dim: Option<usize>,
    /// Neighbors per hyperedge `l` (clamped to `m − 1`).
    pub neighbors: usize,
    /// Centroid count `m`; defaults to `⌊n/10⌋` clamped to `[2, n]`.
    pub centroids: Option<usize>,
    pub outer_max: usize,
    pub inner_max: usize,
    /// Threshold on the normalized change of `T`.
    pub tol: f64,
    pub kmeans_max_iter: usize,
    /// Floor on row norms when refreshing the ℓ2,1 surrogate.
    pub eps_b: f64,
    pub laplacian: LaplacianForm,
    pub variant: Variant,
    /// Shorten weight moves that would raise the objective once the vertex
    /// degrees are refreshed. Off gives the plain closed-form pass.
    pub guard_weights: bool,
}

impl Default for HpwlParams {
    fn default() -> Self {
        Self {
            tau: 1.0,
            rho: 1.0,
            kappa: 1.0,
            rank: None,
            embed_dim: None,
            neighbors: 5,
            centroids: None,
            outer_max: 20,
            inner_max: 10,
            tol: 1e-4,
            kmeans_max_iter: 100,
            eps_b: 1e-8,
            laplacian: LaplacianForm::Pairwise,
            variant: Variant::Full,
            guard_weights: true,
        }
    }
}

/// [`HpwlParams`] with every count fixed for a given `n × d` table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedParams {
    pub tau: f64,
    pub rho: f64,
    pub kappa: f64,
    pub rank: usize,
    pub embed_dim: usize,
    pub neighbors: usize,
    pub centroids: usize,
    pub outer_max: usize,
    pub inner_max: usize,
    pub tol: f64,
    pub kmeans_max_iter: usize,
    pub eps_b: f64,
    pub laplacian: LaplacianForm,
    pub variant: Variant,
    pub guard_weights: bool,
}

pub fn default_centroids(n: usize) -> usize {
    (n / 10).clamp(2, n.max(2))
}

impl HpwlParams {
    pub fn resolve(&self, n: usize, d: usize) -> Result<ResolvedParams> {
        let bad = |msg: String| Err(HpwlError::Argument(msg));
        if n < 4 {
            return bad(format!("need at least 4 samples, got {n}"));
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return bad(format!("tau must be finite and >= 0, got {}", self.tau));
        }
        if !(self.rho.is_finite() && self.rho >= 0.0) {
            return bad(format!("rho must be finite and >= 0, got {}", self.rho));
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return bad(format!("kappa must be finite and > 0, got {}", self.kappa));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return bad(format!("tol must be > 0, got {}", self.tol));
        }
        if !(self.eps_b > 0.0) {
            return bad(format!("eps_b must be > 0, got {}", self.eps_b));
        }
        if self.neighbors == 0 || self.outer_max == 0 || self.inner_max == 0 || self.kmeans_max_iter == 0 {
            return bad("neighbors and iteration caps must be >= 1".into());
        }
        let centroids = self.centroids.unwrap_or_else(|| default_centroids(n));
        if centroids < 2 || centroids > n {
            return bad(format!("centroid count must be in 2..={n}, got {centroids}"));
        }
        let embed_dim = self
            .embed_dim
            .unwrap_or_else(|| centroids.min(30).min(d).min(n));
        let rank = self.rank.unwrap_or(embed_dim);
        if embed_dim == 0 || embed_dim > d || embed_dim > n {
            return bad(format!(
                "embedding dimension must be in 1..={}, got {embed_dim}",
                d.min(n)
            ));
        }
        if rank == 0 || rank > embed_dim {
            return bad(format!("rank must be in 1..={embed_dim}, got {rank}"));
        }
        Ok(ResolvedParams {
            tau: self.tau,
            rho: self.rho,
            kappa: self.kappa,
            rank,
            embed_dim,
            neighbors: self.neighbors,
            centroids,
            outer_max: self.outer_max,
            inner_max: self.inner_max,
            tol: self.tol,
            kmeans_max_iter: self.kmeans_max_iter,
            eps_b: self.eps_b,
            laplacian: self.laplacian,
            variant: self.variant,
            guard_weights: self.guard_weights,
        })
    }
}
