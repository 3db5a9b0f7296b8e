//! Alternating minimization of the selection objective
//!
//! ```text
//! local(CT; W) + τ ‖D½XT − Z_k‖² + κ‖W‖² + ρ ‖T‖_{2,1},   T = PQ,
//! ```
//!
//! over the factors `P`, `Q` (closed form, with the ℓ2,1 term handled by
//! iterative reweighting through `B`) and the hyperedge weights `W`
//! (pairwise coordinate descent on the simplex).

mod embedding;
mod fit;
mod params;
mod problem;
mod quadratic;
mod weights;

pub use embedding::{build_global_target, build_point_weights};
pub use fit::{feature_scores, fit, prepare, solve, FeatureRanking, FitOutput, SolverState, Trajectory};
pub use params::{default_centroids, HpwlParams, LaplacianForm, ResolvedParams, Variant};
pub use problem::{ObjectiveTerms, Problem};
pub use quadratic::{initial_q, refresh_b, QuadraticModel, SolvePath};
pub use weights::{
    omega, pair_update, update_w, update_w_guarded, weight_objective, LocalInWeights, WeightPassStats,
};
