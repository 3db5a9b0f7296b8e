//! Unsupervised feature selection driven by a soft hypergraph over cluster
//! centroids, per-point weighting, and a low-rank linear embedding.
//!
//! The pipeline is:
//!
//! 1. k-means on the data, with every mean snapped to its nearest data row
//!    ([`clustering`]);
//! 2. a soft hypergraph whose hyperedges are Gaussian-weighted neighborhoods
//!    of the centroids ([`hypergraph`]);
//! 3. alternating closed-form updates of a factorized transform `T = PQ`
//!    and coordinate descent on the hyperedge weights ([`solver`]);
//! 4. features ranked by the row norms of `T`.
//!
//! [`eval`] reproduces the KNN evaluation protocol and the ablations, and
//! [`report`] writes the CSV/JSON/SVG artifacts used by the `hpwl` binary.

pub mod cli;
pub mod clustering;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod hypergraph;
pub mod linalg;
pub mod report;
pub mod solver;

pub use clustering::ClusterModel;
pub use dataset::{DataMatrix, Split};
pub use error::{HpwlError, Result};
pub use eval::{SweepResult, Variant};
pub use hypergraph::SoftHypergraph;
pub use solver::{fit, FeatureRanking, FitOutput, HpwlParams, LaplacianForm};
