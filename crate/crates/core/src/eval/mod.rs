//! KNN evaluation of a feature ranking: repeated 50/50 splits, selector fit
//! on the training half only, accuracy swept over the number of kept
//! features.

mod knn;
pub mod synthetic;

use serde::Serialize;

pub use crate::solver::Variant;
pub use knn::{accuracy, knn_predict};

use crate::dataset::{split_half, DataMatrix, Standardizer};
use crate::error::{HpwlError, Result};
use crate::solver::{fit, HpwlParams};

/// `10, 20, …, 200`
pub fn default_feature_counts() -> Vec<usize> {
    (1..=20).map(|i| i * 10).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOptions {
    pub knn_k: usize,
    pub feature_counts: Vec<usize>,
    /// Standardize with statistics of the training half.
    pub standardize: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            knn_k: 5,
            feature_counts: default_feature_counts(),
            standardize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub variant: Variant,
    pub seeds: Vec<u64>,
    pub feature_counts: Vec<usize>,
    /// `seeds × feature_counts`
    pub accuracies: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    /// Population standard deviation over seeds.
    pub std: Vec<f64>,
}

impl SweepResult {
    pub fn from_accuracies(
        variant: Variant,
        seeds: Vec<u64>,
        feature_counts: Vec<usize>,
        accuracies: Vec<Vec<f64>>,
    ) -> Self {
        let reps = accuracies.len().max(1) as f64;
        let cols = feature_counts.len();
        let mean: Vec<f64> = (0..cols)
            .map(|c| accuracies.iter().map(|r| r[c]).sum::<f64>() / reps)
            .collect();
        let std = (0..cols)
            .map(|c| {
                let var = accuracies.iter().map(|r| (r[c] - mean[c]).powi(2)).sum::<f64>() / reps;
                var.sqrt()
            })
            .collect();
        Self {
            variant,
            seeds,
            feature_counts,
            accuracies,
            mean,
            std,
        }
    }

    /// Mean over every (seed, feature count) cell.
    pub fn overall_mean(&self) -> f64 {
        if self.mean.is_empty() {
            0.0
        } else {
            self.mean.iter().sum::<f64>() / self.mean.len() as f64
        }
    }
}

/// Feature counts that fit in `d`, warning about the rest.
pub fn valid_feature_counts(requested: &[usize], d: usize) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for &f in requested {
        if f >= 1 && f <= d {
            out.push(f);
        } else {
            log::warn!("skipping feature count {f}: data has {d} features");
        }
    }
    if out.is_empty() {
        return Err(HpwlError::Config(format!(
            "no requested feature count fits in {d} features"
        )));
    }
    Ok(out)
}

/// Accuracy at each feature count for one split.
pub fn evaluate_split(
    x: &DataMatrix,
    params: &HpwlParams,
    seed: u64,
    counts: &[usize],
    opts: &SweepOptions,
) -> Result<Vec<f64>> {
    let labels = x
        .labels()
        .ok_or_else(|| HpwlError::Config("evaluation needs a labeled dataset".into()))?;
    let split = split_half(x.n(), seed)?;
    let mut train = x.select_rows(&split.train_indices)?.without_labels();
    let mut test = x.select_rows(&split.test_indices)?.without_labels();
    if opts.standardize {
        let s = Standardizer::fit(&train);
        train = s.apply(&train);
        test = s.apply(&test);
    }
    let train_y: Vec<i64> = split.train_indices.iter().map(|&i| labels[i]).collect();
    let test_y: Vec<i64> = split.test_indices.iter().map(|&i| labels[i]).collect();

    let out = fit(&train, params, seed)?;
    counts
        .iter()
        .map(|&f| {
            let cols = out.ranking.top(f);
            let tr = train.values().select_columns(cols.iter());
            let te = test.values().select_columns(cols.iter());
            let k = opts.knn_k.min(tr.nrows());
            let pred = knn_predict(&tr, &train_y, &te, k)?;
            Ok(accuracy(&pred, &test_y))
        })
        .collect()
}

/// Runs the split/fit/KNN protocol once per seed.
pub fn run_sweep(
    x: &DataMatrix,
    params: &HpwlParams,
    variant: Variant,
    seeds: &[u64],
    opts: &SweepOptions,
) -> Result<SweepResult> {
    if seeds.is_empty() {
        return Err(HpwlError::Config("at least one seed is required".into()));
    }
    let counts = valid_feature_counts(&opts.feature_counts, x.d())?;
    let params = HpwlParams {
        variant,
        ..params.clone()
    };
    let accuracies = seeds
        .iter()
        .map(|&s| evaluate_split(x, &params, s, &counts, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult::from_accuracies(variant, seeds.to_vec(), counts, accuracies))
}

/// Candidate values for the three trade-off weights.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct Grid {
    pub tau: Vec<f64>,
    pub kappa: Vec<f64>,
    pub rho: Vec<f64>,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            tau: vec![0.1, 1.0, 10.0],
            kappa: vec![0.1, 1.0, 10.0],
            rho: vec![0.1, 1.0, 10.0, 100.0, 1000.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub tau: f64,
    pub kappa: f64,
    pub rho: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridResult {
    pub points: Vec<GridPoint>,
    pub best: usize,
}

impl GridResult {
    pub fn best_params(&self, base: &HpwlParams) -> HpwlParams {
        let p = &self.points[self.best];
        HpwlParams {
            tau: p.tau,
            kappa: p.kappa,
            rho: p.rho,
            ..base.clone()
        }
    }
}

/// Scores every grid point by the overall mean sweep accuracy. Points are
/// visited with `tau` outermost and `rho` innermost, each ascending as given;
/// the first maximum wins.
pub fn grid_search(
    x: &DataMatrix,
    base: &HpwlParams,
    grid: &Grid,
    seeds: &[u64],
    opts: &SweepOptions,
) -> Result<GridResult> {
    let mut points: Vec<GridPoint> = Vec::new();
    let mut best = 0;
    for &tau in &grid.tau {
        for &kappa in &grid.kappa {
            for &rho in &grid.rho {
                let params = HpwlParams {
                    tau,
                    kappa,
                    rho,
                    ..base.clone()
                };
                let score = run_sweep(x, &params, base.variant, seeds, opts)?.overall_mean();
                log::info!("grid tau={tau} kappa={kappa} rho={rho}: {score:.4}");
                if points.is_empty() || score > points[best].score {
                    best = points.len();
                }
                points.push(GridPoint { tau, kappa, rho, score });
            }
        }
    }
    if points.is_empty() {
        return Err(HpwlError::Config("empty hyperparameter grid".into()));
    }
    Ok(GridResult { points, best })
}
