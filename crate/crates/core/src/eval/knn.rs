use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{HpwlError, Result};
use crate::linalg::row_sq_dist;

/// Majority vote over the `k` nearest training rows (Euclidean).
///
/// Distance ties go to the lower training index; vote ties to the smallest
/// label.
pub fn knn_predict(
    train_x: &DMatrix<f64>,
    train_y: &[i64],
    test_x: &DMatrix<f64>,
    k: usize,
) -> Result<Vec<i64>> {
    let n = train_x.nrows();
    if n == 0 {
        return Err(HpwlError::Argument("empty training set".into()));
    }
    if train_y.len() != n {
        return Err(HpwlError::Argument(format!(
            "{} labels for {n} training rows",
            train_y.len()
        )));
    }
    if k == 0 || k > n {
        return Err(HpwlError::Argument(format!("k must be in 1..={n}, got {k}")));
    }
    if train_x.ncols() != test_x.ncols() {
        return Err(HpwlError::Argument("train and test widths differ".into()));
    }
    let mut dist: Vec<(f64, usize)> = Vec::with_capacity(n);
    Ok((0..test_x.nrows())
        .map(|t| {
            dist.clear();
            dist.extend((0..n).map(|i| (row_sq_dist(test_x, t, train_x, i), i)));
            dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut votes: BTreeMap<i64, usize> = BTreeMap::new();
            for &(_, i) in &dist[..k] {
                *votes.entry(train_y[i]).or_default() += 1;
            }
            let mut best = (0, i64::MIN);
            for (&label, &count) in &votes {
                if count > best.0 {
                    best = (count, label);
                }
            }
            best.1
        })
        .collect())
}

/// Fraction of exact matches.
pub fn accuracy(predicted: &[i64], truth: &[i64]) -> f64 {
    debug_assert_eq!(predicted.len(), truth.len());
    if truth.is_empty() {
        return 0.0;
    }
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len() as f64
}
