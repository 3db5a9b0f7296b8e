//! Lloyd k-means plus snapping of each mean onto its nearest data row.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::DataMatrix;
use crate::error::{HpwlError, Result};
use crate::linalg::row_sq_dist;

/// Output of k-means, optionally followed by [`snap_centroids`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    /// `m × d` cluster means.
    pub means: DMatrix<f64>,
    /// Cluster index of every data row.
    pub assignments: Vec<usize>,
    /// Row of the data nearest to each mean; empty until snapped.
    pub centroid_indices: Vec<usize>,
    /// Rows of the data at `centroid_indices`.
    pub centroids: DMatrix<f64>,
    /// Within-cluster sum of squares after each mean update.
    pub inertia_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl ClusterModel {
    pub fn m(&self) -> usize {
        self.means.nrows()
    }

    pub fn is_snapped(&self) -> bool {
        !self.centroid_indices.is_empty()
    }

    /// Every distinct data row as its own cluster and centroid. Duplicate rows
    /// join the first occurrence.
    pub fn all_points(x: &DataMatrix) -> Self {
        let v = x.values();
        let mut centroid_indices: Vec<usize> = Vec::new();
        let mut assignments = Vec::with_capacity(x.n());
        for i in 0..x.n() {
            match centroid_indices
                .iter()
                .position(|&c| row_sq_dist(v, i, v, c) == 0.0)
            {
                Some(j) => assignments.push(j),
                None => {
                    assignments.push(centroid_indices.len());
                    centroid_indices.push(i);
                }
            }
        }
        let centroids = v.select_rows(centroid_indices.iter());
        Self {
            means: centroids.clone(),
            assignments,
            centroid_indices,
            centroids,
            inertia_trace: vec![0.0],
            iterations: 0,
            converged: true,
        }
    }
}

fn nearest(points: &DMatrix<f64>, i: usize, means: &DMatrix<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for j in 0..means.nrows() {
        let dist = row_sq_dist(points, i, means, j);
        if dist < best.1 {
            best = (j, dist);
        }
    }
    best
}

fn inertia(points: &DMatrix<f64>, means: &DMatrix<f64>, assignments: &[usize]) -> f64 {
    assignments
        .iter()
        .enumerate()
        .map(|(i, &j)| row_sq_dist(points, i, means, j))
        .sum()
}

fn recompute_means(points: &DMatrix<f64>, assignments: &[usize], m: usize) -> DMatrix<f64> {
    let mut means = DMatrix::<f64>::zeros(m, points.ncols());
    let mut counts = vec![0usize; m];
    for (i, &j) in assignments.iter().enumerate() {
        counts[j] += 1;
        let mut row = means.row_mut(j);
        row += points.row(i);
    }
    for (j, &c) in counts.iter().enumerate() {
        means.row_mut(j).unscale_mut(c as f64);
    }
    means
}

/// Lloyd iterations from `m` distinct rows drawn uniformly with `seed`.
///
/// Assignment ties go to the lowest cluster index. When a cluster empties,
/// the point farthest from its own mean (taken from a cluster with at least
/// two members) is moved into it. Stops once assignments repeat or after
/// `max_iter` assignment passes.
pub fn kmeans(x: &DataMatrix, m: usize, seed: u64, max_iter: usize) -> Result<ClusterModel> {
    let n = x.n();
    if m == 0 || m > n {
        return Err(HpwlError::Argument(format!(
            "cluster count must be in 1..={n}, got {m}"
        )));
    }
    if max_iter == 0 {
        return Err(HpwlError::Argument("max_iter must be >= 1".into()));
    }
    let points = x.values();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init = rand::seq::index::sample(&mut rng, n, m).into_vec();
    let mut means = points.select_rows(init.iter());

    let mut assignments = vec![usize::MAX; n];
    let mut inertia_trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let mut dists = vec![0.0; n];
        let mut next = vec![0usize; n];
        for i in 0..n {
            let (j, dist) = nearest(points, i, &means);
            next[i] = j;
            dists[i] = dist;
        }
        if next == assignments {
            converged = true;
            break;
        }
        assignments = next;

        let mut counts = vec![0usize; m];
        for &j in &assignments {
            counts[j] += 1;
        }
        for empty in 0..m {
            if counts[empty] > 0 {
                continue;
            }
            let donor = (0..n)
                .filter(|&i| counts[assignments[i]] > 1)
                .fold(None::<usize>, |best, i| match best {
                    Some(b) if dists[b] >= dists[i] => Some(b),
                    _ => Some(i),
                })
                .ok_or_else(|| HpwlError::Internal("no point available to refill a cluster".into()))?;
            log::debug!("k-means: cluster {empty} empty, re-seeded with row {donor}");
            counts[assignments[donor]] -= 1;
            assignments[donor] = empty;
            counts[empty] = 1;
            dists[donor] = 0.0;
        }

        means = recompute_means(points, &assignments, m);
        inertia_trace.push(inertia(points, &means, &assignments));
    }

    Ok(ClusterModel {
        means,
        assignments,
        centroid_indices: Vec::new(),
        centroids: DMatrix::zeros(0, x.d()),
        inertia_trace,
        iterations,
        converged,
    })
}

/// Replaces every mean by the index of its nearest data row (ties to the
/// lowest row). Means that land on the same row are merged: the first one
/// is kept and the clusters are relabelled, so `m` can shrink.
pub fn snap_centroids(x: &DataMatrix, model: &ClusterModel) -> ClusterModel {
    let points = x.values();
    let snapped: Vec<usize> = (0..model.m())
        .map(|j| {
            let mut best = (0, f64::INFINITY);
            for i in 0..x.n() {
                let dist = row_sq_dist(points, i, &model.means, j);
                if dist < best.1 {
                    best = (i, dist);
                }
            }
            best.0
        })
        .collect();

    let mut centroid_indices: Vec<usize> = Vec::new();
    let mut kept_means = Vec::new();
    let mut relabel = vec![0usize; model.m()];
    for (j, &row) in snapped.iter().enumerate() {
        match centroid_indices.iter().position(|&r| r == row) {
            Some(pos) => relabel[j] = pos,
            None => {
                relabel[j] = centroid_indices.len();
                centroid_indices.push(row);
                kept_means.push(j);
            }
        }
    }
    if centroid_indices.len() < model.m() {
        log::info!(
            "{} centroids coincided after snapping; m reduced to {}",
            model.m() - centroid_indices.len(),
            centroid_indices.len()
        );
    }

    ClusterModel {
        means: model.means.select_rows(kept_means.iter()),
        assignments: model.assignments.iter().map(|&j| relabel[j]).collect(),
        centroids: points.select_rows(centroid_indices.iter()),
        centroid_indices,
        inertia_trace: model.inertia_trace.clone(),
        iterations: model.iterations,
        converged: model.converged,
    }
}
