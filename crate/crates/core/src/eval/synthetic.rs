//! Labeled Gaussian data whose classes differ only on a planted subset of
//! features.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::DataMatrix;
use crate::error::{HpwlError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedConfig {
    pub n: usize,
    pub d: usize,
    pub classes: usize,
    pub planted: usize,
    /// Standard deviation of the class means on planted features.
    pub separation: f64,
    /// Fraction of rows replaced by heavy outliers (noise scaled by
    /// `outlier_scale`, label kept).
    pub outlier_fraction: f64,
    pub outlier_scale: f64,
}

impl PlantedConfig {
    /// Well separated classes.
    pub fn clean() -> Self {
        Self {
            n: 200,
            d: 400,
            classes: 3,
            planted: 20,
            separation: 3.0,
            outlier_fraction: 0.0,
            outlier_scale: 1.0,
        }
    }

    /// Overlapping classes.
    pub fn noisy() -> Self {
        Self {
            separation: 1.0,
            ..Self::clean()
        }
    }
}

#[derive(Debug, Clone)]
pub struct Planted {
    pub data: DataMatrix,
    /// Sorted indices of the informative features.
    pub informative: Vec<usize>,
    /// Rows turned into outliers.
    pub outliers: Vec<usize>,
}

/// Row `i` has label `i mod classes`; every feature gets unit Gaussian noise
/// and the planted ones also the class mean.
pub fn planted(cfg: &PlantedConfig, seed: u64) -> Result<Planted> {
    if cfg.planted > cfg.d || cfg.classes == 0 || cfg.n < cfg.classes {
        return Err(HpwlError::Argument(format!(
            "invalid generator shape: n={} d={} classes={} planted={}",
            cfg.n, cfg.d, cfg.classes, cfg.planted
        )));
    }
    if !(0.0..=1.0).contains(&cfg.outlier_fraction) {
        return Err(HpwlError::Argument("outlier fraction must be in [0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut informative = sample(&mut rng, cfg.d, cfg.planted).into_vec();
    informative.sort_unstable();
    let means: Vec<Vec<f64>> = (0..cfg.classes)
        .map(|_| {
            (0..cfg.planted)
                .map(|_| cfg.separation * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    let n_out = (cfg.outlier_fraction * cfg.n as f64).round() as usize;
    let mut outliers = sample(&mut rng, cfg.n, n_out).into_vec();
    outliers.sort_unstable();

    let mut rows = Vec::with_capacity(cfg.n);
    let mut labels = Vec::with_capacity(cfg.n);
    for i in 0..cfg.n {
        let class = i % cfg.classes;
        let scale = if outliers.binary_search(&i).is_ok() {
            cfg.outlier_scale
        } else {
            1.0
        };
        let mut row: Vec<f64> = (0..cfg.d)
            .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
            .collect();
        for (slot, &j) in informative.iter().enumerate() {
            row[j] += means[class][slot];
        }
        rows.push(row);
        labels.push(class as i64);
    }
    let data = DataMatrix::from_rows(&rows)?.with_labels(labels)?;
    Ok(Planted {
        data,
        informative,
        outliers,
    })
}

/// How many of `truth` appear in `selected`.
pub fn hits(selected: &[usize], truth: &[usize]) -> usize {
    selected.iter().filter(|j| truth.contains(j)).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_determinism() {
        let cfg = PlantedConfig {
            n: 30,
            d: 12,
            planted: 4,
            ..PlantedConfig::clean()
        };
        let a = planted(&cfg, 1).unwrap();
        let b = planted(&cfg, 1).unwrap();
        assert_eq!(a.data.values(), b.data.values());
        assert_eq!(a.informative, b.informative);
        assert_eq!(a.data.n(), 30);
        assert_eq!(a.data.d(), 12);
        assert_eq!(a.informative.len(), 4);
        let labels = a.data.labels().unwrap();
        assert_eq!(labels.iter().filter(|&&l| l == 0).count(), 10);
    }

    #[test]
    fn outliers_are_counted() {
        let cfg = PlantedConfig {
            n: 40,
            d: 10,
            planted: 3,
            outlier_fraction: 0.1,
            outlier_scale: 5.0,
            ..PlantedConfig::noisy()
        };
        assert_eq!(planted(&cfg, 2).unwrap().outliers.len(), 4);
    }

    #[test]
    fn hit_count() {
        assert_eq!(hits(&[1, 5, 9], &[5, 9, 11]), 2);
    }
}
