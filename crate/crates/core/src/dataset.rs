//! Tabular data: CSV ingestion, column standardization and the 50/50 split.

use std::fs::File;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{HpwlError, Result};

/// Dense `n × d` data table, rows are samples and columns are features.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: DMatrix<f64>,
    labels: Option<Vec<i64>>,
    feature_names: Option<Vec<String>>,
}

impl DataMatrix {
    pub fn new(
        values: DMatrix<f64>,
        labels: Option<Vec<i64>>,
        feature_names: Option<Vec<String>>,
    ) -> Result<Self> {
        let (n, d) = values.shape();
        if n < 2 {
            return Err(HpwlError::Argument(format!(
                "data needs at least 2 rows, got {n}"
            )));
        }
        if d < 1 {
            return Err(HpwlError::Argument("data needs at least 1 feature column".into()));
        }
        if let Some((idx, _)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            // column-major storage
            let (row, col) = (idx % n, idx / n);
            return Err(HpwlError::Load {
                row,
                column: col,
                message: "non-finite value".into(),
            });
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(HpwlError::Argument(format!(
                    "labels have length {}, expected {n}",
                    l.len()
                )));
            }
        }
        if let Some(names) = &feature_names {
            if names.len() != d {
                return Err(HpwlError::Argument(format!(
                    "{} feature names for {d} columns",
                    names.len()
                )));
            }
        }
        Ok(Self {
            values,
            labels,
            feature_names,
        })
    }

    /// Builds an unlabeled matrix from row vectors.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(HpwlError::Argument("ragged rows".into()));
        }
        let values = DMatrix::from_fn(n, d, |i, j| rows[i][j]);
        Self::new(values, None, None)
    }

    pub fn with_labels(mut self, labels: Vec<i64>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(HpwlError::Argument(format!(
                "labels have length {}, expected {}",
                labels.len(),
                self.n()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn d(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Header name of column `j`, or `f{j}` when the file had no header.
    pub fn feature_name(&self, j: usize) -> String {
        self.feature_names
            .as_ref()
            .map(|names| names[j].clone())
            .unwrap_or_else(|| format!("f{j}"))
    }

    /// Drops the labels; used to hand the selector an unlabeled view.
    pub fn without_labels(&self) -> Self {
        Self {
            values: self.values.clone(),
            labels: None,
            feature_names: self.feature_names.clone(),
        }
    }

    /// Rows in the given order. Fails if fewer than two rows are selected.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let values = self.values.select_rows(rows.iter());
        let labels = self
            .labels
            .as_ref()
            .map(|l| rows.iter().map(|&i| l[i]).collect());
        Self::new(values, labels, self.feature_names.clone())
    }

    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        let values = self.values.select_columns(cols.iter());
        let names = self
            .feature_names
            .as_ref()
            .map(|names| cols.iter().map(|&j| names[j].clone()).collect());
        Self::new(values, self.labels.clone(), names)
    }
}

/// Loads a comma-separated numeric table.
///
/// `label_column` is matched against the header names first; a plain integer
/// is also accepted as a zero-based column index, which is the only way to
/// name a column in a headerless file.
pub fn load_csv(path: &Path, has_header: bool, label_column: Option<&str>) -> Result<DataMatrix> {
    let file = File::open(path).map_err(|e| HpwlError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let header: Option<Vec<String>> = if has_header {
        let h = reader.headers().map_err(|e| HpwlError::Load {
            row: 0,
            column: 0,
            message: format!("unreadable header: {e}"),
        })?;
        Some(h.iter().map(str::to_string).collect())
    } else {
        None
    };

    let mut records = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| HpwlError::Load {
            row,
            column: 0,
            message: e.to_string(),
        })?;
        records.push(rec);
    }
    let width = header
        .as_ref()
        .map(Vec::len)
        .or_else(|| records.first().map(csv::StringRecord::len))
        .unwrap_or(0);

    let label_idx = match label_column {
        None => None,
        Some(name) => Some(resolve_column(name, header.as_deref(), width)?),
    };

    let n = records.len();
    let d = width - usize::from(label_idx.is_some());
    let mut values = DMatrix::<f64>::zeros(n, d);
    let mut labels = label_idx.map(|_| Vec::with_capacity(n));
    for (row, rec) in records.iter().enumerate() {
        if rec.len() != width {
            return Err(HpwlError::Load {
                row,
                column: rec.len().min(width),
                message: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        let mut j = 0;
        for (col, cell) in rec.iter().enumerate() {
            if Some(col) == label_idx {
                let label = parse_label(cell).ok_or_else(|| HpwlError::Load {
                    row,
                    column: col,
                    message: format!("label {cell:?} is not an integer class code"),
                })?;
                labels.as_mut().expect("label column").push(label);
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| HpwlError::Load {
                row,
                column: col,
                message: format!("{cell:?} is not a number"),
            })?;
            if !v.is_finite() {
                return Err(HpwlError::Load {
                    row,
                    column: col,
                    message: format!("{cell:?} is not finite"),
                });
            }
            values[(row, j)] = v;
            j += 1;
        }
    }

    let names = header.map(|h| {
        h.into_iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != label_idx)
            .map(|(_, s)| s)
            .collect()
    });
    DataMatrix::new(values, labels, names)
}

fn resolve_column(name: &str, header: Option<&[String]>, width: usize) -> Result<usize> {
    if let Some(pos) = header.and_then(|h| h.iter().position(|c| c == name)) {
        return Ok(pos);
    }
    match name.parse::<usize>() {
        Ok(idx) if idx < width => Ok(idx),
        _ => Err(HpwlError::Config(format!("label column {name:?} not found"))),
    }
}

fn parse_label(cell: &str) -> Option<i64> {
    if let Ok(v) = cell.parse::<i64>() {
        return Some(v);
    }
    let v: f64 = cell.parse().ok()?;
    (v.is_finite() && v.fract() == 0.0 && v.abs() < 9.0e15).then_some(v as i64)
}

/// Per-column affine map fitted on one table and applicable to another.
///
/// Uses the population convention (divisor `n`). Columns whose spread is
/// numerically zero map to zero instead of being divided.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// `None` marks a zero-variance column.
    pub scale: Vec<Option<f64>>,
}

impl Standardizer {
    pub fn fit(x: &DataMatrix) -> Self {
        let n = x.n() as f64;
        let mut mean = Vec::with_capacity(x.d());
        let mut scale = Vec::with_capacity(x.d());
        for col in x.values().column_iter() {
            let mu = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
            let sd = var.sqrt();
            mean.push(mu);
            scale.push((sd > 1e-12 * mu.abs().max(1.0)).then_some(sd));
        }
        Self { mean, scale }
    }

    pub fn apply(&self, x: &DataMatrix) -> DataMatrix {
        let mut values = x.values().clone();
        for (j, mut col) in values.column_iter_mut().enumerate() {
            match self.scale[j] {
                Some(sd) => col.iter_mut().for_each(|v| *v = (*v - self.mean[j]) / sd),
                None => col.fill(0.0),
            }
        }
        DataMatrix {
            values,
            labels: x.labels.clone(),
            feature_names: x.feature_names.clone(),
        }
    }
}

/// Zero-mean, unit-variance columns (population std); constant columns become zero.
pub fn standardize(x: &DataMatrix) -> DataMatrix {
    Standardizer::fit(x).apply(x)
}

/// Disjoint train/test index sets covering `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
}

/// Random halving: `⌈n/2⌉` training rows, the rest for testing. Both index
/// lists are returned sorted.
pub fn split_half(n: usize, seed: u64) -> Result<Split> {
    if n < 2 {
        return Err(HpwlError::Argument(format!("cannot split {n} rows")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = n.div_ceil(2);
    let mut train_indices = perm[..n_train].to_vec();
    let mut test_indices = perm[n_train..].to_vec();
    train_indices.sort_unstable();
    test_indices.sort_unstable();
    Ok(Split {
        train_indices,
        test_indices,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_plain_matrix() {
        let f = write_tmp("1,2\n3,4\n5,6\n");
        let x = load_csv(f.path(), false, None).unwrap();
        assert_eq!((x.n(), x.d()), (3, 2));
        assert_eq!(x.values()[(2, 1)], 6.0);
        assert!(x.labels().is_none());
    }

    #[test]
    fn extracts_label_by_index() {
        let f = write_tmp("1,2\n3,4\n5,6\n");
        let x = load_csv(f.path(), false, Some("1")).unwrap();
        assert_eq!((x.n(), x.d()), (3, 1));
        assert_eq!(x.labels().unwrap(), &[2, 4, 6]);
        assert_eq!(x.values()[(1, 0)], 3.0);
    }

    #[test]
    fn extracts_label_by_header_name() {
        let f = write_tmp("a,class,b\n1,0,2\n3,1,4\n");
        let x = load_csv(f.path(), true, Some("class")).unwrap();
        assert_eq!(x.labels().unwrap(), &[0, 1]);
        assert_eq!(x.feature_names().unwrap(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn rejects_text_cell_with_row() {
        let f = write_tmp("abc,2\n3,4\n");
        match load_csv(f.path(), false, None) {
            Err(HpwlError::Load { row, column, .. }) => assert_eq!((row, column), (0, 0)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_nan_and_ragged_rows() {
        let f = write_tmp("1,2\nNaN,4\n");
        assert!(matches!(
            load_csv(f.path(), false, None),
            Err(HpwlError::Load { row: 1, .. })
        ));
        let f = write_tmp("1,2\n3\n");
        assert!(matches!(
            load_csv(f.path(), false, None),
            Err(HpwlError::Load { row: 1, .. })
        ));
    }

    #[test]
    fn missing_label_column_is_config_error() {
        let f = write_tmp("a,b\n1,2\n3,4\n");
        assert!(matches!(
            load_csv(f.path(), true, Some("label")),
            Err(HpwlError::Config(_))
        ));
    }

    #[test]
    fn missing_file_names_path() {
        let err = load_csv(Path::new("/nonexistent/x.csv"), false, None).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/x.csv"));
    }

    #[test]
    fn standardize_two_points() {
        let x = DataMatrix::from_rows(&[vec![1.0], vec![3.0]]).unwrap();
        let s = standardize(&x);
        assert_eq!(s.values().column(0).as_slice(), &[-1.0, 1.0]);
    }

    #[test]
    fn standardize_constant_column_is_zero() {
        let x = DataMatrix::from_rows(&[vec![5.0, 1.0], vec![5.0, 2.0], vec![5.0, 4.0]]).unwrap();
        let s = standardize(&x);
        assert!(s.values().column(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn standardize_moments() {
        let x = DataMatrix::from_rows(&[vec![0.0], vec![0.0], vec![3.0]]).unwrap();
        let s = standardize(&x);
        let col: Vec<f64> = s.values().column(0).iter().copied().collect();
        let mean = col.iter().sum::<f64>() / 3.0;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 3.0;
        assert!(mean.abs() < 1e-12);
        assert!((var.sqrt() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn split_sizes() {
        let s = split_half(4, 7).unwrap();
        assert_eq!((s.train_indices.len(), s.test_indices.len()), (2, 2));
        assert_eq!(s, split_half(4, 7).unwrap());
        let s = split_half(5, 1).unwrap();
        assert_eq!((s.train_indices.len(), s.test_indices.len()), (3, 2));
    }

    #[test]
    fn split_seeds_differ() {
        let a = split_half(40, 1).unwrap();
        let b = split_half(40, 2).unwrap();
        assert_ne!(a.train_indices, b.train_indices);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn split_partitions(n in 2usize..=50, seed in any::<u64>()) {
                let s = split_half(n, seed).unwrap();
                let mut all: Vec<usize> = s.train_indices.iter().chain(&s.test_indices).copied().collect();
                all.sort_unstable();
                prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
                prop_assert_eq!(s.train_indices.len(), n.div_ceil(2));
            }

            #[test]
            fn standardize_idempotent(
                rows in proptest::collection::vec(proptest::collection::vec(-100.0f64..100.0, 3), 2..20)
            ) {
                let x = DataMatrix::from_rows(&rows).unwrap();
                let once = standardize(&x);
                let twice = standardize(&once);
                let diff = (once.values() - twice.values()).abs().max();
                prop_assert!(diff < 1e-10, "diff {}", diff);
            }
        }
    }
}
