//! CSV, JSON and SVG artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{HpwlError, Result};
use crate::eval::SweepResult;
use crate::solver::FeatureRanking;

/// Files written by one command. Unless [`OutputSet::commit`] is called,
/// dropping the set deletes everything it wrote.
#[derive(Debug, Default)]
pub struct OutputSet {
    dir: PathBuf,
    written: Vec<PathBuf>,
    committed: bool,
}

impl OutputSet {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| HpwlError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
            committed: false,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.path(name);
        self.written.push(path.clone());
        fs::write(&path, contents).map_err(|e| HpwlError::io(&path, e))?;
        Ok(path)
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn commit(mut self) -> Vec<PathBuf> {
        self.committed = true;
        std::mem::take(&mut self.written)
    }
}

impl Drop for OutputSet {
    fn drop(&mut self) {
        if !self.committed {
            for p in &self.written {
                let _ = fs::remove_file(p);
            }
        }
    }
}

fn csv_string<F>(header: &[&str], fill: F) -> Result<String>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> std::result::Result<(), csv::Error>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(out_err)?;
    fill(&mut w).map_err(out_err)?;
    let bytes = w.into_inner().map_err(|e| HpwlError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| HpwlError::Output(e.to_string()))
}

fn out_err(e: csv::Error) -> HpwlError {
    HpwlError::Output(e.to_string())
}

/// `rank,feature_index,feature_name,score`, ranks starting at 1.
pub fn ranking_csv(ranking: &FeatureRanking, name: impl Fn(usize) -> String) -> Result<String> {
    csv_string(&["rank", "feature_index", "feature_name", "score"], |w| {
        for (r, &j) in ranking.order.iter().enumerate() {
            w.write_record([
                (r + 1).to_string(),
                j.to_string(),
                name(j),
                ranking.scores[j].to_string(),
            ])?;
        }
        Ok(())
    })
}

/// `iteration,objective,err`, iterations starting at 1.
pub fn trace_csv(objective: &[f64], err: &[f64]) -> Result<String> {
    csv_string(&["iteration", "objective", "err"], |w| {
        for (i, (o, e)) in objective.iter().zip(err).enumerate() {
            w.write_record([(i + 1).to_string(), o.to_string(), e.to_string()])?;
        }
        Ok(())
    })
}

/// `variant,seed,feature_count,accuracy`
pub fn sweep_csv(results: &[SweepResult]) -> Result<String> {
    csv_string(&["variant", "seed", "feature_count", "accuracy"], |w| {
        for r in results {
            for (s, row) in r.seeds.iter().zip(&r.accuracies) {
                for (f, a) in r.feature_counts.iter().zip(row) {
                    w.write_record([
                        r.variant.name().to_string(),
                        s.to_string(),
                        f.to_string(),
                        a.to_string(),
                    ])?;
                }
            }
        }
        Ok(())
    })
}

/// A dense matrix as headerless CSV.
pub fn matrix_csv(m: &DMatrix<f64>) -> String {
    let mut s = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = m.row(i).iter().map(|v| v.to_string()).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

#[derive(Debug, Serialize)]
pub struct VariantSummary<'a> {
    pub variant: &'a str,
    pub seeds: &'a [u64],
    pub feature_counts: &'a [usize],
    pub mean: &'a [f64],
    pub std: &'a [f64],
    pub overall_mean: f64,
}

pub fn summarize(r: &SweepResult) -> VariantSummary<'_> {
    VariantSummary {
        variant: r.variant.name(),
        seeds: &r.seeds,
        feature_counts: &r.feature_counts,
        mean: &r.mean,
        std: &r.std,
        overall_mean: r.overall_mean(),
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| HpwlError::Output(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// Mean accuracy against feature count, one polyline per variant.
pub fn accuracy_svg(results: &[SweepResult]) -> String {
    let (w, h) = (640.0, 400.0);
    let (left, right, top, bottom) = (60.0, 150.0, 20.0, 50.0);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let max_f = results
        .iter()
        .flat_map(|r| r.feature_counts.iter().copied())
        .max()
        .unwrap_or(1) as f64;
    let min_f = results
        .iter()
        .flat_map(|r| r.feature_counts.iter().copied())
        .min()
        .unwrap_or(0) as f64;
    let span = (max_f - min_f).max(1.0);
    let sx = |f: f64| left + (f - min_f) / span * pw;
    let sy = |a: f64| top + (1.0 - a.clamp(0.0, 1.0)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<line x1="{left}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#,
        y0 = top + ph,
        x1 = left + pw
    );
    let _ = writeln!(
        s,
        r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{y0}" stroke="black"/>"#,
        y0 = top + ph
    );
    for tick in 0..=5 {
        let a = tick as f64 / 5.0;
        let y = sy(a);
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#dddddd"/><text x="{tx}" y="{ty:.2}" text-anchor="end">{a:.1}</text>"##,
            x1 = left + pw,
            tx = left - 6.0,
            ty = y + 4.0
        );
    }
    if let Some(r) = results.first() {
        for &f in &r.feature_counts {
            let x = sx(f as f64);
            let _ = writeln!(
                s,
                r#"<text x="{x:.2}" y="{y}" text-anchor="middle">{f}</text>"#,
                y = top + ph + 16.0
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{x:.2}" y="{y}" text-anchor="middle">number of features</text>"#,
        x = left + pw / 2.0,
        y = h - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{y:.2}" text-anchor="middle" transform="rotate(-90 16 {y:.2})">KNN accuracy</text>"#,
        y = top + ph / 2.0
    );
    for (i, r) in results.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = r
            .feature_counts
            .iter()
            .zip(&r.mean)
            .map(|(&f, &a)| format!("{:.2},{:.2}", sx(f as f64), sy(a)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = top + 10.0 + 18.0 * i as f64;
        let lx = left + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{lx2}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{tx}" y="{ty}">{name}</text>"#,
            lx2 = lx + 20.0,
            tx = lx + 26.0,
            ty = ly + 4.0,
            name = r.variant.name()
        );
    }
    s.push_str("</svg>\n");
    s
}
