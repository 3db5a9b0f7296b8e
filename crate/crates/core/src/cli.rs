//! `hpwl` command line: `select`, `trace`, `sweep`, `ablate`.
//!
//! Settings come from an optional JSON file (`--config`) and are then
//! overridden by flags.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::dataset::{load_csv, standardize, DataMatrix};
use crate::error::{HpwlError, Result};
use crate::eval::{grid_search, run_sweep, Grid, SweepOptions, SweepResult, Variant};
use crate::report::{self, OutputSet};
use crate::solver::{fit, FitOutput, HpwlParams, LaplacianForm};

#[derive(Debug, Parser)]
#[command(name = "hpwl", version, about = "Unsupervised feature ranking with a soft centroid hypergraph")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank the features of a CSV file (writes ranking.csv and trace.csv).
    Select(CommonArgs),
    /// Fit once and write the convergence series (trace.csv).
    Trace(CommonArgs),
    /// 50/50 split KNN evaluation over feature counts.
    Sweep(CommonArgs),
    /// The evaluation for the full selector and its ablations.
    Ablate(CommonArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormArg {
    Pairwise,
    RandomWalk,
}

impl From<FormArg> for LaplacianForm {
    fn from(f: FormArg) -> Self {
        match f {
            FormArg::Pairwise => LaplacianForm::Pairwise,
            FormArg::RandomWalk => LaplacianForm::RandomWalk,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Input CSV (numeric, comma separated).
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// JSON config; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Label column, by header name or 0-based index.
    #[arg(long)]
    pub label_column: Option<String>,
    /// The CSV has no header row.
    #[arg(long)]
    pub no_header: bool,
    /// Use raw feature values.
    #[arg(long)]
    pub no_standardize: bool,
    /// Output directory.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Rank bound of the transform.
    #[arg(long)]
    pub rank: Option<usize>,
    /// Embedding dimension.
    #[arg(long)]
    pub embed_dim: Option<usize>,
    /// Neighbors per hyperedge.
    #[arg(long)]
    pub neighbors: Option<usize>,
    /// Number of k-means centroids.
    #[arg(long)]
    pub centroids: Option<usize>,
    #[arg(long)]
    pub outer_max: Option<usize>,
    #[arg(long)]
    pub inner_max: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum)]
    pub laplacian: Option<FormArg>,
    /// full, identity_d, binary_h or no_global.
    #[arg(long)]
    pub variant: Option<String>,
    /// Seed for `select`/`trace`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated split seeds for `sweep`/`ablate`.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Comma-separated feature counts.
    #[arg(long, value_delimiter = ',')]
    pub feature_counts: Option<Vec<usize>>,
    /// Neighbors of the KNN classifier.
    #[arg(long)]
    pub knn_k: Option<usize>,
    /// Skip accuracy_vs_features.svg.
    #[arg(long)]
    pub no_svg: bool,
    /// Pick tau, kappa and rho by grid search before sweeping.
    #[arg(long)]
    pub grid: bool,
    /// Also write the hypergraph (incidence, weights, Laplacian) as CSV.
    #[arg(long)]
    pub dump_hypergraph: bool,
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<PathBuf>,
    pub label_column: Option<String>,
    pub has_header: Option<bool>,
    pub standardize: Option<bool>,
    pub output_dir: Option<PathBuf>,
    pub params: Option<HpwlParams>,
    pub variant: Option<Variant>,
    pub seed: Option<u64>,
    pub seeds: Option<Vec<u64>>,
    pub feature_counts: Option<Vec<usize>>,
    pub knn_k: Option<usize>,
    pub emit_svg: Option<bool>,
    pub grid: Option<Grid>,
}

/// Settings after merging the config file and the flags.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub input: PathBuf,
    pub label_column: Option<String>,
    pub has_header: bool,
    pub standardize: bool,
    pub output_dir: PathBuf,
    pub params: HpwlParams,
    pub variant: Variant,
    pub seed: u64,
    pub seeds: Vec<u64>,
    pub sweep: SweepOptions,
    pub emit_svg: bool,
    pub grid: Option<Grid>,
    pub dump_hypergraph: bool,
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self> {
        let file: FileConfig = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| HpwlError::io(path, e))?;
                serde_json::from_str(&text)
                    .map_err(|e| HpwlError::Config(format!("{}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let input = args
            .input
            .clone()
            .or(file.input)
            .ok_or_else(|| HpwlError::Config("no input file (use --input or \"input\" in the config)".into()))?;
        let mut params = file.params.unwrap_or_default();
        macro_rules! set {
            ($field:ident) => {
                if let Some(v) = args.$field {
                    params.$field = v;
                }
            };
            (opt $field:ident) => {
                if let Some(v) = args.$field {
                    params.$field = Some(v);
                }
            };
        }
        set!(tau);
        set!(rho);
        set!(kappa);
        set!(neighbors);
        set!(outer_max);
        set!(inner_max);
        set!(tol);
        set!(opt rank);
        set!(opt embed_dim);
        set!(opt centroids);
        if let Some(f) = args.laplacian {
            params.laplacian = f.into();
        }
        let variant = match &args.variant {
            Some(s) => s.parse()?,
            None => file.variant.unwrap_or(params.variant),
        };
        params.variant = variant;

        let defaults = SweepOptions::default();
        let sweep = SweepOptions {
            knn_k: args.knn_k.or(file.knn_k).unwrap_or(defaults.knn_k),
            feature_counts: args
                .feature_counts
                .clone()
                .or(file.feature_counts)
                .unwrap_or(defaults.feature_counts),
            standardize: !args.no_standardize && file.standardize.unwrap_or(true),
        };
        if sweep.knn_k == 0 {
            return Err(HpwlError::Config("knn_k must be >= 1".into()));
        }
        let seeds = args.seeds.clone().or(file.seeds).unwrap_or_else(|| (0..5).collect());
        if seeds.is_empty() {
            return Err(HpwlError::Config("at least one seed is required".into()));
        }
        let grid = if args.grid {
            Some(file.grid.unwrap_or_default())
        } else {
            file.grid
        };
        Ok(Self {
            input,
            label_column: args.label_column.clone().or(file.label_column),
            has_header: !args.no_header && file.has_header.unwrap_or(true),
            standardize: sweep.standardize,
            output_dir: args
                .out
                .clone()
                .or(file.output_dir)
                .unwrap_or_else(|| PathBuf::from("hpwl-out")),
            params,
            variant,
            seed: args.seed.or(file.seed).unwrap_or(0),
            seeds,
            sweep,
            emit_svg: !args.no_svg && file.emit_svg.unwrap_or(true),
            grid,
            dump_hypergraph: args.dump_hypergraph,
        })
    }

    fn load(&self) -> Result<DataMatrix> {
        load_csv(&self.input, self.has_header, self.label_column.as_deref())
    }
}

/// Runs a parsed command line and returns the files it wrote.
pub fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    match cli.command {
        Command::Select(a) => cmd_select(&RunConfig::resolve(&a)?, true),
        Command::Trace(a) => cmd_select(&RunConfig::resolve(&a)?, false),
        Command::Sweep(a) => cmd_sweep(&RunConfig::resolve(&a)?, false),
        Command::Ablate(a) => cmd_sweep(&RunConfig::resolve(&a)?, true),
    }
}

fn fit_metadata(out: &FitOutput) -> serde_json::Value {
    serde_json::json!({
        "params": out.params,
        "centroids": out.clusters.centroid_indices.len(),
        "outer_iterations": out.trajectory.state.iteration,
        "converged": out.trajectory.converged,
        "solve_path": format!("{:?}", out.solve_path),
    })
}

/// `select` writes the ranking and the trace; `trace` only the trace.
pub fn cmd_select(cfg: &RunConfig, with_ranking: bool) -> Result<Vec<PathBuf>> {
    let data = cfg.load()?.without_labels();
    let x = if cfg.standardize { standardize(&data) } else { data };
    let out = fit(&x, &cfg.params, cfg.seed)?;
    let mut files = OutputSet::new(&cfg.output_dir)?;
    if with_ranking {
        let csv = report::ranking_csv(&out.ranking, |j| x.feature_name(j))?;
        files.write("ranking.csv", &csv)?;
        files.write("fit.json", &report::to_json(&fit_metadata(&out))?)?;
    }
    files.write("trace.csv", &report::trace_csv(out.objective_trace(), out.err_trace())?)?;
    if cfg.dump_hypergraph {
        let h = &out.trajectory.state.hypergraph;
        files.write("hypergraph_incidence.csv", &report::matrix_csv(&h.incidence))?;
        let w = nalgebra::DMatrix::from_column_slice(h.weights.len(), 1, &h.weights);
        files.write("hypergraph_weights.csv", &report::matrix_csv(&w))?;
        files.write("hypergraph_laplacian.csv", &report::matrix_csv(&h.laplacian()?))?;
    }
    Ok(files.commit())
}

/// Single-variant sweep, or the full selector plus ablations.
pub fn cmd_sweep(cfg: &RunConfig, ablate: bool) -> Result<Vec<PathBuf>> {
    let x = cfg.load()?;
    if x.labels().is_none() {
        return Err(HpwlError::Config(format!(
            "{} has no labels; pass --label-column",
            cfg.input.display()
        )));
    }
    let mut files = OutputSet::new(&cfg.output_dir)?;
    let mut params = cfg.params.clone();
    let mut grid_json = None;
    if let Some(grid) = &cfg.grid {
        let base = HpwlParams { variant: Variant::Full, ..params.clone() };
        let g = grid_search(&x, &base, grid, &cfg.seeds, &cfg.sweep)?;
        params = g.best_params(&params);
        grid_json = Some(g);
    }
    let variants: Vec<Variant> = if ablate {
        if cfg.variant == Variant::Full {
            Variant::ALL.to_vec()
        } else {
            vec![Variant::Full, cfg.variant]
        }
    } else {
        vec![cfg.variant]
    };
    let results: Vec<SweepResult> = variants
        .iter()
        .map(|&v| run_sweep(&x, &params, v, &cfg.seeds, &cfg.sweep))
        .collect::<Result<_>>()?;

    files.write("sweep.csv", &report::sweep_csv(&results)?)?;
    let summary = serde_json::json!({
        "input": cfg.input,
        "params": params,
        "knn_k": cfg.sweep.knn_k,
        "standardize": cfg.sweep.standardize,
        "grid": grid_json,
        "variants": results.iter().map(report::summarize).collect::<Vec<_>>(),
    });
    files.write("summary.json", &report::to_json(&summary)?)?;
    if cfg.emit_svg {
        files.write("accuracy_vs_features.svg", &report::accuracy_svg(&results))?;
    }
    Ok(files.commit())
}

/// Formats an error as a single line.
pub fn diagnose(err: &HpwlError) -> String {
    let mut s = err.to_string();
    let mut src = std::error::Error::source(err);
    while let Some(e) = src {
        let t = e.to_string();
        if !s.contains(&t) {
            s.push_str(": ");
            s.push_str(&t);
        }
        src = e.source();
    }
    s.replace('\n', " ")
}

/// Convenience for tests and scripts.
pub fn parse_and_run<I, S>(args: I) -> Result<Vec<PathBuf>>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| HpwlError::Argument(e.to_string()))?;
    run(cli)
}

pub fn file_names(paths: &[PathBuf]) -> Vec<String> {
    paths
        .iter()
        .filter_map(|p| Path::new(p).file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("c.json");
        fs::write(
            &cfg_path,
            r#"{"input": "a.csv", "params": {"tau": 5.0, "rho": 2.0}, "seeds": [9], "variant": "binary_h"}"#,
        )
        .unwrap();
        let args = CommonArgs {
            config: Some(cfg_path),
            tau: Some(0.5),
            ..Default::default()
        };
        let rc = RunConfig::resolve(&args).unwrap();
        assert_eq!(rc.params.tau, 0.5);
        assert_eq!(rc.params.rho, 2.0);
        assert_eq!(rc.seeds, vec![9]);
        assert_eq!(rc.variant, Variant::BinaryH);
        assert_eq!(rc.input, PathBuf::from("a.csv"));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("c.json");
        fs::write(&cfg_path, r#"{"input": "a.csv", "tua": 1}"#).unwrap();
        let args = CommonArgs { config: Some(cfg_path), ..Default::default() };
        assert!(matches!(RunConfig::resolve(&args), Err(HpwlError::Config(_))));
    }

    #[test]
    fn missing_input_is_a_config_error() {
        assert!(matches!(
            RunConfig::resolve(&CommonArgs::default()),
            Err(HpwlError::Config(_))
        ));
    }
}
