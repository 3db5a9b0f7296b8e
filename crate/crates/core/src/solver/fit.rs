use nalgebra::DMatrix;

use crate::clustering::{kmeans, snap_centroids, ClusterModel};
use crate::dataset::DataMatrix;
use crate::error::{HpwlError, Result};
use crate::hypergraph::{build_incidence, SoftHypergraph};
use crate::solver::embedding::{build_global_target, build_point_weights};
use crate::solver::params::{HpwlParams, ResolvedParams, Variant};
use crate::solver::problem::Problem;
use crate::solver::quadratic::{initial_q, refresh_b, SolvePath};
use crate::solver::weights::{omega, update_w, update_w_guarded};

/// Per-feature scores and the ranking they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRanking {
    /// Row norms of `T`.
    pub scores: Vec<f64>,
    /// Feature indices by descending score; ties keep the lower index first.
    pub order: Vec<usize>,
}

impl FeatureRanking {
    pub fn top(&self, count: usize) -> &[usize] {
        &self.order[..count.min(self.order.len())]
    }
}

pub fn feature_scores(t: &DMatrix<f64>) -> FeatureRanking {
    let scores: Vec<f64> = (0..t.nrows()).map(|i| t.row(i).norm()).collect();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    FeatureRanking { scores, order }
}

/// Iterates of the alternating scheme.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub p: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub b_diag: Vec<f64>,
    pub d_diag: Vec<f64>,
    pub z_k: DMatrix<f64>,
    pub hypergraph: SoftHypergraph,
    /// Objective with the exact ℓ2,1 norm, recorded after each outer iteration.
    pub objective_trace: Vec<f64>,
    /// Outer iterations performed.
    pub iteration: usize,
}

impl SolverState {
    pub fn transform(&self) -> DMatrix<f64> {
        &self.p * &self.q
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub state: SolverState,
    /// `‖T⁽ⁱ⁾ − T⁽ⁱ⁻¹⁾‖² / (d k)` per outer iteration, with `T⁽⁰⁾ = 0`.
    pub err_trace: Vec<f64>,
    /// For each outer iteration, `Ψ + τΥ + ρ‖T‖_{2,1}` at the entry point
    /// (from the second outer iteration on) and after every P/Q/B sweep.
    pub inner_traces: Vec<Vec<f64>>,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct FitOutput {
    pub ranking: FeatureRanking,
    pub trajectory: Trajectory,
    pub clusters: ClusterModel,
    pub params: ResolvedParams,
    pub solve_path: SolvePath,
}

impl FitOutput {
    pub fn objective_trace(&self) -> &[f64] {
        &self.trajectory.state.objective_trace
    }

    pub fn err_trace(&self) -> &[f64] {
        &self.trajectory.err_trace
    }

    pub fn transform(&self) -> DMatrix<f64> {
        self.trajectory.state.transform()
    }
}

/// Builds the centroid hypergraph, point weights and global target for `x`.
pub fn prepare(
    x: &DataMatrix,
    rp: &ResolvedParams,
    seed: u64,
) -> Result<(Problem, SoftHypergraph, ClusterModel)> {
    let clusters = match rp.variant {
        Variant::IdentityD => ClusterModel::all_points(x),
        _ => {
            let km = kmeans(x, rp.centroids, seed, rp.kmeans_max_iter)?;
            snap_centroids(x, &km)
        }
    };
    let m = clusters.m();
    if m < 2 {
        return Err(HpwlError::Construction(format!(
            "only {m} distinct centroid(s); the data needs more distinct rows"
        )));
    }
    let mut hypergraph = build_incidence(&clusters.centroids, rp.neighbors.min(m - 1))?;
    if rp.variant == Variant::BinaryH {
        hypergraph = hypergraph.binarized()?;
    }
    let d_diag = match rp.variant {
        Variant::IdentityD => vec![1.0; x.n()],
        _ => build_point_weights(x.values(), &clusters, hypergraph.sigma),
    };
    let tau = if rp.variant == Variant::NoGlobal { 0.0 } else { rp.tau };
    let z_k = build_global_target(x.values(), &d_diag, rp.embed_dim)?;
    let problem = Problem {
        x: x.values().clone(),
        centroid_indices: clusters.centroid_indices.clone(),
        d_diag,
        z_k,
        tau,
        rho: rp.rho,
        kappa: rp.kappa,
        form: rp.laplacian,
    };
    Ok((problem, hypergraph, clusters))
}

/// Ranks the columns of `x`. Labels, if any, are ignored.
pub fn fit(x: &DataMatrix, params: &HpwlParams, seed: u64) -> Result<FitOutput> {
    let rp = params.resolve(x.n(), x.d())?;
    let (problem, hypergraph, clusters) = prepare(x, &rp, seed)?;
    let path = SolvePath::auto(x.n(), x.d());
    log::info!(
        "fit: n={} d={} m={} k={} r={} path={:?} variant={}",
        x.n(),
        x.d(),
        clusters.m(),
        rp.embed_dim,
        rp.rank,
        path,
        rp.variant
    );
    let trajectory = solve(&problem, hypergraph, &rp, path)?;
    Ok(FitOutput {
        ranking: feature_scores(&trajectory.state.transform()),
        trajectory,
        clusters,
        params: rp,
        solve_path: path,
    })
}

fn divergence(iteration: usize, what: &str, trace: &[f64]) -> HpwlError {
    let tail: Vec<String> = trace.iter().rev().take(5).rev().map(|v| format!("{v:.6e}")).collect();
    HpwlError::Divergence {
        iteration,
        detail: format!("{what} is not finite; last objective values [{}]", tail.join(", ")),
    }
}

/// Alternating minimization from `Q = [I | 0]`, `B = I/2` and the weights
/// already stored in `hypergraph`.
pub fn solve(
    problem: &Problem,
    mut hypergraph: SoftHypergraph,
    rp: &ResolvedParams,
    path: SolvePath,
) -> Result<Trajectory> {
    let (d, k, r) = (problem.d(), problem.z_k.ncols(), rp.rank);
    let mut q = initial_q(r, k);
    let mut p = DMatrix::<f64>::zeros(d, r);
    let mut b = vec![0.5; d];
    let mut objective_trace = Vec::new();
    let mut err_trace = Vec::new();
    let mut inner_traces = Vec::new();

    if problem.tau == 0.0 {
        // Every remaining term is a PSD form in T: the minimizer is T = 0.
        let t = DMatrix::zeros(d, k);
        let terms = problem.objective(&hypergraph, &t, &b)?;
        objective_trace.push(terms.total_l21());
        err_trace.push(0.0);
        inner_traces.push(vec![terms.descent_value()]);
        return Ok(Trajectory {
            state: SolverState {
                p,
                q,
                b_diag: b,
                d_diag: problem.d_diag.clone(),
                z_k: problem.z_k.clone(),
                hypergraph,
                objective_trace,
                iteration: 1,
            },
            err_trace,
            inner_traces,
            converged: true,
        });
    }

    let centroids = problem.centroids();
    let mut t_prev = DMatrix::<f64>::zeros(d, k);
    let mut converged = false;
    let mut iteration = 0;
    for outer in 1..=rp.outer_max {
        iteration = outer;
        let local = problem.update_operator(&hypergraph)?;
        let mut inner = Vec::new();
        if outer > 1 {
            inner.push(problem.objective(&hypergraph, &t_prev, &b)?.descent_value());
        }
        let mut t = t_prev.clone();
        for _ in 0..rp.inner_max {
            let model = problem.quadratic(&local, &b);
            p = model.update_p(&q, path)?;
            q = model.update_q(&p, path)?;
            let t_new = &p * &q;
            b = refresh_b(&t_new, rp.eps_b);
            let value = problem.objective(&hypergraph, &t_new, &b)?.descent_value();
            inner.push(value);
            if !value.is_finite() {
                return Err(divergence(outer, "inner objective", &inner));
            }
            let base = t.norm();
            let change = (&t_new - &t).norm();
            t = t_new;
            if base > 0.0 && change <= rp.tol * base {
                break;
            }
        }
        inner_traces.push(inner);

        let y = &centroids * &t;
        let w = if rp.guard_weights {
            let (w, stats) = update_w_guarded(&hypergraph, &y, problem.form, problem.kappa);
            log::debug!(
                "weight pass: {} pairs, {} shortened, {} rejected",
                stats.pairs,
                stats.shortened,
                stats.rejected
            );
            w
        } else {
            let om = omega(&hypergraph, &y, problem.form);
            update_w(&hypergraph.weights, &om, problem.kappa)
        };
        hypergraph.set_weights(w);

        let value = problem.objective(&hypergraph, &t, &b)?.total_l21();
        objective_trace.push(value);
        if !value.is_finite() {
            return Err(divergence(outer, "objective", &objective_trace));
        }
        let err = (&t - &t_prev).norm_squared() / (d * k) as f64;
        err_trace.push(err);
        log::debug!("outer {outer}: objective {value:.6e} err {err:.3e}");
        t_prev = t;
        if outer >= 2 && err < rp.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("no convergence after {} outer iterations", rp.outer_max);
    }

    Ok(Trajectory {
        state: SolverState {
            p,
            q,
            b_diag: b,
            d_diag: problem.d_diag.clone(),
            z_k: problem.z_k.clone(),
            hypergraph,
            objective_trace,
            iteration,
        },
        err_trace,
        inner_traces,
        converged,
    })
}
