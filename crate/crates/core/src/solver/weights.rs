//! Hyperedge-weight step: coordinate descent over consecutive pairs on the
//! simplex, minimizing `Σ_e W_e Ω_e + κ‖W‖²` with the vertex degrees frozen.

use nalgebra::DMatrix;

use crate::hypergraph::SoftHypergraph;
use crate::solver::params::LaplacianForm;

/// Per-hyperedge coefficients `Ω_e` for the embedded centroids `y = C T`
/// (`m × k`).
///
/// * `Pairwise`: `Ω_e = Σ_ij h_ie h_je ‖y_i − y_j‖² / (2 d_i δ_e)`, the exact
///   derivative of the local term in `W_e` with `D_v` held fixed.
/// * `RandomWalk`: `Ω_e = Σ_j R_je S_ej` with `R = Yᵀ D_v⁻¹ H`,
///   `S = D_e⁻¹ Hᵀ Y`.
pub fn omega(h: &SoftHypergraph, y: &DMatrix<f64>, form: LaplacianForm) -> Vec<f64> {
    let inv_dv = h.inverse_vertex_degrees();
    let inc = &h.incidence;
    let m = inc.nrows();
    (0..inc.ncols())
        .map(|e| {
            let delta = h.edge_degrees[e];
            // u = Σ_i h_ie y_i / d_i, v = Σ_j h_je y_j
            let mut u = nalgebra::RowDVector::<f64>::zeros(y.ncols());
            let mut v = nalgebra::RowDVector::<f64>::zeros(y.ncols());
            let (mut a, mut p, mut q) = (0.0, 0.0, 0.0);
            for i in 0..m {
                let hie = inc[(i, e)];
                if hie == 0.0 {
                    continue;
                }
                let yi = y.row(i);
                let sq = yi.norm_squared();
                u += yi * (hie * inv_dv[i]);
                v += yi * hie;
                a += hie * inv_dv[i];
                p += hie * inv_dv[i] * sq;
                q += hie * sq;
            }
            let cross = u.dot(&v);
            match form {
                LaplacianForm::RandomWalk => cross / delta,
                LaplacianForm::Pairwise => (p * delta + a * q - 2.0 * cross) / (2.0 * delta),
            }
        })
        .collect()
}

/// Minimizer of `w_i Ω_i + w_j Ω_j + κ(w_i² + w_j²)` subject to
/// `w_i + w_j = c`, `w_i, w_j ≥ 0`.
pub fn pair_update(omega_i: f64, omega_j: f64, kappa: f64, c: f64) -> (f64, f64) {
    let gap = omega_i - omega_j;
    if 2.0 * kappa * c <= gap {
        (0.0, c)
    } else if 2.0 * kappa * c <= -gap {
        (c, 0.0)
    } else {
        let wi = ((2.0 * kappa * c - gap) / (4.0 * kappa)).clamp(0.0, c);
        (wi, c - wi)
    }
}

/// One pass over pairs `(i, i + 1)`, `i = 0..m − 1`, each using the weights
/// already updated earlier in the pass.
pub fn update_w(weights: &[f64], omega: &[f64], kappa: f64) -> Vec<f64> {
    let mut w = weights.to_vec();
    for i in 0..w.len().saturating_sub(1) {
        let c = w[i] + w[i + 1];
        let (a, b) = pair_update(omega[i], omega[i + 1], kappa, c);
        w[i] = a;
        w[i + 1] = b;
    }
    w
}

/// The local term as an exact function of `W` (vertex degrees included) for
/// fixed embedded centroids:
///
/// `local(W) = c₀ + s Σ_i (Σ_e h_ie W_e g_ie) / (Σ_e h_ie W_e)`
///
/// with `s = ½`, `g_ie = Σ_j h_je ‖y_i − y_j‖² / δ_e` for the pairwise form
/// and `c₀ = ‖Y‖²`, `s = −1`, `g_ie = y_i · Σ_j h_je y_j / δ_e` for the
/// random-walk form. Vertices of zero degree contribute nothing.
#[derive(Debug, Clone)]
pub struct LocalInWeights {
    /// `h_ie g_ie`
    numer: DMatrix<f64>,
    incidence: DMatrix<f64>,
    constant: f64,
    sign: f64,
}

impl LocalInWeights {
    pub fn new(h: &SoftHypergraph, y: &DMatrix<f64>, form: LaplacianForm) -> Self {
        let inc = &h.incidence;
        let m = inc.nrows();
        let mut numer = DMatrix::zeros(m, inc.ncols());
        for e in 0..inc.ncols() {
            let delta = h.edge_degrees[e];
            let v = (0..m).fold(nalgebra::RowDVector::<f64>::zeros(y.ncols()), |acc, j| {
                acc + y.row(j) * inc[(j, e)]
            });
            for i in 0..m {
                let hie = inc[(i, e)];
                if hie == 0.0 {
                    continue;
                }
                let g = match form {
                    LaplacianForm::Pairwise => {
                        (0..m)
                            .map(|j| inc[(j, e)] * (y.row(i) - y.row(j)).norm_squared())
                            .sum::<f64>()
                            / delta
                    }
                    LaplacianForm::RandomWalk => y.row(i).dot(&v) / delta,
                };
                numer[(i, e)] = hie * g;
            }
        }
        let (constant, sign) = match form {
            LaplacianForm::Pairwise => (0.0, 0.5),
            LaplacianForm::RandomWalk => (y.norm_squared(), -1.0),
        };
        Self {
            numer,
            incidence: inc.clone(),
            constant,
            sign,
        }
    }

    pub fn eval(&self, w: &[f64]) -> f64 {
        let mut total = 0.0;
        for i in 0..self.numer.nrows() {
            let (mut num, mut den) = (0.0, 0.0);
            for (e, we) in w.iter().enumerate() {
                num += self.numer[(i, e)] * we;
                den += self.incidence[(i, e)] * we;
            }
            if den > 0.0 {
                total += num / den;
            }
        }
        self.constant + self.sign * total
    }
}

/// Counters from one weight pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WeightPassStats {
    pub pairs: usize,
    /// Pair updates accepted after at least one halving.
    pub shortened: usize,
    /// Pair updates rolled back entirely.
    pub rejected: usize,
}

const MAX_HALVINGS: usize = 30;

/// [`update_w`] with a monotone guard: each pair move toward the closed-form
/// minimizer is halved until `local(W) + κ‖W‖²` (with the vertex degrees
/// recomputed) does not increase, and dropped if no step qualifies.
pub fn update_w_guarded(
    h: &SoftHypergraph,
    y: &DMatrix<f64>,
    form: LaplacianForm,
    kappa: f64,
) -> (Vec<f64>, WeightPassStats) {
    let om = omega(h, y, form);
    let exact = LocalInWeights::new(h, y, form);
    let value = |w: &[f64]| exact.eval(w) + kappa * w.iter().map(|v| v * v).sum::<f64>();
    let mut w = h.weights.clone();
    let mut current = value(&w);
    let mut stats = WeightPassStats::default();
    for i in 0..w.len().saturating_sub(1) {
        stats.pairs += 1;
        let (old_i, old_j) = (w[i], w[i + 1]);
        let c = old_i + old_j;
        let (target, _) = pair_update(om[i], om[i + 1], kappa, c);
        if target == old_i {
            continue;
        }
        let mut step = 1.0;
        let mut accepted = false;
        for halving in 0..MAX_HALVINGS {
            let wi = if halving == 0 {
                target
            } else {
                (old_i + step * (target - old_i)).clamp(0.0, c)
            };
            w[i] = wi;
            w[i + 1] = c - wi;
            let v = value(&w);
            if v <= current {
                current = v;
                accepted = true;
                if halving > 0 {
                    stats.shortened += 1;
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            w[i] = old_i;
            w[i + 1] = old_j;
            stats.rejected += 1;
        }
    }
    (w, stats)
}

/// `Ω·W + κ‖W‖²`
pub fn weight_objective(weights: &[f64], omega: &[f64], kappa: f64) -> f64 {
    weights
        .iter()
        .zip(omega)
        .map(|(w, o)| w * o + kappa * w * w)
        .sum()
}
