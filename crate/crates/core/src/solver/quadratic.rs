//! Closed-form updates of the factors `P` (d × r) and `Q` (r × k).
//!
//! With `W` and the surrogate diagonal `B` frozen, the objective in `T = PQ` is
//!
//! ```text
//! tr(Tᵀ Cᵀ L C T) + τ ‖D½ X T − Z‖² + ρ tr(Tᵀ B T)
//!   = tr(Tᵀ M T) − 2τ tr(Tᵀ G) + const,
//! M = Cᵀ L C + τ Xᵀ D X + ρ B,   G = Xᵀ D½ Z,
//! ```
//!
//! so the minimizers are `P = τ M⁻¹ G Qᵀ(QQᵀ)⁻¹` and
//! `Q = τ (PᵀMP)⁻¹ Pᵀ G`. The reduced path never forms the `d × d` matrix
//! `M`: it works with `K = L_n + τD` (n × n), where `L_n` is the local
//! operator embedded at the centroid rows, and the identity
//! `M⁻¹Xᵀ = ρ⁻¹ B⁻¹ Xᵀ (ρ⁻¹ K X B⁻¹ Xᵀ + I)⁻¹`.

use nalgebra::DMatrix;

use crate::error::{HpwlError, Result};
use crate::hypergraph::extend_laplacian;
use crate::linalg::{lu_solve, scale_rows, spd_solve};

/// How to solve the `d × d` system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolvePath {
    /// Factorize `M` directly.
    Direct,
    /// Work with `n × n` matrices; requires `ρ > 0`.
    Reduced,
}

impl SolvePath {
    /// Reduced whenever there are more features than samples.
    pub fn auto(n: usize, d: usize) -> Self {
        if d > n {
            SolvePath::Reduced
        } else {
            SolvePath::Direct
        }
    }
}

/// Frozen pieces of the P/Q subproblems.
#[derive(Debug, Clone, Copy)]
pub struct QuadraticModel<'a> {
    /// `n × d` data.
    pub x: &'a DMatrix<f64>,
    pub centroid_indices: &'a [usize],
    /// Symmetric `m × m` local operator.
    pub local: &'a DMatrix<f64>,
    /// Point weights (diagonal of `D`).
    pub d_diag: &'a [f64],
    /// `n × k` global target.
    pub z_k: &'a DMatrix<f64>,
    pub b_diag: &'a [f64],
    pub tau: f64,
    pub rho: f64,
}

impl QuadraticModel<'_> {
    fn centroids(&self) -> DMatrix<f64> {
        self.x.select_rows(self.centroid_indices.iter())
    }

    fn sqrt_d(&self) -> Vec<f64> {
        self.d_diag.iter().map(|v| v.sqrt()).collect()
    }

    /// `G = Xᵀ D½ Z`
    pub fn rhs(&self) -> DMatrix<f64> {
        self.x.transpose() * scale_rows(self.z_k, &self.sqrt_d())
    }

    /// `M = CᵀLC + τXᵀDX + ρB`
    pub fn system_matrix(&self) -> DMatrix<f64> {
        let c = self.centroids();
        let mut m = c.transpose() * self.local * &c;
        m += self.x.transpose() * scale_rows(self.x, self.d_diag) * self.tau;
        for (i, b) in self.b_diag.iter().enumerate() {
            m[(i, i)] += self.rho * b;
        }
        m
    }

    /// `K = L_n + τD`
    fn kernel_n(&self) -> DMatrix<f64> {
        let n = self.x.nrows();
        let mut k = extend_laplacian(self.local, self.centroid_indices, n);
        for (i, dv) in self.d_diag.iter().enumerate() {
            k[(i, i)] += self.tau * dv;
        }
        k
    }

    fn check_reduced(&self) -> Result<()> {
        if self.rho > 0.0 {
            Ok(())
        } else {
            Err(HpwlError::NotPositiveDefinite(
                "the n × n path needs rho > 0 (M is singular when d > n and rho = 0)".into(),
            ))
        }
    }

    /// `P = τ M⁻¹ G Qᵀ(QQᵀ)⁻¹`
    pub fn update_p(&self, q: &DMatrix<f64>, path: SolvePath) -> Result<DMatrix<f64>> {
        let qqt = q * q.transpose();
        let chol = qqt.cholesky().ok_or_else(|| {
            HpwlError::RankDeficient("QQᵀ is singular; re-initialize Q with full row rank".into())
        })?;
        // Q⁺ = Qᵀ (QQᵀ)⁻¹
        let q_pinv = chol.solve(q).transpose();
        match path {
            SolvePath::Direct => {
                let sol = spd_solve(&self.system_matrix(), &self.rhs(), "M in the P update")?;
                Ok(sol * q_pinv * self.tau)
            }
            SolvePath::Reduced => {
                self.check_reduced()?;
                let n = self.x.nrows();
                let b_inv: Vec<f64> = self.b_diag.iter().map(|b| 1.0 / b).collect();
                let xt_binv = scale_rows(&self.x.transpose(), &b_inv); // B⁻¹Xᵀ, d × n
                let mut s = self.kernel_n() * (self.x * &xt_binv) / self.rho;
                for i in 0..n {
                    s[(i, i)] += 1.0;
                }
                let rhs = scale_rows(self.z_k, &self.sqrt_d()) * q_pinv;
                let inner = lu_solve(&s, &rhs, "the n × n system of the P update")?;
                Ok(xt_binv * inner * (self.tau / self.rho))
            }
        }
    }

    /// `Q = τ (PᵀMP)⁻¹ PᵀG`
    pub fn update_q(&self, p: &DMatrix<f64>, path: SolvePath) -> Result<DMatrix<f64>> {
        if (p.transpose() * p).cholesky().is_none() {
            return Err(HpwlError::RankDeficient(
                "PᵀP is singular; P lost column rank".into(),
            ));
        }
        let (pmp, ptg) = match path {
            SolvePath::Direct => {
                let mp = self.system_matrix() * p;
                (p.transpose() * mp, p.transpose() * self.rhs())
            }
            SolvePath::Reduced => {
                self.check_reduced()?;
                let xp = self.x * p;
                let bp = scale_rows(p, self.b_diag);
                let pmp = xp.transpose() * self.kernel_n() * &xp + p.transpose() * bp * self.rho;
                let ptg = xp.transpose() * scale_rows(self.z_k, &self.sqrt_d());
                (pmp, ptg)
            }
        };
        let pmp = (&pmp + pmp.transpose()) * 0.5;
        Ok(spd_solve(&pmp, &ptg, "PᵀMP in the Q update")? * self.tau)
    }

    /// Relative residual of `∂/∂P = 0`: `‖MPQQᵀ − τGQᵀ‖ / (‖MPQQᵀ‖ + ‖τGQᵀ‖)`.
    pub fn p_residual(&self, p: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
        let qqt = q * q.transpose();
        let lhs = self.system_matrix() * p * qqt;
        let rhs = self.rhs() * q.transpose() * self.tau;
        relative(&lhs, &rhs)
    }

    /// Relative residual of `∂/∂Q = 0`: `‖PᵀMPQ − τPᵀG‖ / (‖PᵀMPQ‖ + ‖τPᵀG‖)`.
    pub fn q_residual(&self, p: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
        let lhs = p.transpose() * self.system_matrix() * p * q;
        let rhs = p.transpose() * self.rhs() * self.tau;
        relative(&lhs, &rhs)
    }
}

fn relative(lhs: &DMatrix<f64>, rhs: &DMatrix<f64>) -> f64 {
    let scale = lhs.norm() + rhs.norm();
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).norm() / scale
    }
}

/// `b_i = 1 / (2 max(‖t_i‖, eps))`
pub fn refresh_b(t: &DMatrix<f64>, eps_b: f64) -> Vec<f64> {
    (0..t.nrows())
        .map(|i| 1.0 / (2.0 * t.row(i).norm().max(eps_b)))
        .collect()
}

/// `[I_r | 0]`
pub fn initial_q(r: usize, k: usize) -> DMatrix<f64> {
    DMatrix::identity(r, k)
}
