//! Dense conic solver for problems with one PSD block and one nonnegative block.
//!
//! Problems are stated in primal standard form
//!
//! ```text
//! minimize   ⟨c, x⟩
//! subject to ⟨a_i, x⟩ (= or ≤) b_i,   x = (svec X, x_lp),  X ⪰ 0,  x_lp ≥ 0
//! ```
//!
//! with the symmetric block vectorised by [`svec`](crate::linalg::svec), so off-diagonal
//! coordinates carry a factor `√2`. The dual is `maximize b'y` subject to
//! `S = C − Σ y_i A_i ⪰ 0`, `s_lp ≥ 0`, and `y_i ≤ 0` on `≤` rows.
//!
//! The solver is an infeasible primal-dual interior-point method with the HKM
//! search direction and Mehrotra's predictor-corrector. All sums are taken in
//! row order, then entry order, so results are bit-reproducible.

mod ipm;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{smat, svec_len, Matrix};
use crate::num::abs;

pub use ipm::solve_with;

/// Solver identifier recorded in solution metadata.
pub const METHOD: &str = "primal-dual interior point (HKM, Mehrotra predictor-corrector)";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Sense {
    Eq,
    Le,
}

/// One constraint row: sparse coefficients on `svec X` and on the LP block.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConeRow {
    pub psd: Vec<(usize, f64)>,
    pub lp: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConeProblem {
    pub psd_dim: usize,
    pub lp_dim: usize,
    pub c_psd: Vec<f64>,
    pub c_lp: Vec<f64>,
    pub rows: Vec<ConeRow>,
    pub senses: Vec<Sense>,
    pub rhs: Vec<f64>,
}

impl ConeProblem {
    pub fn new(psd_dim: usize, lp_dim: usize) -> Self {
        Self {
            psd_dim,
            lp_dim,
            c_psd: vec![0.0; svec_len(psd_dim)],
            c_lp: vec![0.0; lp_dim],
            rows: Vec::new(),
            senses: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn push(&mut self, row: ConeRow, sense: Sense, rhs: f64) {
        self.rows.push(row);
        self.senses.push(sense);
        self.rhs.push(rhs);
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Structural checks: index ranges, lengths and finiteness.
    pub fn check(&self) -> crate::Result<()> {
        use crate::Error;
        let nv = svec_len(self.psd_dim);
        if self.c_psd.len() != nv {
            return Err(Error::DimensionMismatch {
                what: "psd objective",
                expected: nv,
                got: self.c_psd.len(),
            });
        }
        if self.c_lp.len() != self.lp_dim {
            return Err(Error::DimensionMismatch {
                what: "lp objective",
                expected: self.lp_dim,
                got: self.c_lp.len(),
            });
        }
        if self.senses.len() != self.rows.len() || self.rhs.len() != self.rows.len() {
            return Err(Error::DimensionMismatch {
                what: "constraint senses/rhs",
                expected: self.rows.len(),
                got: self.senses.len().min(self.rhs.len()),
            });
        }
        for row in &self.rows {
            if let Some(&(k, _)) = row.psd.iter().find(|(k, _)| *k >= nv) {
                return Err(Error::DimensionMismatch {
                    what: "psd row index",
                    expected: nv,
                    got: k,
                });
            }
            if let Some(&(k, _)) = row.lp.iter().find(|(k, _)| *k >= self.lp_dim) {
                return Err(Error::DimensionMismatch {
                    what: "lp row index",
                    expected: self.lp_dim,
                    got: k,
                });
            }
            if row.psd.iter().chain(&row.lp).any(|(_, v)| !v.is_finite()) {
                return Err(Error::NonFinite("constraint row"));
            }
        }
        if self
            .c_psd
            .iter()
            .chain(&self.c_lp)
            .chain(&self.rhs)
            .any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite("objective or rhs"));
        }
        Ok(())
    }

    /// `⟨a_i, x⟩` for every row.
    pub fn apply(&self, x_psd: &[f64], x_lp: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| {
                r.psd.iter().map(|&(k, v)| v * x_psd[k]).sum::<f64>()
                    + r.lp.iter().map(|&(k, v)| v * x_lp[k]).sum::<f64>()
            })
            .collect()
    }

    /// Dual slack `c − Σ y_i a_i`, split into its PSD and LP parts.
    pub fn dual_slack(&self, y: &[f64]) -> (Matrix, Vec<f64>) {
        let mut s = self.c_psd.clone();
        let mut sl = self.c_lp.clone();
        for (row, &yi) in self.rows.iter().zip(y) {
            for &(k, v) in &row.psd {
                s[k] -= yi * v;
            }
            for &(k, v) in &row.lp {
                sl[k] -= yi * v;
            }
        }
        (smat(self.psd_dim, &s), sl)
    }

    /// Multiplies the objective by `alpha`.
    pub fn scale_objective(&mut self, alpha: f64) {
        for v in self.c_psd.iter_mut().chain(self.c_lp.iter_mut()) {
            *v *= alpha;
        }
    }

    /// Multiplies every right-hand side by `alpha`.
    pub fn scale_rhs(&mut self, alpha: f64) {
        for v in &mut self.rhs {
            *v *= alpha;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 150,
            step_fraction: 0.98,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    /// Step lengths collapsed before the tolerance was met.
    Stalled,
    InfeasibleSuspected,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub status: SolveStatus,
    /// PSD block of the primal variable.
    pub x: Matrix,
    /// Nonnegative block of the primal variable.
    pub x_lp: Vec<f64>,
    pub y: Vec<f64>,
    /// Dual slack `S = C − Σ y_i A_i`.
    pub s: Matrix,
    pub s_lp: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub residuals: Residuals,
    pub iterations: usize,
    pub method: &'static str,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Optimal, or close enough that every residual is below `tol`.
    pub fn is_acceptable(&self, tol: f64) -> bool {
        self.is_optimal()
            || (self.status != SolveStatus::InfeasibleSuspected && self.residuals.max() <= tol)
    }
}

/// Solves with default options and the given tolerance and iteration cap.
pub fn solve(problem: &ConeProblem, tol: f64, max_iter: usize) -> crate::Result<SdpSolution> {
    solve_with(
        problem,
        &SolverOptions {
            tol,
            max_iter,
            ..SolverOptions::default()
        },
    )
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CertCheck {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CertReport {
    pub checks: Vec<CertCheck>,
    pub primal_objective: f64,
    pub dual_objective: f64,
}

impl CertReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CertCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Recomputes feasibility of both the primal and the dual point from the raw
/// problem data.
///
/// Residuals are relative: primal rows against `1 + ‖b‖∞`, the dual slack
/// against `1 + ‖c‖∞`, the gap against `1 + |p| + |d|`.
pub fn certify(problem: &ConeProblem, sol: &SdpSolution, tol: f64) -> CertReport {
    let mut checks = Vec::new();
    let mut push = |name: &str, value: f64, limit: f64| {
        checks.push(CertCheck {
            name: String::from(name),
            value,
            limit,
            passed: value <= limit && value.is_finite(),
        });
    };

    let xv = crate::linalg::svec(&sol.x);
    let ax = problem.apply(&xv, &sol.x_lp);
    let bnorm = problem.rhs.iter().fold(0.0f64, |m, v| m.max(abs(*v)));
    let mut primal_viol: f64 = 0.0;
    for ((a, b), sense) in ax.iter().zip(&problem.rhs).zip(&problem.senses) {
        let v = match sense {
            Sense::Eq => abs(a - b),
            Sense::Le => (a - b).max(0.0),
        };
        primal_viol = primal_viol.max(v);
    }
    push("primal_residual", primal_viol / (1.0 + bnorm), tol);

    let x_min = if problem.psd_dim > 0 {
        sol.x.min_eigenvalue()
    } else {
        0.0
    };
    let xl_min = sol.x_lp.iter().fold(0.0f64, |m, v| m.min(*v));
    push("primal_cone", (-x_min).max(-xl_min).max(0.0), tol);

    let (s, s_lp) = problem.dual_slack(&sol.y);
    let s_min = if problem.psd_dim > 0 {
        s.min_eigenvalue()
    } else {
        0.0
    };
    let sl_min = s_lp.iter().fold(0.0f64, |m, v| m.min(*v));
    let cnorm = problem
        .c_psd
        .iter()
        .chain(&problem.c_lp)
        .fold(0.0f64, |m, v| m.max(abs(*v)));
    push(
        "dual_cone",
        (-s_min).max(-sl_min).max(0.0) / (1.0 + cnorm),
        tol,
    );
    let sign_viol = problem
        .senses
        .iter()
        .zip(&sol.y)
        .filter(|(s, _)| **s == Sense::Le)
        .fold(0.0f64, |m, (_, y)| m.max(*y));
    push("dual_sign", sign_viol, tol);

    let pobj: f64 = problem
        .c_psd
        .iter()
        .zip(&xv)
        .map(|(c, x)| c * x)
        .sum::<f64>()
        + problem
            .c_lp
            .iter()
            .zip(&sol.x_lp)
            .map(|(c, x)| c * x)
            .sum::<f64>();
    let dobj: f64 = problem.rhs.iter().zip(&sol.y).map(|(b, y)| b * y).sum();
    push("gap", abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj)), tol);

    CertReport {
        checks,
        primal_objective: pobj,
        dual_objective: dobj,
    }
}
