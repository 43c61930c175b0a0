use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{svec_index, svec_len, Matrix};
use crate::num::abs;
use crate::sdp::{self, ConeProblem, ConeRow, SdpSolution, Sense, SolverOptions};
use crate::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Ordered labels of the lifted coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct GramBasis {
    pub labels: Vec<String>,
}

impl GramBasis {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::Shape(format!("duplicate basis label {l}")));
            }
        }
        Ok(Self { labels })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Coordinate vector of a basis element.
    pub fn unit(&self, label: &str) -> Option<Vec<f64>> {
        let i = self.index_of(label)?;
        let mut v = vec![0.0; self.dim()];
        v[i] = 1.0;
        Some(v)
    }
}

/// Symmetric matrix stored as its upper triangle; entry `(i, j)` with `i ≤ j`
/// is the matrix element `A_ij = A_ji`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SymSparse {
    pub dim: usize,
    pub entries: BTreeMap<(usize, usize), f64>,
}

impl SymSparse {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        if v == 0.0 {
            return;
        }
        let key = if i <= j { (i, j) } else { (j, i) };
        let e = self.entries.entry(key).or_insert(0.0);
        *e += v;
        if *e == 0.0 {
            self.entries.remove(&key);
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.entries.get(&key).copied().unwrap_or(0.0)
    }

    /// `(u vᵀ + v uᵀ)/2`
    pub fn sym_outer(u: &[f64], v: &[f64]) -> Self {
        let mut m = Self::zeros(u.len());
        m.add_sym_outer(1.0, u, v);
        m
    }

    /// `self += α (u vᵀ + v uᵀ)/2`
    pub fn add_sym_outer(&mut self, alpha: f64, u: &[f64], v: &[f64]) {
        let n = self.dim;
        for i in 0..n {
            if u[i] == 0.0 && v[i] == 0.0 {
                continue;
            }
            for j in i..n {
                let val = if i == j {
                    u[i] * v[i]
                } else {
                    0.5 * (u[i] * v[j] + u[j] * v[i])
                };
                self.add(i, j, alpha * val);
            }
        }
    }

    pub fn add_scaled(&mut self, alpha: f64, other: &SymSparse) {
        for (&(i, j), &v) in &other.entries {
            self.add(i, j, alpha * v);
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut m = Self::zeros(self.dim);
        m.add_scaled(alpha, self);
        m
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// `⟨A, G⟩`
    pub fn inner(&self, g: &Matrix) -> f64 {
        self.entries
            .iter()
            .map(|(&(i, j), &v)| {
                if i == j {
                    v * g[(i, i)]
                } else {
                    2.0 * v * g[(i, j)]
                }
            })
            .sum()
    }

    /// `uᵀ A v`
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|(&(i, j), &a)| {
                if i == j {
                    a * u[i] * v[i]
                } else {
                    a * (u[i] * v[j] + u[j] * v[i])
                }
            })
            .sum()
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.dim, self.dim);
        for (&(i, j), &v) in &self.entries {
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        m
    }

    /// Coefficients on `svec` coordinates.
    pub fn svec_row(&self) -> Vec<(usize, f64)> {
        self.entries
            .iter()
            .map(|(&(i, j), &v)| {
                let c = if i == j {
                    v
                } else {
                    core::f64::consts::SQRT_2 * v
                };
                (svec_index(self.dim, i, j), c)
            })
            .collect()
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        self.entries.iter().map(|(&(i, j), &v)| (i, j, v)).collect()
    }

    pub fn from_triplets(dim: usize, t: &[(usize, usize, f64)]) -> Result<Self> {
        let mut m = Self::zeros(dim);
        for &(i, j, v) in t {
            if i >= dim || j >= dim {
                return Err(Error::DimensionMismatch {
                    what: "matrix entry",
                    expected: dim,
                    got: i.max(j),
                });
            }
            if !v.is_finite() {
                return Err(Error::NonFinite("matrix entry"));
            }
            m.add(i, j, v);
        }
        Ok(m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ConstraintTag {
    Lipschitz,
    Diameter,
    Boundary,
    Linkage,
}

/// A named point of the lifted problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Point {
    X1,
    /// Oracle atom `v_t`.
    V(usize),
    XStar,
    /// Played iterate `x_t`.
    X(usize),
}

impl core::fmt::Display for Point {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::X1 => write!(f, "x1"),
            Self::V(t) => write!(f, "v{t}"),
            Self::XStar => write!(f, "x*"),
            Self::X(t) => write!(f, "x{t}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum ConstraintKey {
    Lipschitz(usize),
    Diameter(Point, Point),
    /// Optimality of `v_t` against `u`.
    Boundary {
        t: usize,
        u: Point,
    },
    Other,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GramConstraint {
    pub matrix: SymSparse,
    pub rhs: f64,
    pub sense: Sense,
    pub tag: ConstraintTag,
    pub key: ConstraintKey,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Direction {
    Max,
    Min,
}

/// `max/min ⟨A_obj, G⟩` over `G ⪰ 0` subject to `⟨A_i, G⟩ (≤ | =) b_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct GramSdp {
    pub basis: GramBasis,
    pub objective: SymSparse,
    pub constraints: Vec<GramConstraint>,
    pub direction: Direction,
}

/// Solved Gram program.
#[derive(Clone, Debug)]
pub struct GramSolution {
    pub value: f64,
    pub gram: Matrix,
    /// One multiplier per constraint, sign-normalised so that
    /// `Σ λ_i A_i ∓ A_obj ⪰ 0` and `λ_i ≥ 0` on inequality rows.
    pub multipliers: Vec<f64>,
    /// Value of the dual point, `Σ λ_i b_i` (with the objective's sign).
    pub dual_value: f64,
    pub sdp: SdpSolution,
}

impl GramSdp {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn count(&self, tag: ConstraintTag) -> usize {
        self.constraints.iter().filter(|c| c.tag == tag).count()
    }

    /// Checks sizes and finiteness.
    pub fn check(&self) -> Result<()> {
        let n = self.dim();
        let mats =
            core::iter::once(&self.objective).chain(self.constraints.iter().map(|c| &c.matrix));
        for m in mats {
            if m.dim != n {
                return Err(Error::DimensionMismatch {
                    what: "coefficient matrix",
                    expected: n,
                    got: m.dim,
                });
            }
            if m.entries.keys().any(|&(i, j)| i > j || j >= n) {
                return Err(Error::Shape(String::from(
                    "entry outside the upper triangle",
                )));
            }
            if m.entries.values().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("coefficient matrix"));
            }
        }
        if self.constraints.iter().any(|c| !c.rhs.is_finite()) {
            return Err(Error::NonFinite("constraint rhs"));
        }
        Ok(())
    }

    /// Standard-form cone program (always a minimisation).
    pub fn to_cone(&self) -> ConeProblem {
        let n = self.dim();
        let mut p = ConeProblem::new(n, 0);
        let sign = match self.direction {
            Direction::Max => -1.0,
            Direction::Min => 1.0,
        };
        for (k, v) in self.objective.svec_row() {
            p.c_psd[k] += sign * v;
        }
        for c in &self.constraints {
            p.push(
                ConeRow {
                    psd: c.matrix.svec_row(),
                    lp: Vec::new(),
                },
                c.sense,
                c.rhs,
            );
        }
        debug_assert_eq!(p.c_psd.len(), svec_len(n));
        p
    }

    pub fn solve(&self, opts: &SolverOptions) -> Result<GramSolution> {
        self.check()?;
        let cone = self.to_cone();
        let sol = sdp::solve_with(&cone, opts)?;
        let sign = match self.direction {
            Direction::Max => -1.0,
            Direction::Min => 1.0,
        };
        let multipliers: Vec<f64> = sol.y.iter().map(|y| -y).collect();
        let dual_value = -self
            .constraints
            .iter()
            .zip(&multipliers)
            .map(|(c, l)| c.rhs * l)
            .sum::<f64>()
            * sign;
        Ok(GramSolution {
            value: sign * sol.primal_objective,
            gram: sol.x.clone(),
            multipliers,
            dual_value,
            sdp: sol,
        })
    }

    /// Upper bound on the maximum that holds for every feasible `G` with
    /// `tr G ≤ trace_bound`, built from possibly inexact multipliers.
    ///
    /// Inequality multipliers are clamped at zero; the residual indefiniteness
    /// of `Σ λ_i A_i − A_obj` is charged against the trace bound.
    pub fn certified_upper_bound(
        &self,
        multipliers: &[f64],
        trace_bound: f64,
    ) -> Result<DualCertificate> {
        if self.direction != Direction::Max {
            return Err(Error::Unsupported(
                "certified bounds are for maximisation problems",
            ));
        }
        if multipliers.len() != self.constraints.len() {
            return Err(Error::DimensionMismatch {
                what: "multipliers",
                expected: self.constraints.len(),
                got: multipliers.len(),
            });
        }
        let mut s = self.objective.scaled(-1.0);
        let mut value = 0.0;
        let mut clamped = 0.0f64;
        for (c, &l) in self.constraints.iter().zip(multipliers) {
            let l = match c.sense {
                Sense::Le => {
                    clamped = clamped.max(-l);
                    l.max(0.0)
                }
                Sense::Eq => l,
            };
            s.add_scaled(l, &c.matrix);
            value += l * c.rhs;
        }
        let min_eig = if self.dim() > 0 {
            s.to_dense().min_eigenvalue()
        } else {
            0.0
        };
        let penalty = (-min_eig).max(0.0) * trace_bound;
        Ok(DualCertificate {
            multiplier_value: value,
            min_eigenvalue: min_eig,
            clamped_negativity: clamped.max(0.0),
            bound: value + penalty,
        })
    }

    /// Largest violation of the constraints at `g`, plus the most negative
    /// eigenvalue of `g`.
    pub fn violation(&self, g: &Matrix) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.constraints {
            let a = c.matrix.inner(g);
            let v = match c.sense {
                Sense::Le => a - c.rhs,
                Sense::Eq => abs(a - c.rhs),
            };
            worst = worst.max(v);
        }
        worst.max(-g.min_eigenvalue())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct DualCertificate {
    /// `Σ λ_i b_i` after clamping.
    pub multiplier_value: f64,
    pub min_eigenvalue: f64,
    /// Most negative multiplier before clamping (zero if none).
    pub clamped_negativity: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LmiVar {
    pub name: String,
    pub nonneg: bool,
}

/// Linear constraint `Σ a_k w_k (= | ≤) b`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraint {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// `minimise c'w + c₀` subject to `S(w) = S₀ + Σ w_k S_k ⪰ 0`, sign
/// restrictions, linear equalities and inequalities.
#[derive(Clone, Debug, PartialEq)]
pub struct LmiSdp {
    pub basis: GramBasis,
    pub vars: Vec<LmiVar>,
    pub objective: Vec<f64>,
    pub objective_constant: f64,
    pub constant: SymSparse,
    pub coeffs: Vec<SymSparse>,
    pub equalities: Vec<LinearConstraint>,
    pub inequalities: Vec<LinearConstraint>,
}

#[derive(Clone, Debug)]
pub struct LmiSolution {
    pub value: f64,
    pub w: Vec<f64>,
    /// Primal matrix of the lowered program (a Gram matrix of the inner problem).
    pub gram: Matrix,
    pub lmi_min_eigenvalue: f64,
    pub sdp: SdpSolution,
}

impl LmiSdp {
    pub fn new(basis: GramBasis) -> Self {
        let n = basis.dim();
        Self {
            basis,
            vars: Vec::new(),
            objective: Vec::new(),
            objective_constant: 0.0,
            constant: SymSparse::zeros(n),
            coeffs: Vec::new(),
            equalities: Vec::new(),
            inequalities: Vec::new(),
        }
    }

    pub fn add_var(&mut self, name: String, nonneg: bool, cost: f64, matrix: SymSparse) -> usize {
        self.vars.push(LmiVar { name, nonneg });
        self.objective.push(cost);
        self.coeffs.push(matrix);
        self.vars.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn lmi_at(&self, w: &[f64]) -> SymSparse {
        let mut s = self.constant.clone();
        for (m, &wk) in self.coeffs.iter().zip(w) {
            s.add_scaled(wk, m);
        }
        s
    }

    pub fn objective_at(&self, w: &[f64]) -> f64 {
        self.objective_constant
            + self
                .objective
                .iter()
                .zip(w)
                .map(|(c, v)| c * v)
                .sum::<f64>()
    }

    /// Eliminates the equalities: `w = w₀ + N u` with `u` free.
    fn eliminate(&self) -> Result<(Vec<f64>, Matrix)> {
        let nv = self.num_vars();
        let ne = self.equalities.len();
        let mut a = Matrix::zeros(ne, nv + 1);
        for (r, eq) in self.equalities.iter().enumerate() {
            for &(k, v) in &eq.coeffs {
                a[(r, k)] += v;
            }
            a[(r, nv)] = eq.rhs;
        }
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        let mut used = vec![false; ne];
        for _ in 0..ne {
            // Choose the largest entry, preferring free variables.
            let mut best: Option<(usize, usize, f64, bool)> = None;
            for r in (0..ne).filter(|r| !used[*r]) {
                let scale = (0..nv).fold(0.0f64, |m, k| m.max(abs(a[(r, k)])));
                if scale == 0.0 {
                    continue;
                }
                for k in 0..nv {
                    let v = abs(a[(r, k)]);
                    if v <= 1e-12 * scale {
                        continue;
                    }
                    let free = !self.vars[k].nonneg;
                    let better = match best {
                        None => true,
                        Some((_, _, bv, bfree)) => (free && !bfree) || (free == bfree && v > bv),
                    };
                    if better {
                        best = Some((r, k, v, free));
                    }
                }
            }
            let Some((r, k, _, _)) = best else { break };
            used[r] = true;
            let p = a[(r, k)];
            for c in 0..=nv {
                a[(r, c)] /= p;
            }
            for o in 0..ne {
                if o != r && a[(o, k)] != 0.0 {
                    let f = a[(o, k)];
                    for c in 0..=nv {
                        let delta = f * a[(r, c)];
                        a[(o, c)] -= delta;
                    }
                }
            }
            pivots.push((r, k));
        }
        for r in (0..ne).filter(|r| !used[*r]) {
            if abs(a[(r, nv)]) > 1e-9 {
                return Err(Error::Solver(format!(
                    "inconsistent equality constraint {r}"
                )));
            }
        }
        let is_pivot: Vec<Option<usize>> = {
            let mut v = vec![None; nv];
            for &(r, k) in &pivots {
                v[k] = Some(r);
            }
            v
        };
        let free: Vec<usize> = (0..nv).filter(|k| is_pivot[*k].is_none()).collect();
        let mut w0 = vec![0.0; nv];
        let mut n = Matrix::zeros(nv, free.len());
        for (j, &k) in free.iter().enumerate() {
            n[(k, j)] = 1.0;
        }
        for &(r, k) in &pivots {
            w0[k] = a[(r, nv)];
            for (j, &f) in free.iter().enumerate() {
                n[(k, j)] = -a[(r, f)];
            }
        }
        Ok((w0, n))
    }

    pub fn solve(&self, opts: &SolverOptions) -> Result<LmiSolution> {
        let (w0, nmat) = self.eliminate()?;
        let nv = self.num_vars();
        let nu = nmat.cols();
        let dim = self.basis.dim();

        // Columns of N as sparse lists.
        let cols: Vec<Vec<(usize, f64)>> = (0..nu)
            .map(|j| {
                (0..nv)
                    .filter_map(|k| {
                        let v = nmat[(k, j)];
                        (v != 0.0).then_some((k, v))
                    })
                    .collect()
            })
            .collect();

        let s0 = {
            let mut s = self.constant.clone();
            for (k, m) in self.coeffs.iter().enumerate() {
                if w0[k] != 0.0 {
                    s.add_scaled(w0[k], m);
                }
            }
            s
        };
        let nonneg: Vec<usize> = (0..nv).filter(|k| self.vars[*k].nonneg).collect();
        let lp_dim = nonneg.len() + self.inequalities.len();
        let mut cone = ConeProblem::new(dim, lp_dim);
        for (k, v) in s0.svec_row() {
            cone.c_psd[k] = v;
        }
        for (i, &k) in nonneg.iter().enumerate() {
            cone.c_lp[i] = w0[k];
        }
        let base = nonneg.len();
        for (i, ineq) in self.inequalities.iter().enumerate() {
            let aw0: f64 = ineq.coeffs.iter().map(|&(k, v)| v * w0[k]).sum();
            cone.c_lp[base + i] = ineq.rhs - aw0;
        }
        let nonneg_pos: Vec<Option<usize>> = {
            let mut v = vec![None; nv];
            for (i, &k) in nonneg.iter().enumerate() {
                v[k] = Some(i);
            }
            v
        };
        for col in &cols {
            let mut m = SymSparse::zeros(dim);
            let mut lp: Vec<(usize, f64)> = Vec::new();
            let mut cost = 0.0;
            for &(k, v) in col {
                m.add_scaled(v, &self.coeffs[k]);
                cost += self.objective[k] * v;
                if let Some(i) = nonneg_pos[k] {
                    lp.push((i, -v));
                }
            }
            for (i, ineq) in self.inequalities.iter().enumerate() {
                let a: f64 = ineq
                    .coeffs
                    .iter()
                    .map(|&(k, v)| v * col.iter().find(|(kk, _)| *kk == k).map_or(0.0, |x| x.1))
                    .sum();
                if a != 0.0 {
                    lp.push((base + i, a));
                }
            }
            let psd = m.svec_row().into_iter().map(|(k, v)| (k, -v)).collect();
            cone.push(ConeRow { psd, lp }, Sense::Eq, -cost);
        }

        let sol = sdp::solve_with(&cone, opts)?;
        let mut w = w0.clone();
        for (j, col) in cols.iter().enumerate() {
            for &(k, v) in col {
                w[k] += v * sol.y[j];
            }
        }
        let s = self.lmi_at(&w);
        let lmi_min = if dim > 0 {
            s.to_dense().min_eigenvalue()
        } else {
            0.0
        };
        Ok(LmiSolution {
            value: self.objective_at(&w),
            w,
            gram: sol.x.clone(),
            lmi_min_eigenvalue: lmi_min,
            sdp: sol,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sym_outer_convention() {
        let m = SymSparse::sym_outer(&[1.0, 0.0, 2.0], &[0.0, 3.0, 1.0]);
        let d = m.to_dense();
        assert_eq!(d[(0, 1)], 1.5);
        assert_eq!(d[(2, 2)], 2.0);
        assert_eq!(d[(0, 2)], 0.5);
        assert_eq!(d.max_asymmetry(), 0.0);
        let u = [0.3, -1.0, 2.0];
        let v = [1.0, 0.5, -0.25];
        let g = Matrix::from_fn(3, 3, |i, j| u[i] * u[j] + v[i] * v[j]);
        let inner = m.inner(&g);
        let direct = m.to_dense().inner(&g);
        assert!((inner - direct).abs() < 1e-14);
    }

    #[test]
    fn lmi_with_equality() {
        // minimise t subject to [[t, 1], [1, s]] ⪰ 0, s = t.
        let basis = GramBasis::new(vec!["a".into(), "b".into()]).unwrap();
        let mut p = LmiSdp::new(basis);
        p.constant.add(0, 1, 1.0);
        let mut mt = SymSparse::zeros(2);
        mt.add(0, 0, 1.0);
        let mut ms = SymSparse::zeros(2);
        ms.add(1, 1, 1.0);
        let t = p.add_var("t".into(), false, 1.0, mt);
        let s = p.add_var("s".into(), false, 0.0, ms);
        p.equalities.push(LinearConstraint {
            coeffs: vec![(t, 1.0), (s, -1.0)],
            rhs: 0.0,
        });
        let sol = p.solve(&SolverOptions::default()).unwrap();
        assert!((sol.value - 1.0).abs() < 1e-6, "{}", sol.value);
        assert!((sol.w[0] - sol.w[1]).abs() < 1e-9);
    }
}
