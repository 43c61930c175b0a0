//! Explicit adversarial instances recovered from solved Gram matrices.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::Matrix;
use crate::model::{ParamSchedule, ProblemSetting};
use crate::num::{abs, axpy, dist, dot, norm, sqrt, sub};
use crate::sdp::CertCheck;
use crate::simulate::{regret, run_general_with, sup_regret, Domain, GradientSequence, Trace};
use crate::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Default relative cut-off for eigenvalues kept in the factorisation.
pub const RANK_TOL: f64 = 1e-7;

/// Gradients, oracle atoms and comparator realising a worst case (`x_1 = 0`).
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct WorstCase {
    #[cfg_attr(feature = "serde", serde(rename = "T"))]
    pub horizon: usize,
    pub dim: usize,
    pub grads: Vec<Vec<f64>>,
    pub atoms: Vec<Vec<f64>>,
    pub x_star: Vec<f64>,
    /// Value of the program the instance was extracted from.
    pub objective: f64,
    /// Eigenvalues kept, largest first.
    pub spectrum: Vec<f64>,
    /// Sum of the discarded eigenvalues.
    pub dropped: f64,
}

impl WorstCase {
    pub fn x1(&self) -> Vec<f64> {
        vec![0.0; self.dim]
    }

    /// `x_1`, the atoms and `x⋆`.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let mut v = vec![self.x1()];
        v.extend(self.atoms.iter().cloned());
        v.push(self.x_star.clone());
        v
    }
}

/// Factorises `G ≈ PᵀP` keeping eigenvalues above `rank_tol · λ_max`;
/// column `k` of `P` realises basis element `k` (`g_1..g_T, v_1..v_{T−1}, x⋆`).
pub fn extract(gram: &Matrix, horizon: usize, objective: f64, rank_tol: f64) -> Result<WorstCase> {
    let n = 2 * horizon;
    if horizon < 1 {
        return Err(Error::Horizon {
            min: 1,
            got: horizon,
        });
    }
    if !gram.is_square() || gram.rows() != n {
        return Err(Error::DimensionMismatch {
            what: "Gram matrix",
            expected: n,
            got: gram.rows(),
        });
    }
    if !gram.all_finite() {
        return Err(Error::NonFinite("Gram matrix"));
    }
    let mut sym = gram.clone();
    sym.symmetrize();
    let eig = sym.sym_eigen();
    let lmax = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let cut = rank_tol * lmax;
    let mut spectrum = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut dropped = 0.0;
    for k in (0..n).rev() {
        let l = eig.values[k];
        if l > cut && l > 0.0 {
            let s = sqrt(l);
            rows.push((0..n).map(|i| s * eig.vectors[(i, k)]).collect());
            spectrum.push(l);
        } else if l > 0.0 {
            dropped += l;
        }
    }
    if rows.is_empty() {
        // Zero Gram matrix: realise it in one dimension.
        rows.push(vec![0.0; n]);
    }
    let dim = rows.len();
    let column = |k: usize| -> Vec<f64> { rows.iter().map(|r| r[k]).collect() };
    Ok(WorstCase {
        horizon,
        dim,
        grads: (0..horizon).map(column).collect(),
        atoms: (horizon..2 * horizon - 1).map(column).collect(),
        x_star: column(2 * horizon - 1),
        objective,
        spectrum,
        dropped,
    })
}

/// Closed-form worst case for a single round: `g = L`, `x⋆ = −D` on a line.
pub fn worst_case_t1(setting: &ProblemSetting) -> Result<WorstCase> {
    setting.check()?;
    Ok(WorstCase {
        horizon: 1,
        dim: 1,
        grads: vec![vec![setting.lipschitz]],
        atoms: Vec::new(),
        x_star: vec![-setting.diameter],
        objective: setting.lipschitz * setting.diameter,
        spectrum: vec![setting.lipschitz * setting.lipschitz + setting.diameter * setting.diameter],
        dropped: 0.0,
    })
}

#[derive(Clone, Debug)]
pub struct AuditReport {
    pub checks: Vec<CertCheck>,
    pub replay: Trace,
    pub replay_regret: f64,
    /// Regret against the best vertex of the hull, at least `replay_regret`.
    pub hull_regret: f64,
    /// Rounds where the recorded atom was kept among near-tied vertices.
    pub ties: usize,
    /// Rounds where the oracle disagreed with the recorded atom.
    pub divergences: Vec<usize>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{}: {:.3e} > {:.3e}", c.name, c.value, c.limit))
            .collect()
    }
}

const GEOMETRY_TOL: f64 = 1e-6;
const TIE_TOL: f64 = 1e-7;
const REGRET_TOL: f64 = 1e-4;

fn check(name: &str, value: f64, limit: f64) -> CertCheck {
    CertCheck {
        name: String::from(name),
        value,
        limit,
        passed: value <= limit,
    }
}

/// Verifies the instance against the problem class and replays the
/// schedule on it through an exact hull oracle.
pub fn audit(
    wc: &WorstCase,
    schedule: &ParamSchedule,
    setting: &ProblemSetting,
) -> Result<AuditReport> {
    setting.check()?;
    schedule.check_shape()?;
    if schedule.horizon != wc.horizon || setting.horizon != wc.horizon {
        return Err(Error::DimensionMismatch {
            what: "horizon",
            expected: wc.horizon,
            got: schedule.horizon,
        });
    }
    let big_t = wc.horizon;
    let d = wc.dim;
    let x1 = wc.x1();

    let iterate = |t: usize| {
        let mut x = x1.clone();
        for s in 1..t {
            axpy(schedule.gamma(t, s), &sub(&wc.atoms[s - 1], &x1), &mut x);
        }
        x
    };
    let mut vertices = wc.vertices();
    if !schedule.is_hull_safe() {
        vertices.extend((2..=big_t).map(iterate));
    }

    let norm_excess = wc
        .grads
        .iter()
        .map(|g| norm(g) - setting.lipschitz)
        .fold(0.0f64, f64::max);
    let mut diam_excess: f64 = 0.0;
    for i in 0..vertices.len() {
        for j in i + 1..vertices.len() {
            diam_excess = diam_excess.max(dist(&vertices[i], &vertices[j]) - setting.diameter);
        }
    }

    let direction = |t: usize| {
        let mut dir = vec![0.0; d];
        for s in 1..=t {
            axpy(schedule.eta(t, s), &wc.grads[s - 1], &mut dir);
        }
        for s in 1..t {
            axpy(schedule.beta(t, s), &sub(&wc.atoms[s - 1], &x1), &mut dir);
        }
        dir
    };
    let mut lmo_gap: f64 = 0.0;
    for t in 1..big_t {
        let dir = direction(t);
        let vt = dot(&dir, &wc.atoms[t - 1]);
        for u in &vertices {
            lmo_gap = lmo_gap.max(vt - dot(&dir, u));
        }
    }

    let mut ties = 0;
    let mut divergences = Vec::new();
    let grads = GradientSequence(wc.grads.clone());
    let replay = run_general_with(schedule, &x1, &grads, |t, dir| {
        let values: Vec<f64> = vertices.iter().map(|u| dot(dir, u)).collect();
        let (best, min) = values
            .iter()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc },
            );
        let tol = TIE_TOL * (norm(dir) * setting.diameter).max(1.0);
        let recorded = &wc.atoms[t - 1];
        let rv = dot(dir, recorded);
        if rv <= min + tol {
            if values.iter().filter(|&&v| v <= min + tol).count() > 1 {
                ties += 1;
            }
            Ok(recorded.clone())
        } else {
            divergences.push(t);
            Ok(vertices[best].clone())
        }
    })?;
    let replay_regret = regret(&replay, &wc.x_star);
    let hull_regret = sup_regret(&replay, &Domain::hull(vertices.clone())?)?;
    let regret_gap = abs(replay_regret - wc.objective);

    let checks = vec![
        check("gradient_norm", norm_excess, GEOMETRY_TOL),
        check("diameter", diam_excess, GEOMETRY_TOL),
        check("lmo_optimality", lmo_gap, GEOMETRY_TOL),
        check("replay_divergences", divergences.len() as f64, 0.0),
        check(
            "regret_match",
            regret_gap,
            REGRET_TOL * (1.0 + abs(wc.objective)),
        ),
    ];
    Ok(AuditReport {
        checks,
        replay,
        replay_regret,
        hull_regret,
        ties,
        divergences,
    })
}
