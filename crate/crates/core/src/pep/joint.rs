use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::gram::{GramBasis, LinearConstraint, LmiSdp, LmiSolution, SymSparse};
use crate::model::{ParamSchedule, ProblemSetting, ScheduleMeta};
use crate::num::abs;
use crate::sdp::SolverOptions;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JointOptions {
    /// Restrict to schedules without atom feedback (`β = 0`).
    pub beta_zero: bool,
    /// Oracle calls per round.
    pub rounds: usize,
}

impl Default for JointOptions {
    fn default() -> Self {
        Self {
            beta_zero: false,
            rounds: 1,
        }
    }
}

/// Joint program over multipliers and schedule coefficients, linearised by
/// the change of variables `B = λ·η`, `C = λ·β`.
///
/// Atoms are numbered lexicographically; `x⋆` is appended as the last atom
/// with round index `T`.
#[derive(Clone, Debug)]
pub struct JointProgram {
    pub setting: ProblemSetting,
    pub options: JointOptions,
    pub lmi: LmiSdp,
    pub lipschitz: Vec<usize>,
    pub diameter: Vec<((usize, usize), usize)>,
    /// `(atom p, gradient s) → variable`.
    pub b: BTreeMap<(usize, usize), usize>,
    /// `(atom p, earlier atom q) → variable`.
    pub c: BTreeMap<(usize, usize), usize>,
    /// `(round t, atom q) → variable`.
    pub gamma: BTreeMap<(usize, usize), usize>,
}

impl JointProgram {
    /// Number of atoms excluding `x⋆`.
    pub fn num_atoms(&self) -> usize {
        (self.setting.horizon - 1) * self.options.rounds
    }

    /// Round of atom `p` (`T` for `x⋆`).
    pub fn round_of(&self, p: usize) -> usize {
        p / self.options.rounds + 1
    }

    pub fn solve(&self, opts: &SolverOptions) -> Result<JointSolution> {
        let sol = self.lmi.solve(opts)?;
        let pick = |m: &BTreeMap<(usize, usize), usize>| -> BTreeMap<(usize, usize), f64> {
            m.iter().map(|(&k, &i)| (k, sol.w[i])).collect()
        };
        Ok(JointSolution {
            value: sol.value,
            b: pick(&self.b),
            c: pick(&self.c),
            gamma: pick(&self.gamma),
            lipschitz: self.lipschitz.iter().map(|&i| sol.w[i]).collect(),
            diameter: self.diameter.iter().map(|&(k, i)| (k, sol.w[i])).collect(),
            horizon: self.setting.horizon,
            rounds: self.options.rounds,
            beta_zero: self.options.beta_zero,
            lmi: sol,
        })
    }
}

#[derive(Clone, Debug)]
pub struct JointSolution {
    pub value: f64,
    pub horizon: usize,
    pub rounds: usize,
    pub beta_zero: bool,
    pub b: BTreeMap<(usize, usize), f64>,
    pub c: BTreeMap<(usize, usize), f64>,
    pub gamma: BTreeMap<(usize, usize), f64>,
    pub lipschitz: Vec<f64>,
    pub diameter: Vec<((usize, usize), f64)>,
    pub lmi: LmiSolution,
}

pub fn build_joint_opt(setting: &ProblemSetting, options: JointOptions) -> Result<JointProgram> {
    setting.check()?;
    let big_t = setting.horizon;
    if big_t < 2 {
        return Err(Error::Horizon { min: 2, got: big_t });
    }
    let r = options.rounds;
    if r < 1 {
        return Err(Error::InvalidParameter {
            name: "rounds",
            value: r as f64,
        });
    }
    let atoms = (big_t - 1) * r;
    let round_of = |p: usize| p / r + 1;
    let mut labels: Vec<String> = (1..=big_t).map(|t| format!("g{t}")).collect();
    for p in 0..atoms {
        labels.push(if r == 1 {
            format!("v{}", p + 1)
        } else {
            format!("v{}.{}", round_of(p), p % r + 1)
        });
    }
    labels.push(String::from("x*"));
    let basis = GramBasis::new(labels)?;
    let n = basis.dim();
    let g_idx = |t: usize| t - 1;
    let v_idx = |p: usize| big_t + p;
    let unit = |i: usize| {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        e
    };
    let (l2, d2) = (
        setting.lipschitz * setting.lipschitz,
        setting.diameter * setting.diameter,
    );

    let mut lmi = LmiSdp::new(basis);
    for t in 1..=big_t {
        lmi.constant
            .add_sym_outer(1.0, &unit(g_idx(t)), &unit(v_idx(atoms)));
    }

    let mut lipschitz = Vec::new();
    for t in 1..=big_t {
        let g = unit(g_idx(t));
        lipschitz.push(lmi.add_var(format!("lip[{t}]"), true, l2, SymSparse::sym_outer(&g, &g)));
    }

    // Points: x1 (index None) and atoms 0..=atoms (the last is x⋆).
    let point = |k: usize| -> Vec<f64> {
        if k == 0 {
            vec![0.0; n]
        } else {
            unit(v_idx(k - 1))
        }
    };
    let mut diameter = Vec::new();
    for i in 0..=atoms + 1 {
        for j in i + 1..=atoms + 1 {
            let d: Vec<f64> = point(i).iter().zip(point(j)).map(|(a, b)| a - b).collect();
            let k = lmi.add_var(
                format!("diam[{i},{j}]"),
                true,
                d2,
                SymSparse::sym_outer(&d, &d),
            );
            diameter.push(((i, j), k));
        }
    }

    let mut b = BTreeMap::new();
    for p in 0..=atoms {
        for s in 1..=round_of(p).min(big_t) {
            let m = SymSparse::sym_outer(&unit(g_idx(s)), &unit(v_idx(p)));
            b.insert((p, s), lmi.add_var(format!("B[{p},{s}]"), false, 0.0, m));
        }
    }
    for s in 1..=big_t {
        let coeffs: Vec<(usize, f64)> = b
            .iter()
            .filter(|((_, ss), _)| *ss == s)
            .map(|(_, &k)| (k, 1.0))
            .collect();
        lmi.equalities.push(LinearConstraint { coeffs, rhs: 0.0 });
    }

    let mut c = BTreeMap::new();
    if !options.beta_zero {
        for p in 1..=atoms {
            for q in 0..p {
                let m = SymSparse::sym_outer(&unit(v_idx(q)), &unit(v_idx(p)));
                c.insert((p, q), lmi.add_var(format!("C[{p},{q}]"), false, 0.0, m));
            }
        }
        for q in 0..atoms {
            let coeffs: Vec<(usize, f64)> = c
                .iter()
                .filter(|((_, qq), _)| *qq == q)
                .map(|(_, &k)| (k, 1.0))
                .collect();
            lmi.equalities.push(LinearConstraint { coeffs, rhs: 0.0 });
        }
    }

    let mut gamma = BTreeMap::new();
    for t in 2..=big_t {
        let mut row = Vec::new();
        for q in (0..atoms).filter(|&q| round_of(q) < t) {
            let m = SymSparse::sym_outer(&unit(g_idx(t)), &unit(v_idx(q))).scaled(-1.0);
            let k = lmi.add_var(format!("gamma[{t},{q}]"), true, 0.0, m);
            gamma.insert((t, q), k);
            row.push((k, 1.0));
        }
        lmi.inequalities.push(LinearConstraint {
            coeffs: row,
            rhs: 1.0,
        });
    }

    Ok(JointProgram {
        setting: *setting,
        options,
        lmi,
        lipschitz,
        diameter,
        b,
        c,
        gamma,
    })
}

/// Schedule reconstructed from a joint solution with `η ≡ 1`.
#[derive(Clone, Debug)]
pub struct Recovered {
    pub schedule: ParamSchedule,
    /// `lambda[t−1][u−1]` prices optimality of `v_t` against `v_u`
    /// (`u = T` stands for `x⋆`); only `u > t` is meaningful.
    pub lambda: Vec<Vec<f64>>,
    /// Rounds whose outgoing multiplier mass vanished; `β` is set to zero there.
    pub undefined_rows: Vec<usize>,
    pub min_lambda: f64,
    /// Largest mismatch when the recovered `(β, λ)` are mapped back to `(B, C)`.
    pub residual: f64,
}

pub fn recover_params(sol: &JointSolution) -> Result<Recovered> {
    if sol.rounds != 1 {
        return Err(Error::Unsupported(
            "parameter recovery needs one oracle call per round",
        ));
    }
    let big_t = sol.horizon;
    let bv = |t: usize, s: usize| sol.b.get(&(t - 1, s)).copied().unwrap_or(0.0);
    let cv = |t: usize, s: usize| sol.c.get(&(t - 1, s - 1)).copied().unwrap_or(0.0);

    let mut lambda = vec![vec![0.0; big_t]; big_t];
    for t in 2..=big_t {
        for s in 1..t {
            lambda[s - 1][t - 1] = bv(t, s + 1) - bv(t, s);
        }
    }
    let mut schedule = ParamSchedule::zeros(big_t)?;
    for t in 1..big_t {
        for s in 1..=t {
            schedule.set_eta(t, s, 1.0);
        }
    }
    for (&(t, q), &v) in &sol.gamma {
        schedule.set_gamma(t, q + 1, v);
    }
    let mut undefined_rows = Vec::new();
    if !sol.beta_zero {
        for t in 2..big_t {
            let btt = bv(t, t);
            if abs(btt) < 1e-9 {
                undefined_rows.push(t);
                continue;
            }
            for s in 1..t {
                let mut acc = cv(t, s);
                for j in s + 1..t {
                    acc += schedule.beta(j, s) * lambda[j - 1][t - 1];
                }
                schedule.set_beta(t, s, acc / btt);
            }
        }
    }

    let mut residual: f64 = 0.0;
    for t in 1..=big_t {
        let out: f64 = (t + 1..=big_t).map(|u| lambda[t - 1][u - 1]).sum();
        for s in 1..=t.min(big_t) {
            let eta_ts = if t < big_t { schedule.eta(t, s) } else { 0.0 };
            let incoming: f64 = (s..t)
                .map(|i| lambda[i - 1][t - 1] * schedule.eta(i, s))
                .sum();
            residual = residual.max(abs(eta_ts * out - incoming - bv(t, s)));
        }
        if !sol.beta_zero {
            for s in 1..t {
                if undefined_rows.contains(&t) {
                    continue;
                }
                let beta_ts = if t < big_t { schedule.beta(t, s) } else { 0.0 };
                let incoming: f64 = (s + 1..t)
                    .map(|i| lambda[i - 1][t - 1] * schedule.beta(i, s))
                    .sum();
                residual = residual.max(abs(beta_ts * out - incoming - cv(t, s)));
            }
        }
    }
    let min_lambda = (1..big_t)
        .flat_map(|s| (s + 1..=big_t).map(move |t| (s, t)))
        .map(|(s, t)| lambda[s - 1][t - 1])
        .fold(f64::INFINITY, f64::min);
    let hull_safe = schedule.is_hull_safe();
    schedule.meta = ScheduleMeta {
        name: String::from(if sol.beta_zero {
            "joint-opt-beta0"
        } else {
            "joint-opt"
        }),
        hull_safe,
        notes: undefined_rows
            .iter()
            .map(|t| format!("row {t}: beta undefined, set to zero"))
            .collect(),
    };
    Ok(Recovered {
        schedule,
        lambda,
        undefined_rows,
        min_lambda: if min_lambda.is_finite() {
            min_lambda
        } else {
            0.0
        },
        residual,
    })
}
