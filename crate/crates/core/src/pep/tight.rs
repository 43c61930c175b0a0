use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::gram::{
    ConstraintKey, ConstraintTag, Direction, GramBasis, GramConstraint, GramSdp, LmiSdp, Point,
    SymSparse,
};
use crate::model::{ParamSchedule, ProblemSetting};
use crate::sdp::Sense;
use crate::{Error, Result};

/// Coordinates of the lifted points for a horizon `T`:
/// `g_1..g_T`, `v_1..v_{T−1}`, `x⋆`.
#[derive(Clone, Debug)]
pub struct Lifting {
    pub horizon: usize,
    pub basis: GramBasis,
}

impl Lifting {
    pub fn new(horizon: usize) -> Result<Self> {
        if horizon < 1 {
            return Err(Error::Horizon {
                min: 1,
                got: horizon,
            });
        }
        let mut labels: Vec<String> = (1..=horizon).map(|t| format!("g{t}")).collect();
        labels.extend((1..horizon).map(|t| format!("v{t}")));
        labels.push(String::from("x*"));
        Ok(Self {
            horizon,
            basis: GramBasis::new(labels)?,
        })
    }

    pub fn dim(&self) -> usize {
        2 * self.horizon
    }

    pub fn g_index(&self, t: usize) -> usize {
        t - 1
    }

    pub fn v_index(&self, t: usize) -> usize {
        self.horizon + t - 1
    }

    pub fn x_star_index(&self) -> usize {
        2 * self.horizon - 1
    }

    pub fn unit(&self, i: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.dim()];
        e[i] = 1.0;
        e
    }

    /// `x̄_t = Σ_s γ_{t,s} v̄_s` (with `x̄_1 = 0`).
    pub fn iterate(&self, s: &ParamSchedule, t: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        for j in 1..t {
            x[self.v_index(j)] += s.gamma(t, j);
        }
        x
    }

    /// `dir_t = Σ η_{t,s} ḡ_s + Σ β_{t,s} v̄_s`.
    pub fn direction(&self, s: &ParamSchedule, t: usize) -> Vec<f64> {
        let mut d = vec![0.0; self.dim()];
        for j in 1..=t {
            d[self.g_index(j)] += s.eta(t, j);
        }
        for j in 1..t {
            d[self.v_index(j)] += s.beta(t, j);
        }
        d
    }

    pub fn point(&self, s: &ParamSchedule, p: Point) -> Vec<f64> {
        match p {
            Point::X1 => vec![0.0; self.dim()],
            Point::V(t) => self.unit(self.v_index(t)),
            Point::XStar => self.unit(self.x_star_index()),
            Point::X(t) => self.iterate(s, t),
        }
    }
}

/// Points whose pairwise distances are bounded and against which every atom
/// must be optimal.
pub fn domain_points(schedule: &ParamSchedule, lift: &Lifting) -> Vec<(Point, Vec<f64>)> {
    let t_max = lift.horizon;
    let mut pts: Vec<(Point, Vec<f64>)> = Vec::new();
    pts.push((Point::X1, lift.point(schedule, Point::X1)));
    for t in 1..t_max {
        pts.push((Point::V(t), lift.point(schedule, Point::V(t))));
    }
    pts.push((Point::XStar, lift.point(schedule, Point::XStar)));
    if !schedule.is_hull_safe() {
        for t in 2..=t_max {
            let x = lift.iterate(schedule, t);
            if !pts.iter().any(|(_, p)| p == &x) {
                pts.push((Point::X(t), x));
            }
        }
    }
    pts
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Worst-case regret program `B_T` for a fixed schedule.
pub fn build_primal(schedule: &ParamSchedule, setting: &ProblemSetting) -> Result<GramSdp> {
    setting.check()?;
    schedule.check_shape()?;
    if schedule.horizon != setting.horizon {
        return Err(Error::DimensionMismatch {
            what: "schedule horizon",
            expected: setting.horizon,
            got: schedule.horizon,
        });
    }
    let big_t = setting.horizon;
    let lift = Lifting::new(big_t)?;
    let n = lift.dim();
    let (l2, d2) = (
        setting.lipschitz * setting.lipschitz,
        setting.diameter * setting.diameter,
    );

    let mut objective = SymSparse::zeros(n);
    let xs = lift.unit(lift.x_star_index());
    for t in 1..=big_t {
        let g = lift.unit(lift.g_index(t));
        objective.add_sym_outer(1.0, &g, &lift.iterate(schedule, t));
        objective.add_sym_outer(-1.0, &g, &xs);
    }

    let mut constraints = Vec::new();
    for t in 1..=big_t {
        let g = lift.unit(lift.g_index(t));
        constraints.push(GramConstraint {
            matrix: SymSparse::sym_outer(&g, &g),
            rhs: l2,
            sense: Sense::Le,
            tag: ConstraintTag::Lipschitz,
            key: ConstraintKey::Lipschitz(t),
        });
    }
    let pts = domain_points(schedule, &lift);
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = diff(&pts[i].1, &pts[j].1);
            constraints.push(GramConstraint {
                matrix: SymSparse::sym_outer(&d, &d),
                rhs: d2,
                sense: Sense::Le,
                tag: ConstraintTag::Diameter,
                key: ConstraintKey::Diameter(pts[i].0, pts[j].0),
            });
        }
    }
    for t in 1..big_t {
        let dir = lift.direction(schedule, t);
        let vt = lift.unit(lift.v_index(t));
        for (p, u) in &pts {
            if *p == Point::V(t) {
                continue;
            }
            constraints.push(GramConstraint {
                matrix: SymSparse::sym_outer(&dir, &diff(&vt, u)),
                rhs: 0.0,
                sense: Sense::Le,
                tag: ConstraintTag::Boundary,
                key: ConstraintKey::Boundary { t, u: *p },
            });
        }
    }
    Ok(GramSdp {
        basis: lift.basis,
        objective,
        constraints,
        direction: Direction::Max,
    })
}

/// `T L² + T D²`: bound on `tr G` for every feasible Gram matrix of `B_T`.
pub fn primal_trace_bound(setting: &ProblemSetting) -> f64 {
    let t = setting.horizon as f64;
    t * setting.lipschitz * setting.lipschitz + t * setting.diameter * setting.diameter
}

fn is_forward(t: usize, u: Point) -> bool {
    match u {
        Point::V(s) => s > t,
        Point::XStar => true,
        _ => false,
    }
}

/// Dual of a maximisation Gram program: one nonnegative multiplier per
/// inequality, `min Σ λ_i b_i` subject to `Σ λ_i A_i − A_obj ⪰ 0`.
///
/// Variables are in the order of `primal.constraints`; `keep` filters rows
/// (dropped rows have their multiplier fixed at zero).
fn lagrange_dual(
    primal: &GramSdp,
    keep: impl Fn(&GramConstraint) -> bool,
) -> Result<(LmiSdp, Vec<usize>)> {
    if primal.direction != Direction::Max {
        return Err(Error::Unsupported("dual of a minimisation program"));
    }
    let mut lmi = LmiSdp::new(primal.basis.clone());
    lmi.constant = primal.objective.scaled(-1.0);
    let mut rows = Vec::new();
    for (i, c) in primal.constraints.iter().enumerate() {
        if !keep(c) {
            continue;
        }
        let name = match c.key {
            ConstraintKey::Lipschitz(t) => format!("lip[{t}]"),
            ConstraintKey::Diameter(p, q) => format!("diam[{p},{q}]"),
            ConstraintKey::Boundary { t, u } => format!("brd[v{t},{u}]"),
            ConstraintKey::Other => format!("row{i}"),
        };
        lmi.add_var(name, c.sense == Sense::Le, c.rhs, c.matrix.clone());
        rows.push(i);
    }
    Ok((lmi, rows))
}

/// Dual program with its map back to primal constraint rows.
#[derive(Clone, Debug)]
pub struct DualProgram {
    pub lmi: LmiSdp,
    /// `rows[k]` is the primal constraint priced by variable `k`.
    pub rows: Vec<usize>,
    pub num_primal_rows: usize,
}

impl DualProgram {
    /// Multipliers laid out per primal constraint (zeros for dropped rows).
    pub fn expand(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_primal_rows];
        for (k, &i) in self.rows.iter().enumerate() {
            out[i] = w[k];
        }
        out
    }
}

pub fn build_dual(schedule: &ParamSchedule, setting: &ProblemSetting) -> Result<DualProgram> {
    let primal = build_primal(schedule, setting)?;
    let (lmi, rows) = lagrange_dual(&primal, |_| true)?;
    Ok(DualProgram {
        lmi,
        rows,
        num_primal_rows: primal.constraints.len(),
    })
}

/// Dual keeping only forward-looking boundary multipliers
/// (`u ∈ {v_{t+1}, …, v_{T−1}, x⋆}`); its value upper-bounds the full dual.
pub fn build_relaxed_dual(
    schedule: &ParamSchedule,
    setting: &ProblemSetting,
) -> Result<DualProgram> {
    let primal = build_primal(schedule, setting)?;
    let (lmi, rows) = lagrange_dual(&primal, |c| match c.key {
        ConstraintKey::Boundary { t, u } => is_forward(t, u),
        _ => true,
    })?;
    Ok(DualProgram {
        lmi,
        rows,
        num_primal_rows: primal.constraints.len(),
    })
}
