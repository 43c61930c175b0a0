//! Replays of the general scheme, fixed-step OFW, FTRL and the multi-round scheme
//! on explicit domains with linear losses.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::Matrix;
use crate::model::{MultiRoundSchedule, ParamSchedule};
use crate::num::{abs, axpy, dist, dot, norm, sub};
use crate::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "lowercase"))]
pub enum Domain {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    /// Probability simplex `{x ≥ 0, Σ x_i = 1}` in `R^dim`.
    Simplex {
        dim: usize,
    },
    Hull {
        vertices: Vec<Vec<f64>>,
    },
}

impl Domain {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        crate::model::positive("radius", radius)?;
        Ok(Self::Ball { center, radius })
    }

    pub fn cube(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(Error::InvalidParameter {
                name: "box bounds",
                value: upper - lower,
            });
        }
        Ok(Self::Box {
            lower: vec![lower; dim],
            upper: vec![upper; dim],
        })
    }

    pub fn hull(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let d = vertices
            .first()
            .map(Vec::len)
            .ok_or(Error::InvalidParameter {
                name: "hull vertex count",
                value: 0.0,
            })?;
        if let Some(v) = vertices.iter().find(|v| v.len() != d) {
            return Err(Error::DimensionMismatch {
                what: "hull vertex",
                expected: d,
                got: v.len(),
            });
        }
        Ok(Self::Hull { vertices })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Ball { center, .. } => center.len(),
            Self::Box { lower, .. } => lower.len(),
            Self::Simplex { dim } => *dim,
            Self::Hull { vertices } => vertices.first().map_or(0, Vec::len),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Self::Ball { radius, .. } => 2.0 * radius,
            Self::Box { lower, upper } => dist(lower, upper),
            Self::Simplex { dim } => {
                if *dim >= 2 {
                    core::f64::consts::SQRT_2
                } else {
                    0.0
                }
            }
            Self::Hull { vertices } => {
                let mut d: f64 = 0.0;
                for (i, a) in vertices.iter().enumerate() {
                    for b in &vertices[i + 1..] {
                        d = d.max(dist(a, b));
                    }
                }
                d
            }
        }
    }

    /// A minimiser of `⟨dir, v⟩` over the domain, ties broken by lowest index.
    pub fn lmo(&self, dir: &[f64]) -> Result<Vec<f64>> {
        if dir.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "direction",
                expected: self.dim(),
                got: dir.len(),
            });
        }
        if dir.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("direction"));
        }
        Ok(match self {
            Self::Ball { center, radius } => {
                let n = norm(dir);
                let mut v = center.clone();
                if n > 0.0 {
                    axpy(-radius / n, dir, &mut v);
                }
                v
            }
            Self::Box { lower, upper } => dir
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(d, (l, u))| if *d < 0.0 { *u } else { *l })
                .collect(),
            Self::Simplex { dim } => {
                let i = argmin(dir.iter().copied());
                let mut v = vec![0.0; *dim];
                v[i] = 1.0;
                v
            }
            Self::Hull { vertices } => {
                let i = argmin(vertices.iter().map(|v| dot(v, dir)));
                vertices[i].clone()
            }
        })
    }

    /// Minimum of `⟨dir, v⟩` over the domain.
    pub fn support_min(&self, dir: &[f64]) -> Result<f64> {
        Ok(dot(dir, &self.lmo(dir)?))
    }

    /// Euclidean projection; only balls and boxes have a closed form.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Self::Ball { center, radius } => {
                let diff = sub(x, center);
                let n = norm(&diff);
                if n <= *radius {
                    Ok(x.to_vec())
                } else {
                    let mut p = center.clone();
                    axpy(radius / n, &diff, &mut p);
                    Ok(p)
                }
            }
            Self::Box { lower, upper } => Ok(x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(v, (l, u))| v.clamp(*l, *u))
                .collect()),
            _ => Err(Error::Unsupported(
                "closed-form projection needs a ball or a box",
            )),
        }
    }

    /// Distance-like infeasibility of `x`; zero for members.
    ///
    /// For hulls this is the Euclidean distance to the hull.
    pub fn membership_residual(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "point",
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(match self {
            Self::Ball { center, radius } => (dist(x, center) - radius).max(0.0),
            Self::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(v, (l, u))| (l - v).max(v - u).max(0.0))
                .fold(0.0, f64::max),
            Self::Simplex { .. } => {
                let neg = x.iter().map(|v| (-v).max(0.0)).fold(0.0, f64::max);
                neg.max(abs(x.iter().sum::<f64>() - 1.0))
            }
            Self::Hull { vertices } => hull_residual(vertices, x)?,
        })
    }

    /// The domain shifted by `c`. Simplices become hulls.
    pub fn translate(&self, c: &[f64]) -> Domain {
        let shift = |v: &[f64]| v.iter().zip(c).map(|(a, b)| a + b).collect::<Vec<_>>();
        match self {
            Self::Ball { center, radius } => Self::Ball {
                center: shift(center),
                radius: *radius,
            },
            Self::Box { lower, upper } => Self::Box {
                lower: shift(lower),
                upper: shift(upper),
            },
            Self::Simplex { dim } => Self::Hull {
                vertices: (0..*dim)
                    .map(|i| {
                        let mut e = vec![0.0; *dim];
                        e[i] = 1.0;
                        shift(&e)
                    })
                    .collect(),
            },
            Self::Hull { vertices } => Self::Hull {
                vertices: vertices.iter().map(|v| shift(v)).collect(),
            },
        }
    }
}

fn argmin(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::INFINITY;
    for (i, v) in values.enumerate() {
        if v < best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

/// Affine minimiser of `‖Σ α_i p_i‖` over `Σ α_i = 1` for the points in `set`.
fn affine_minimiser(pts: &[Vec<f64>], set: &[usize]) -> Option<Vec<f64>> {
    let m = Matrix::from_fn(set.len(), set.len(), |i, j| {
        1.0 + dot(&pts[set[i]], &pts[set[j]])
    });
    let a = m.cholesky()?.solve(&vec![1.0; set.len()]);
    let total: f64 = a.iter().sum();
    (total.is_finite() && total != 0.0).then(|| a.iter().map(|v| v / total).collect())
}

/// Euclidean distance from `x` to the hull, by the minimum-norm-point
/// algorithm on the shifted vertices `v_j − x`.
fn hull_residual(vertices: &[Vec<f64>], x: &[f64]) -> Result<f64> {
    let pts: Vec<Vec<f64>> = vertices.iter().map(|v| sub(v, x)).collect();
    let scale = pts.iter().map(|p| dot(p, p)).fold(0.0, f64::max);
    let eps = 1e-14 * scale.max(f64::MIN_POSITIVE);
    let start = argmin(pts.iter().map(|p| dot(p, p)));
    let mut set = vec![start];
    let mut lam = vec![1.0];
    let mut y = pts[start].clone();
    let combine = |set: &[usize], w: &[f64]| {
        let mut y = vec![0.0; x.len()];
        for (&i, &wi) in set.iter().zip(w) {
            axpy(wi, &pts[i], &mut y);
        }
        y
    };
    for _ in 0..100 * (pts.len() + x.len() + 1) {
        let j = argmin(pts.iter().map(|p| dot(&y, p)));
        if dot(&y, &y) - dot(&y, &pts[j]) <= eps || set.contains(&j) {
            break;
        }
        set.push(j);
        lam.push(0.0);
        loop {
            let Some(alpha) = affine_minimiser(&pts, &set) else {
                return Ok(norm(&y));
            };
            if alpha.iter().all(|&a| a > 1e-15) {
                lam = alpha;
                break;
            }
            let theta = lam
                .iter()
                .zip(&alpha)
                .filter(|(_, a)| **a <= 1e-15)
                .map(|(l, a)| l / (l - a))
                .fold(1.0, f64::min);
            for (l, a) in lam.iter_mut().zip(&alpha) {
                *l += theta * (a - *l);
            }
            let drop = argmin(lam.iter().copied());
            let keep: Vec<bool> = lam
                .iter()
                .enumerate()
                .map(|(k, &l)| k != drop && l > 1e-15)
                .collect();
            set = set
                .iter()
                .zip(&keep)
                .filter(|(_, k)| **k)
                .map(|(i, _)| *i)
                .collect();
            lam = lam
                .iter()
                .zip(&keep)
                .filter(|(_, k)| **k)
                .map(|(l, _)| *l)
                .collect();
            let total: f64 = lam.iter().sum();
            for l in &mut lam {
                *l /= total;
            }
        }
        y = combine(&set, &lam);
    }
    Ok(norm(&y))
}

/// Loss gradients `g_1..g_T`.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct GradientSequence(pub Vec<Vec<f64>>);

impl GradientSequence {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.0.first().map_or(0, Vec::len)
    }

    pub fn max_norm(&self) -> f64 {
        self.0.iter().map(|g| norm(g)).fold(0.0, f64::max)
    }

    fn check(&self, dim: usize, needed: usize) -> Result<()> {
        if self.len() != needed {
            return Err(Error::DimensionMismatch {
                what: "gradient count",
                expected: needed,
                got: self.len(),
            });
        }
        if let Some(g) = self.0.iter().find(|g| g.len() != dim) {
            return Err(Error::DimensionMismatch {
                what: "gradient",
                expected: dim,
                got: g.len(),
            });
        }
        if self.0.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("gradient"));
        }
        Ok(())
    }
}

impl From<Vec<Vec<f64>>> for GradientSequence {
    fn from(v: Vec<Vec<f64>>) -> Self {
        Self(v)
    }
}

/// One run: iterates, atoms, directions, gradients and linear losses.
///
/// `x[t−1]` is `x_t`. Fixed-step OFW and FTRL runs also record `x_{T+1}`,
/// and fixed-step OFW records `v_T`; neither enters the regret.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Trace {
    pub x: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub dirs: Vec<Vec<f64>>,
    pub grads: Vec<Vec<f64>>,
    pub losses: Vec<f64>,
}

impl Trace {
    pub fn horizon(&self) -> usize {
        self.grads.len()
    }

    /// `Σ_t ⟨g_t, x_t⟩`
    pub fn total_loss(&self) -> f64 {
        self.losses.iter().sum()
    }

    /// `G_T = Σ_t g_t`
    pub fn gradient_sum(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.grads.first().map_or(0, Vec::len)];
        for g in &self.grads {
            axpy(1.0, g, &mut s);
        }
        s
    }
}

/// `Σ_t ⟨g_t, x_t − x⋆⟩`
pub fn regret(trace: &Trace, x_star: &[f64]) -> f64 {
    trace
        .grads
        .iter()
        .zip(&trace.x)
        .map(|(g, x)| dot(g, x) - dot(g, x_star))
        .sum()
}

/// Regret against the best comparator in the domain.
pub fn sup_regret(trace: &Trace, domain: &Domain) -> Result<f64> {
    let best = domain.lmo(&trace.gradient_sum())?;
    Ok(regret(trace, &best))
}

fn check_start(domain: &Domain, x1: &[f64]) -> Result<()> {
    if x1.len() != domain.dim() {
        return Err(Error::DimensionMismatch {
            what: "initial point",
            expected: domain.dim(),
            got: x1.len(),
        });
    }
    Ok(())
}

/// Runs the general scheme with the domain's own oracle.
pub fn run_general(
    schedule: &ParamSchedule,
    domain: &Domain,
    x1: &[f64],
    grads: &GradientSequence,
) -> Result<Trace> {
    check_start(domain, x1)?;
    run_general_with(schedule, x1, grads, |_, dir| domain.lmo(dir))
}

/// Runs the general scheme with a caller-supplied oracle `(t, dir_t) ↦ v_t`.
pub fn run_general_with(
    schedule: &ParamSchedule,
    x1: &[f64],
    grads: &GradientSequence,
    mut oracle: impl FnMut(usize, &[f64]) -> Result<Vec<f64>>,
) -> Result<Trace> {
    schedule.check_shape()?;
    let big_t = schedule.horizon;
    let d = x1.len();
    grads.check(d, big_t)?;
    let mut tr = Trace {
        grads: grads.0.clone(),
        ..Trace::default()
    };
    // Atom offsets v_s − x_1.
    let mut offsets: Vec<Vec<f64>> = Vec::with_capacity(big_t);
    for t in 1..=big_t {
        let mut x = x1.to_vec();
        for s in 1..t {
            axpy(schedule.gamma(t, s), &offsets[s - 1], &mut x);
        }
        tr.losses.push(dot(&grads.0[t - 1], &x));
        tr.x.push(x);
        if t < big_t {
            let mut dir = vec![0.0; d];
            for s in 1..=t {
                axpy(schedule.eta(t, s), &grads.0[s - 1], &mut dir);
            }
            for s in 1..t {
                axpy(schedule.beta(t, s), &offsets[s - 1], &mut dir);
            }
            let v = oracle(t, &dir)?;
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    what: "oracle atom",
                    expected: d,
                    got: v.len(),
                });
            }
            offsets.push(sub(&v, x1));
            tr.v.push(v);
            tr.dirs.push(dir);
        }
    }
    Ok(tr)
}

/// OFW with fixed step size and mixing weight.
pub fn run_ofw_fixed(
    eta: f64,
    sigma: f64,
    domain: &Domain,
    x1: &[f64],
    grads: &GradientSequence,
) -> Result<Trace> {
    if !(0.0..=1.0).contains(&sigma) {
        return Err(Error::InvalidParameter {
            name: "sigma",
            value: sigma,
        });
    }
    check_start(domain, x1)?;
    let d = x1.len();
    grads.check(d, grads.len())?;
    let mut tr = Trace {
        grads: grads.0.clone(),
        ..Trace::default()
    };
    let mut x = x1.to_vec();
    let mut gsum = vec![0.0; d];
    for g in &grads.0 {
        tr.losses.push(dot(g, &x));
        axpy(1.0, g, &mut gsum);
        let mut dir = sub(&x, x1);
        axpy(eta, &gsum, &mut dir);
        let v = domain.lmo(&dir)?;
        let next: Vec<f64> = x
            .iter()
            .zip(&v)
            .map(|(xi, vi)| (1.0 - sigma) * xi + sigma * vi)
            .collect();
        tr.x.push(core::mem::replace(&mut x, next));
        tr.v.push(v);
        tr.dirs.push(dir);
    }
    tr.x.push(x);
    Ok(tr)
}

/// FTRL with quadratic regularisation centred at `y_1`; records `y_1..y_{T+1}`.
pub fn run_ftrl(eta: f64, domain: &Domain, y1: &[f64], grads: &GradientSequence) -> Result<Trace> {
    if !matches!(domain, Domain::Ball { .. } | Domain::Box { .. }) {
        return Err(Error::Unsupported("FTRL replay needs a ball or a box"));
    }
    check_start(domain, y1)?;
    let d = y1.len();
    grads.check(d, grads.len())?;
    let mut tr = Trace {
        grads: grads.0.clone(),
        ..Trace::default()
    };
    let mut y = y1.to_vec();
    let mut gsum = vec![0.0; d];
    for g in &grads.0 {
        tr.losses.push(dot(g, &y));
        axpy(1.0, g, &mut gsum);
        let mut target = y1.to_vec();
        axpy(-eta, &gsum, &mut target);
        let next = domain.project(&target)?;
        tr.x.push(core::mem::replace(&mut y, next));
    }
    tr.x.push(y);
    Ok(tr)
}

/// The multi-round scheme; atoms are recorded in lexicographic order.
pub fn run_multiround(
    schedule: &MultiRoundSchedule,
    domain: &Domain,
    x1: &[f64],
    grads: &GradientSequence,
) -> Result<Trace> {
    schedule.check_lex()?;
    check_start(domain, x1)?;
    let big_t = schedule.horizon;
    let r = schedule.rounds;
    let d = x1.len();
    grads.check(d, big_t)?;
    let mut tr = Trace {
        grads: grads.0.clone(),
        ..Trace::default()
    };
    let mut offsets: Vec<Vec<f64>> = Vec::new();
    for t in 1..=big_t {
        let mut x = x1.to_vec();
        for (q, w) in schedule.gamma[t - 1].iter().enumerate() {
            axpy(*w, &offsets[q], &mut x);
        }
        tr.losses.push(dot(&grads.0[t - 1], &x));
        tr.x.push(x);
        if t < big_t {
            for k in 1..=r {
                let mut dir = vec![0.0; d];
                for (s, w) in schedule.eta[t - 1][k - 1].iter().enumerate() {
                    axpy(*w, &grads.0[s], &mut dir);
                }
                for (q, w) in schedule.beta[t - 1][k - 1].iter().enumerate() {
                    axpy(*w, &offsets[q], &mut dir);
                }
                let v = domain.lmo(&dir)?;
                offsets.push(sub(&v, x1));
                tr.v.push(v);
                tr.dirs.push(dir);
            }
        }
    }
    Ok(tr)
}
