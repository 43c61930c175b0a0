//! Problem settings and coefficient schedules of the general scheme.
//!
//! Indices are 1-based in the accessors, matching the usual notation:
//! `eta(t, s)` for `1 ≤ s ≤ t ≤ T−1`, `beta(t, s)` for `1 ≤ s < t ≤ T−1` and
//! `gamma(t, s)` for `2 ≤ t ≤ T`, `1 ≤ s < t`. Storage is ragged: row `t−1`
//! of `eta` has `t` entries, rows of `beta` and `gamma` have `t−1` entries
//! (so row 0 of `gamma` is always empty).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::num::{abs, powf, sqrt};
use crate::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Gradient bound `L`, diameter `D` and horizon `T`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ProblemSetting {
    #[cfg_attr(feature = "serde", serde(rename = "L"))]
    pub lipschitz: f64,
    #[cfg_attr(feature = "serde", serde(rename = "D"))]
    pub diameter: f64,
    #[cfg_attr(feature = "serde", serde(rename = "T"))]
    pub horizon: usize,
}

impl ProblemSetting {
    pub fn new(horizon: usize, lipschitz: f64, diameter: f64) -> Result<Self> {
        let s = Self {
            lipschitz,
            diameter,
            horizon,
        };
        s.check()?;
        Ok(s)
    }

    pub fn unit(horizon: usize) -> Result<Self> {
        Self::new(horizon, 1.0, 1.0)
    }

    pub fn check(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(Error::Horizon {
                min: 1,
                got: self.horizon,
            });
        }
        positive("L", self.lipschitz)?;
        positive("D", self.diameter).map(|_| ())
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ScheduleMeta {
    pub name: String,
    pub hull_safe: bool,
    pub notes: Vec<String>,
}

/// Triangular coefficient arrays `{η, β, γ}` of one algorithm instance.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ParamSchedule {
    #[cfg_attr(feature = "serde", serde(rename = "T"))]
    pub horizon: usize,
    pub eta: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
    pub gamma: Vec<Vec<f64>>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub meta: ScheduleMeta,
}

impl ParamSchedule {
    /// All-zero schedule of the right shape.
    pub fn zeros(horizon: usize) -> Result<Self> {
        if horizon < 1 {
            return Err(Error::Horizon {
                min: 1,
                got: horizon,
            });
        }
        let steps = horizon - 1;
        Ok(Self {
            horizon,
            eta: (1..=steps).map(|t| vec![0.0; t]).collect(),
            beta: (1..=steps).map(|t| vec![0.0; t - 1]).collect(),
            gamma: (1..=horizon).map(|t| vec![0.0; t - 1]).collect(),
            meta: ScheduleMeta {
                name: String::from("zero"),
                hull_safe: true,
                notes: Vec::new(),
            },
        })
    }

    pub fn eta(&self, t: usize, s: usize) -> f64 {
        self.eta[t - 1][s - 1]
    }

    pub fn beta(&self, t: usize, s: usize) -> f64 {
        self.beta[t - 1][s - 1]
    }

    pub fn gamma(&self, t: usize, s: usize) -> f64 {
        self.gamma[t - 1][s - 1]
    }

    pub fn set_eta(&mut self, t: usize, s: usize, v: f64) {
        self.eta[t - 1][s - 1] = v;
    }

    pub fn set_beta(&mut self, t: usize, s: usize, v: f64) {
        self.beta[t - 1][s - 1] = v;
    }

    pub fn set_gamma(&mut self, t: usize, s: usize, v: f64) {
        self.gamma[t - 1][s - 1] = v;
    }

    /// Checks shapes and finiteness; the `hull_safe` flag itself is not checked.
    pub fn check_shape(&self) -> Result<()> {
        let report = validate(self);
        match report.shape_violations.first() {
            Some(msg) => Err(Error::Shape(msg.clone())),
            None if !report.non_finite.is_empty() => Err(Error::NonFinite("schedule")),
            None => Ok(()),
        }
    }

    /// Whether the `γ` rows are sub-probability vectors (tolerance `1e−12`).
    pub fn is_hull_safe(&self) -> bool {
        validate(self).hull_safe
    }

    /// Multiplies every `η` entry by `factor`.
    pub fn scale_eta(&mut self, factor: f64) {
        for row in &mut self.eta {
            for v in row {
                *v *= factor;
            }
        }
    }
}

/// Step size and mixing weight of the tuned OFW algorithm for horizon `T`.
pub fn ofw_step_params(horizon: usize, lipschitz: f64, diameter: f64) -> (f64, f64) {
    let t = horizon as f64;
    let eta = diameter / (2.0 * lipschitz) * powf(3.0 / t, 0.75);
    let sigma = sqrt(3.0 / t).min(1.0);
    (eta, sigma)
}

fn check_inputs(horizon: usize, lipschitz: f64, diameter: f64) -> Result<()> {
    ProblemSetting::new(horizon, lipschitz, diameter).map(|_| ())
}

/// Fills `γ` from per-step mixing weights: `x_{t+1} = (1 − σ_t) x_t + σ_t v_t`.
fn mixing_gamma(horizon: usize, sigma: impl Fn(usize) -> f64) -> Vec<Vec<f64>> {
    let mut gamma: Vec<Vec<f64>> = vec![Vec::new()];
    for t in 1..horizon {
        let st = sigma(t);
        let prev = &gamma[t - 1];
        let mut row: Vec<f64> = prev.iter().map(|g| (1.0 - st) * g).collect();
        row.push(st);
        gamma.push(row);
    }
    gamma
}

/// `β_{t,s} = γ_{t,s}` for `t ≤ T−1`.
fn beta_from_gamma(gamma: &[Vec<f64>], horizon: usize) -> Vec<Vec<f64>> {
    gamma.iter().take(horizon - 1).cloned().collect()
}

/// Fixed-step OFW (`η, σ`) written in the general form.
pub fn preset_ofw_new(horizon: usize, lipschitz: f64, diameter: f64) -> Result<ParamSchedule> {
    check_inputs(horizon, lipschitz, diameter)?;
    let (eta, sigma) = ofw_step_params(horizon, lipschitz, diameter);
    let gamma = mixing_gamma(horizon, |_| sigma);
    Ok(ParamSchedule {
        horizon,
        eta: (1..horizon).map(|t| vec![eta; t]).collect(),
        beta: beta_from_gamma(&gamma, horizon),
        gamma,
        meta: ScheduleMeta {
            name: String::from("ofw-new"),
            hull_safe: true,
            notes: vec![format!("eta = {eta}, sigma = {sigma}")],
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum HazanVariant {
    /// `γ_{t,t−1} = 1/√t`
    Thm44,
    /// `γ_{t,t−1} = min(1, 2/√t)`
    Alg27,
}

impl HazanVariant {
    fn step(self, t: usize) -> f64 {
        let t = t as f64;
        match self {
            Self::Thm44 => 1.0 / sqrt(t),
            Self::Alg27 => (2.0 / sqrt(t)).min(1.0),
        }
    }
}

fn hazan_gamma(horizon: usize, variant: HazanVariant) -> Vec<Vec<f64>> {
    // γ_{t,t−1} = c_t uses the mixing recursion with σ_{t−1} = c_t.
    mixing_gamma(horizon, |t| variant.step(t + 1))
}

pub fn preset_hazan(
    horizon: usize,
    lipschitz: f64,
    diameter: f64,
    variant: HazanVariant,
) -> Result<ParamSchedule> {
    check_inputs(horizon, lipschitz, diameter)?;
    let eta = diameter / (2.0 * lipschitz * powf(horizon as f64, 0.75));
    let gamma = hazan_gamma(horizon, variant);
    let name = match variant {
        HazanVariant::Thm44 => "hazan-thm44",
        HazanVariant::Alg27 => "hazan-alg27",
    };
    Ok(ParamSchedule {
        horizon,
        eta: (1..horizon).map(|t| vec![eta; t]).collect(),
        beta: beta_from_gamma(&gamma, horizon),
        gamma,
        meta: ScheduleMeta {
            name: String::from(name),
            hull_safe: true,
            notes: vec![format!("eta = {eta}")],
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum AnytimeBase {
    OfwNew,
    HazanAlg27,
}

/// Replaces the horizon `T` by the current step `t` in the scalar parameters.
pub fn preset_anytime(
    base: AnytimeBase,
    horizon: usize,
    lipschitz: f64,
    diameter: f64,
) -> Result<ParamSchedule> {
    check_inputs(horizon, lipschitz, diameter)?;
    let (gamma, eta, name, note) = match base {
        AnytimeBase::OfwNew => (
            mixing_gamma(horizon, |t| ofw_step_params(t, lipschitz, diameter).1),
            (1..horizon)
                .map(|t| vec![ofw_step_params(t, lipschitz, diameter).0; t])
                .collect::<Vec<_>>(),
            "anytime-ofw-new",
            "eta_t = (D/2L)(3/t)^(3/4), sigma_t = min(1, sqrt(3/t))",
        ),
        AnytimeBase::HazanAlg27 => (
            hazan_gamma(horizon, HazanVariant::Alg27),
            (1..horizon)
                .map(|t| vec![diameter / (2.0 * lipschitz * powf(t as f64, 0.75)); t])
                .collect(),
            "anytime-hazan-alg27",
            "eta_{t,s} = D/(2L t^(3/4)); gamma as in the fixed-horizon variant",
        ),
    };
    Ok(ParamSchedule {
        horizon,
        eta,
        beta: beta_from_gamma(&gamma, horizon),
        gamma,
        meta: ScheduleMeta {
            name: String::from(name),
            hull_safe: true,
            notes: vec![String::from(note), String::from("beta = gamma")],
        },
    })
}

/// Jointly optimised coefficients for `L = D = 1` and `T = 2..=6`, `η ≡ 1`.
const TABLE_GAMMA: [&[&[f64]]; 5] = [
    &[&[], &[0.5]],
    &[&[], &[0.5], &[0.3118, 0.3764]],
    &[&[], &[0.5], &[0.3133, 0.3734], &[0.1843, 0.2197, 0.4116]],
    &[
        &[],
        &[0.5],
        &[0.3067, 0.3866],
        &[0.2124, 0.2677, 0.3075],
        &[0.1201, 0.1514, 0.1739, 0.4345],
    ],
    &[
        &[],
        &[0.5],
        &[0.3068, 0.3863],
        &[0.2101, 0.2646, 0.3151],
        &[0.1406, 0.177, 0.2108, 0.3309],
        &[0.0784, 0.0985, 0.1174, 0.1842, 0.4432],
    ],
];

const TABLE_BETA: [&[&[f64]]; 5] = [
    &[&[]],
    &[&[], &[-0.1099]],
    &[&[], &[0.1961], &[-0.4249, 0.1465]],
    &[
        &[],
        &[0.5649],
        &[-0.2595, 0.212],
        &[-0.6282, -0.253, 0.3473],
    ],
    &[
        &[],
        &[0.5856],
        &[-0.0481, 0.4808],
        &[-0.5053, -0.0949, 0.3922],
        &[-0.7675, -0.4251, -0.001, 0.3876],
    ],
];

/// Published optimised schedule for `T ∈ 2..=6`; `η ≡ D/L` by homogeneity.
pub fn preset_tabulated(horizon: usize, lipschitz: f64, diameter: f64) -> Result<ParamSchedule> {
    check_inputs(horizon, lipschitz, diameter)?;
    if !(2..=6).contains(&horizon) {
        return Err(Error::NotApplicable(
            "tabulated schedules exist for T = 2..6 only",
        ));
    }
    let k = horizon - 2;
    let to_rows = |t: &[&[f64]]| t.iter().map(|r| r.to_vec()).collect::<Vec<_>>();
    let eta = diameter / lipschitz;
    let mut s = ParamSchedule {
        horizon,
        eta: (1..horizon).map(|t| vec![eta; t]).collect(),
        beta: to_rows(TABLE_BETA[k]),
        gamma: to_rows(TABLE_GAMMA[k]),
        meta: ScheduleMeta {
            name: String::from("b3-opt"),
            hull_safe: false,
            notes: vec![String::from("four-digit published values")],
        },
    };
    s.meta.hull_safe = s.is_hull_safe();
    Ok(s)
}

/// Findings of [`validate`].
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ValidationReport {
    pub shape_violations: Vec<String>,
    pub non_finite: Vec<String>,
    pub hull_violations: Vec<String>,
    pub hull_safe: bool,
}

impl ValidationReport {
    pub fn is_well_formed(&self) -> bool {
        self.shape_violations.is_empty() && self.non_finite.is_empty()
    }
}

const HULL_TOL: f64 = 1e-12;

pub fn validate(s: &ParamSchedule) -> ValidationReport {
    let mut r = ValidationReport::default();
    let big_t = s.horizon;
    if big_t == 0 {
        r.shape_violations
            .push(String::from("T must be at least 1"));
        return r;
    }
    let check_rows = |name: &str,
                      rows: &[Vec<f64>],
                      count: usize,
                      len: &dyn Fn(usize) -> usize,
                      r: &mut ValidationReport| {
        if rows.len() != count {
            r.shape_violations.push(format!(
                "{name}: expected {count} rows, found {}",
                rows.len()
            ));
        }
        for (i, row) in rows.iter().enumerate() {
            let t = i + 1;
            if row.len() != len(t) {
                r.shape_violations.push(format!(
                    "{name}[{t}]: expected {} entries, found {}",
                    len(t),
                    row.len()
                ));
            }
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    r.non_finite.push(format!("{name}[{t}][{}] = {v}", j + 1));
                }
            }
        }
    };
    check_rows("eta", &s.eta, big_t - 1, &|t| t, &mut r);
    check_rows("beta", &s.beta, big_t - 1, &|t| t - 1, &mut r);
    check_rows("gamma", &s.gamma, big_t, &|t| t - 1, &mut r);
    for (i, row) in s.gamma.iter().enumerate() {
        let t = i + 1;
        for (j, v) in row.iter().enumerate() {
            if *v < -HULL_TOL {
                r.hull_violations
                    .push(format!("gamma[{t}][{}] = {v} is negative", j + 1));
            }
        }
        let sum: f64 = row.iter().sum();
        if sum > 1.0 + HULL_TOL {
            r.hull_violations
                .push(format!("gamma[{t}] sums to {sum} > 1"));
        }
    }
    r.hull_safe = r.hull_violations.is_empty() && r.is_well_formed();
    r
}

/// Several oracle calls per round, atoms ordered lexicographically in `(t, k)`.
///
/// Atom `(t, k)` has flat index `(t−1)·r + (k−1)`. For `t ≤ T−1` and
/// `k ≤ r`: `eta[t−1][k−1]` has `t` entries, `beta[t−1][k−1]` has one entry
/// per earlier atom; for `t ≤ T`, `gamma[t−1]` has one entry per atom of the
/// rounds before `t`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MultiRoundSchedule {
    #[cfg_attr(feature = "serde", serde(rename = "T"))]
    pub horizon: usize,
    pub rounds: usize,
    pub eta: Vec<Vec<Vec<f64>>>,
    pub beta: Vec<Vec<Vec<f64>>>,
    pub gamma: Vec<Vec<f64>>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub meta: ScheduleMeta,
}

impl MultiRoundSchedule {
    pub fn atom_index(&self, t: usize, k: usize) -> usize {
        (t - 1) * self.rounds + (k - 1)
    }

    pub fn zeros(horizon: usize, rounds: usize) -> Result<Self> {
        if horizon < 1 {
            return Err(Error::Horizon {
                min: 1,
                got: horizon,
            });
        }
        if rounds < 1 {
            return Err(Error::InvalidParameter {
                name: "rounds",
                value: rounds as f64,
            });
        }
        let steps = horizon - 1;
        Ok(Self {
            horizon,
            rounds,
            eta: (1..=steps).map(|t| vec![vec![0.0; t]; rounds]).collect(),
            beta: (1..=steps)
                .map(|t| {
                    (1..=rounds)
                        .map(|k| vec![0.0; (t - 1) * rounds + k - 1])
                        .collect()
                })
                .collect(),
            gamma: (1..=horizon).map(|t| vec![0.0; (t - 1) * rounds]).collect(),
            meta: ScheduleMeta {
                name: String::from("zero"),
                hull_safe: true,
                notes: Vec::new(),
            },
        })
    }

    /// The single-call schedule viewed as `r = 1`.
    pub fn from_single(s: &ParamSchedule) -> Self {
        Self {
            horizon: s.horizon,
            rounds: 1,
            eta: s.eta.iter().map(|row| vec![row.clone()]).collect(),
            beta: s.beta.iter().map(|row| vec![row.clone()]).collect(),
            gamma: s.gamma.clone(),
            meta: s.meta.clone(),
        }
    }

    /// Checks that every row references only atoms strictly earlier in the
    /// lexicographic order.
    pub fn check_lex(&self) -> Result<()> {
        let r = self.rounds;
        if r == 0 {
            return Err(Error::LexOrder(String::from("rounds must be at least 1")));
        }
        let steps = self.horizon.saturating_sub(1);
        if self.eta.len() != steps || self.beta.len() != steps || self.gamma.len() != self.horizon {
            return Err(Error::LexOrder(String::from("wrong number of rows")));
        }
        for t in 1..=steps {
            if self.eta[t - 1].len() != r || self.beta[t - 1].len() != r {
                return Err(Error::LexOrder(format!("round {t} needs {r} directions")));
            }
            for k in 1..=r {
                if self.eta[t - 1][k - 1].len() != t {
                    return Err(Error::LexOrder(format!(
                        "eta[{t}][{k}] must have {t} entries"
                    )));
                }
                let allowed = self.atom_index(t, k);
                if self.beta[t - 1][k - 1].len() != allowed {
                    return Err(Error::LexOrder(format!(
                        "beta[{t}][{k}] has {} entries but only {allowed} atoms precede ({t},{k})",
                        self.beta[t - 1][k - 1].len()
                    )));
                }
            }
        }
        for t in 1..=self.horizon {
            if self.gamma[t - 1].len() != (t - 1) * r {
                return Err(Error::LexOrder(format!(
                    "gamma[{t}] must have {} entries",
                    (t - 1) * r
                )));
            }
        }
        let finite = self
            .eta
            .iter()
            .chain(&self.beta)
            .flatten()
            .flatten()
            .chain(self.gamma.iter().flatten())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite("multi-round schedule"));
        }
        Ok(())
    }

    pub fn is_hull_safe(&self) -> bool {
        self.gamma.iter().all(|row| {
            row.iter().all(|v| *v >= -HULL_TOL) && row.iter().sum::<f64>() <= 1.0 + HULL_TOL
        })
    }
}

/// Largest absolute entry difference between two schedules of equal shape.
pub fn max_abs_diff(a: &ParamSchedule, b: &ParamSchedule) -> Option<f64> {
    if a.horizon != b.horizon {
        return None;
    }
    let mut worst: f64 = 0.0;
    for (ra, rb) in a
        .eta
        .iter()
        .chain(&a.beta)
        .chain(&a.gamma)
        .zip(b.eta.iter().chain(&b.beta).chain(&b.gamma))
    {
        if ra.len() != rb.len() {
            return None;
        }
        for (x, y) in ra.iter().zip(rb) {
            worst = worst.max(abs(x - y));
        }
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn ofw_new_small_horizon() {
        let s = preset_ofw_new(3, 1.0, 1.0).unwrap();
        assert!(close(s.eta(1, 1), 0.5));
        assert!(close(s.gamma(2, 1), 1.0));
        assert!(close(s.gamma(3, 1), 0.0));
        assert!(close(s.gamma(3, 2), 1.0));
        assert_eq!(s.beta, vec![vec![], vec![1.0]]);
        assert!(s.meta.hull_safe);
    }

    #[test]
    fn ofw_new_power_of_two() {
        let (eta, sigma) = ofw_step_params(48, 1.0, 1.0);
        assert!(close(eta, 1.0 / 16.0));
        assert!(close(sigma, 0.25));
        let (eta, sigma) = ofw_step_params(12, 2.0, 4.0);
        assert!(close(eta, powf(4.0, -0.75)));
        assert!(close(sigma, 0.5));
    }

    #[test]
    fn ofw_new_recursion_holds_entrywise() {
        let s = preset_ofw_new(9, 1.0, 1.0).unwrap();
        let sigma = ofw_step_params(9, 1.0, 1.0).1;
        for t in 2..9 {
            for j in 1..t {
                assert_eq!(s.gamma(t + 1, j), (1.0 - sigma) * s.gamma(t, j));
            }
            assert_eq!(s.gamma(t + 1, t), sigma);
        }
    }

    #[test]
    fn hazan_variants() {
        let a = preset_hazan(4, 1.0, 1.0, HazanVariant::Alg27).unwrap();
        assert!(close(a.gamma(2, 1), 1.0));
        assert!(close(a.gamma(3, 2), 1.0));
        assert!(close(a.gamma(3, 1), 0.0));
        let b = preset_hazan(4, 1.0, 1.0, HazanVariant::Thm44).unwrap();
        assert!(close(b.gamma(2, 1), 1.0 / sqrt(2.0)));
        assert!(close(b.gamma(3, 2), 1.0 / sqrt(3.0)));
        assert!((b.gamma(3, 1) - 0.2989).abs() < 1e-4);
        let c = preset_hazan(16, 1.0, 1.0, HazanVariant::Thm44).unwrap();
        assert!(close(c.eta(5, 2), 1.0 / 16.0));
    }

    #[test]
    fn anytime_substitution() {
        let s = preset_anytime(AnytimeBase::OfwNew, 5, 1.0, 1.0).unwrap();
        // σ_t appears as γ_{t+1,t}.
        assert!(close(s.gamma(2, 1), 1.0));
        assert!(close(s.gamma(4, 3), 1.0));
        assert!(close(s.gamma(5, 4), sqrt(3.0) / 2.0));
        let fixed = preset_ofw_new(3, 1.0, 1.0).unwrap();
        let any = preset_anytime(AnytimeBase::OfwNew, 3, 1.0, 1.0).unwrap();
        assert_eq!(fixed.gamma, any.gamma);
        assert!(any.eta(1, 1) != fixed.eta(1, 1));
        assert!(any.eta(2, 1) != fixed.eta(2, 1));
        let h = preset_anytime(AnytimeBase::HazanAlg27, 4, 1.0, 1.0).unwrap();
        assert!(close(h.eta(2, 2), 1.0 / (2.0 * powf(2.0, 0.75))));
    }

    #[test]
    fn validation_flags_hull_violations() {
        assert!(validate(&preset_ofw_new(5, 1.0, 1.0).unwrap()).hull_safe);
        let mut s = ParamSchedule::zeros(3).unwrap();
        s.set_gamma(2, 1, 1.5);
        let r = validate(&s);
        assert!(!r.hull_safe);
        assert_eq!(r.hull_violations.len(), 1);
        let mut s = ParamSchedule::zeros(3).unwrap();
        s.set_gamma(3, 1, -0.1);
        assert!(!validate(&s).hull_safe);
        let mut s = ParamSchedule::zeros(3).unwrap();
        s.eta[0].push(1.0);
        assert!(!validate(&s).is_well_formed());
    }

    #[test]
    fn tabulated_shapes() {
        for t in 2..=6 {
            let s = preset_tabulated(t, 1.0, 1.0).unwrap();
            assert!(validate(&s).is_well_formed(), "T = {t}");
        }
        assert!(preset_tabulated(7, 1.0, 1.0).is_err());
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(preset_ofw_new(0, 1.0, 1.0).is_err());
        assert!(ProblemSetting::new(3, -1.0, 1.0).is_err());
        assert!(ProblemSetting::new(3, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn multiround_lex_discipline() {
        let m = MultiRoundSchedule::zeros(3, 2).unwrap();
        assert!(m.check_lex().is_ok());
        let mut bad = m.clone();
        bad.beta[0][0].push(0.3);
        assert!(matches!(bad.check_lex(), Err(Error::LexOrder(_))));
        let single = MultiRoundSchedule::from_single(&preset_ofw_new(4, 1.0, 1.0).unwrap());
        assert!(single.check_lex().is_ok());
    }
}
