//! Parallel sweeps over the horizon, written as plot-ready CSV.

use std::io::Write;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use ofwpep_core::bounds::theorem1_bound;
use ofwpep_core::model::ProblemSetting;
use ofwpep_core::pep::JointOptions;
use ofwpep_core::sdp::SolverOptions;
use serde::Serialize;

use crate::commands::{joint_value, status_label, tight_value, ScheduleSource};
use crate::error::{AppError, AppResult};

pub const DEFAULT_MAX_T: usize = 64;
pub const THREADS_ENV: &str = "OFWPEP_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepMode {
    TightBound,
    JointOpt,
    JointOptBeta0,
    JointOptRounds(usize),
    ClosedForm,
}

impl FromStr for SweepMode {
    type Err = AppError;

    fn from_str(s: &str) -> AppResult<Self> {
        Ok(match s {
            "tight-bound" => Self::TightBound,
            "joint-opt" => Self::JointOpt,
            "joint-opt-beta0" => Self::JointOptBeta0,
            "closed-form" => Self::ClosedForm,
            other => match other
                .strip_prefix("joint-opt-rounds:")
                .map(str::parse::<usize>)
            {
                Some(Ok(r)) if r >= 1 => Self::JointOptRounds(r),
                _ => return Err(AppError::Input(format!("unknown sweep mode '{other}'"))),
            },
        })
    }
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub source: ScheduleSource,
    pub grid: Vec<usize>,
    pub lipschitz: f64,
    pub diameter: f64,
    pub mode: SweepMode,
    pub solver: SolverOptions,
    pub max_t: usize,
    pub threads: usize,
}

/// `3..=25` followed by `30, 40, 50`.
pub fn default_grid() -> Vec<usize> {
    (3..=25).chain([30, 40, 50]).collect()
}

impl SweepSpec {
    pub fn check(&self) -> AppResult<()> {
        if self.grid.is_empty() {
            return Err(AppError::Input("empty T range".into()));
        }
        if let Some(&t) = self.grid.iter().find(|&&t| t > self.max_t) {
            return Err(AppError::Input(format!(
                "T = {t} exceeds the sweep limit {} (raise --max-T for long runs)",
                self.max_t
            )));
        }
        Ok(())
    }

    pub fn series(&self) -> String {
        match self.mode {
            SweepMode::TightBound => format!("tight:{}", self.source.label()),
            SweepMode::JointOpt => "joint-opt".into(),
            SweepMode::JointOptBeta0 => "joint-opt-beta0".into(),
            SweepMode::JointOptRounds(r) => format!("joint-opt-r{r}"),
            SweepMode::ClosedForm => format!("closed-form:{}", self.source.label()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "T")]
    pub horizon: usize,
    pub value: f64,
    pub status: String,
    pub wall_ms: u128,
    pub series: String,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.value.is_finite() && !self.status.starts_with("error")
    }
}

/// Worker count from the environment, else the machine's parallelism.
pub fn threads_from_env() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn evaluate(spec: &SweepSpec, t: usize) -> AppResult<(f64, String)> {
    let setting = ProblemSetting::new(t, spec.lipschitz, spec.diameter)?;
    let joint = |o| joint_value(&setting, o, &spec.solver).map(|(v, s)| (v, status_label(s)));
    match spec.mode {
        SweepMode::TightBound => {
            tight_value(&spec.source, &setting, &spec.solver).map(|(v, s)| (v, status_label(s)))
        }
        SweepMode::JointOpt => joint(JointOptions::default()),
        SweepMode::JointOptBeta0 => joint(JointOptions {
            beta_zero: true,
            rounds: 1,
        }),
        SweepMode::JointOptRounds(r) => joint(JointOptions {
            beta_zero: false,
            rounds: r,
        }),
        SweepMode::ClosedForm => match &spec.source {
            ScheduleSource::Preset(n) if n == "ofw-new" => Ok((
                theorem1_bound(t, spec.lipschitz, spec.diameter)?,
                "closed-form".into(),
            )),
            other => Err(AppError::NotApplicable(format!(
                "no closed form for {}",
                other.label()
            ))),
        },
    }
}

/// Runs every grid point; failures become error rows. Rows come back ordered
/// by `T` whatever the completion order.
pub fn run(spec: &SweepSpec) -> AppResult<Vec<SweepRow>> {
    spec.check()?;
    let series = spec.series();
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<SweepRow>>> = Mutex::new(vec![None; spec.grid.len()]);
    let workers = spec.threads.clamp(1, spec.grid.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&t) = spec.grid.get(i) else { break };
                let start = Instant::now();
                let outcome = evaluate(spec, t);
                let wall_ms = start.elapsed().as_millis();
                let row = match outcome {
                    Ok((value, status)) => SweepRow {
                        horizon: t,
                        value,
                        status,
                        wall_ms,
                        series: series.clone(),
                    },
                    Err(e) => SweepRow {
                        horizon: t,
                        value: f64::NAN,
                        status: format!("error: {e}"),
                        wall_ms,
                        series: series.clone(),
                    },
                };
                slots.lock().expect("sweep worker panicked")[i] = Some(row);
            });
        }
    });
    let mut rows: Vec<SweepRow> = slots
        .into_inner()
        .expect("sweep worker panicked")
        .into_iter()
        .flatten()
        .collect();
    rows.sort_by_key(|r| r.horizon);
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> AppResult<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| AppError::Input(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Least-squares slope of `log value` against `log T` over the usable rows.
pub fn loglog_slope(rows: &[SweepRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.is_ok() && r.value > 0.0)
        .map(|r| ((r.horizon as f64).ln(), r.value.ln()))
        .collect();
    ols_slope(&pts)
}

pub fn ols_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
