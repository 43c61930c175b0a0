//! Command implementations; each returns a serialisable report.

use std::path::PathBuf;

use ofwpep_core::bounds::{
    optimal_proof_params, per_step_budget, regret_upper_from_proof, sos_certificate,
    theorem1_bound, ProofParams, SosCertificate,
};
use ofwpep_core::model::{ParamSchedule, ProblemSetting};
use ofwpep_core::pep::{
    build_dual, build_joint_opt, build_potential_design, build_primal, primal_trace_bound,
    recover_params, JointOptions, PotentialSolution,
};
use ofwpep_core::sdp::{SdpSolution, SolveStatus, SolverOptions};
use ofwpep_core::simulate::{regret, run_general, sup_regret, Domain, GradientSequence};
use ofwpep_core::witness::{audit, extract, worst_case_t1, WorstCase, RANK_TOL};
use serde::Serialize;

use crate::algos;
use crate::error::{AppError, AppResult};
use crate::io::{read_json, WitnessFile};

/// Residual level at which a non-converged solve is still reported.
pub const ACCEPT_TOL: f64 = 1e-5;

/// Where a schedule comes from.
#[derive(Clone, Debug)]
pub enum ScheduleSource {
    Preset(String),
    File(PathBuf),
}

impl ScheduleSource {
    pub fn label(&self) -> String {
        match self {
            Self::Preset(n) => n.clone(),
            Self::File(p) => p.display().to_string(),
        }
    }

    pub fn load(&self, setting: &ProblemSetting) -> AppResult<ParamSchedule> {
        match self {
            Self::Preset(name) => {
                algos::resolve(name, setting.horizon, setting.lipschitz, setting.diameter)
            }
            Self::File(path) => {
                let s: ParamSchedule = read_json(path)?;
                s.check_shape()?;
                if s.horizon != setting.horizon {
                    return Err(AppError::Input(format!(
                        "schedule file has T = {}, requested T = {}",
                        s.horizon, setting.horizon
                    )));
                }
                Ok(s)
            }
        }
    }
}

fn accept(sol: &SdpSolution, what: &str) -> AppResult<()> {
    if sol.is_acceptable(ACCEPT_TOL) {
        Ok(())
    } else {
        Err(AppError::Solver(format!(
            "{what}: status {:?} after {} iterations, residuals {:.2e}",
            sol.status,
            sol.iterations,
            sol.residuals.max()
        )))
    }
}

fn status_name(s: SolveStatus) -> String {
    serde_json::to_value(s)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub algo: String,
    #[serde(rename = "T")]
    pub horizon: usize,
    #[serde(rename = "L")]
    pub lipschitz: f64,
    #[serde(rename = "D")]
    pub diameter: f64,
    pub primal: f64,
    pub dual: f64,
    /// Upper bound certified from the dual multipliers.
    pub certified: f64,
    pub gap: f64,
    pub status: String,
    pub dual_status: String,
    pub iterations: usize,
}

pub fn bound(
    source: &ScheduleSource,
    setting: &ProblemSetting,
    opts: &SolverOptions,
) -> AppResult<BoundReport> {
    let schedule = source.load(setting)?;
    let primal = build_primal(&schedule, setting)?;
    let ps = primal.solve(opts)?;
    accept(&ps.sdp, "primal")?;
    let dual = build_dual(&schedule, setting)?;
    let ds = dual.lmi.solve(opts)?;
    accept(&ds.sdp, "dual")?;
    let cert = primal.certified_upper_bound(&dual.expand(&ds.w), primal_trace_bound(setting))?;
    Ok(BoundReport {
        algo: source.label(),
        horizon: setting.horizon,
        lipschitz: setting.lipschitz,
        diameter: setting.diameter,
        primal: ps.value,
        dual: ds.value,
        certified: cert.bound,
        gap: ds.value - ps.value,
        status: status_name(ps.sdp.status),
        dual_status: status_name(ds.sdp.status),
        iterations: ps.sdp.iterations,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RecoveryReport {
    pub min_lambda: f64,
    pub residual: f64,
    pub undefined_rows: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OptimizeReport {
    #[serde(rename = "T")]
    pub horizon: usize,
    #[serde(rename = "L")]
    pub lipschitz: f64,
    #[serde(rename = "D")]
    pub diameter: f64,
    pub beta0: bool,
    pub rounds: usize,
    pub value: f64,
    pub status: String,
    /// Worst-case regret of the recovered schedule, re-solved from scratch.
    pub reevaluated: Option<f64>,
    pub recovery: Option<RecoveryReport>,
    pub schedule: Option<ParamSchedule>,
}

pub fn optimize(
    setting: &ProblemSetting,
    options: JointOptions,
    opts: &SolverOptions,
) -> AppResult<OptimizeReport> {
    let program = build_joint_opt(setting, options)?;
    let sol = program.solve(opts)?;
    accept(&sol.lmi.sdp, "joint program")?;
    let mut report = OptimizeReport {
        horizon: setting.horizon,
        lipschitz: setting.lipschitz,
        diameter: setting.diameter,
        beta0: options.beta_zero,
        rounds: options.rounds,
        value: sol.value,
        status: status_name(sol.lmi.sdp.status),
        reevaluated: None,
        recovery: None,
        schedule: None,
    };
    if options.rounds == 1 {
        let rec = recover_params(&sol)?;
        let check = build_primal(&rec.schedule, setting)?.solve(opts)?;
        accept(&check.sdp, "re-evaluation")?;
        report.reevaluated = Some(check.value);
        report.recovery = Some(RecoveryReport {
            min_lambda: rec.min_lambda,
            residual: rec.residual,
            undefined_rows: rec.undefined_rows,
        });
        report.schedule = Some(rec.schedule);
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct MultiplierStructure {
    pub b: f64,
    pub a: f64,
    pub diam_x_v: f64,
    pub a_sigma2: f64,
    pub brd_v_yn: f64,
    pub brd_yn_v: f64,
    pub two_a_sigma: f64,
    /// `λ_{y_t,y_{t+1}} − λ_{y_{t+1},y_t}`
    pub y_gap: f64,
    pub inv_eta: f64,
    /// Largest multiplier outside the expected support.
    pub off_support: f64,
    pub matches: bool,
}

impl MultiplierStructure {
    fn from_solution(s: &PotentialSolution, eta: f64, sigma: f64, tol: f64) -> Self {
        let m = |p: &str, q: &str| s.boundary_multiplier(p, q).unwrap_or(f64::NAN);
        let diam_x_v = s.diameter_multiplier("x", "v").unwrap_or(f64::NAN);
        let a_sigma2 = s.a * sigma * sigma;
        let two_a_sigma = 2.0 * s.a * sigma;
        let (brd_v_yn, brd_yn_v) = (m("v", "y+"), m("y+", "v"));
        let y_gap = m("y", "y+") - m("y+", "y");
        let expected_brd = [("v", "y+"), ("y+", "v"), ("y", "y+"), ("y+", "y")];
        let off_diam = s
            .diameter
            .iter()
            .filter(|((p, q), _)| !matches!((*p, *q), ("x", "v") | ("v", "x")))
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max);
        let off_brd = s
            .boundary
            .iter()
            .filter(|(k, _)| !expected_brd.contains(k))
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max);
        let off_support = off_diam.max(off_brd);
        let scale = |x: f64| tol * (1.0 + x.abs());
        let matches = s.b.abs() <= tol
            && (diam_x_v - a_sigma2).abs() <= scale(a_sigma2)
            && (brd_v_yn - two_a_sigma).abs() <= scale(two_a_sigma)
            && (brd_yn_v - two_a_sigma).abs() <= scale(two_a_sigma)
            && (y_gap - 1.0 / eta).abs() <= scale(1.0 / eta)
            && off_support <= tol;
        Self {
            b: s.b,
            a: s.a,
            diam_x_v,
            a_sigma2,
            brd_v_yn,
            brd_yn_v,
            two_a_sigma,
            y_gap,
            inv_eta: 1.0 / eta,
            off_support,
            matches,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProofReport {
    #[serde(rename = "T")]
    pub horizon: usize,
    #[serde(rename = "L")]
    pub lipschitz: f64,
    #[serde(rename = "D")]
    pub diameter: f64,
    pub params: ProofParams,
    pub sos: SosCertificate,
    pub sos_ok: bool,
    pub step_value: f64,
    pub step_budget: f64,
    pub step_ok: bool,
    pub assembled_bound: f64,
    pub theorem_bound: f64,
    /// `None` when `σ` is clamped at one and the two bounds need not agree.
    pub assembled_ok: Option<bool>,
    /// Multipliers of the optimum with `b` pinned at zero (informational).
    pub structure: MultiplierStructure,
    pub passed: bool,
}

const STEP_SLACK: f64 = 1e-5;
const ASSEMBLY_RTOL: f64 = 1e-9;
const STRUCTURE_TOL: f64 = 1e-3;

pub fn verify_proof(setting: &ProblemSetting, opts: &SolverOptions) -> AppResult<ProofReport> {
    let (t, l, d) = (setting.horizon, setting.lipschitz, setting.diameter);
    let params = optimal_proof_params(t, l, d)?;
    let sos = sos_certificate(params.eta, params.sigma, params.a, params.lambda_g, l, d)?;
    let sos_ok = sos.feasible && sos.discriminant > 0.0;

    let program = build_potential_design(params.eta, params.sigma, setting)?;
    let step = program.solve(opts)?;
    let mut pinned = program.clone();
    pinned.fix_b(0.0);
    let pinned_sol = pinned.solve(opts)?;
    let budget = per_step_budget(l, d, &params);
    let step_ok = step.value <= budget + STEP_SLACK && step.lmi_min_eigenvalue >= -1e-7;

    let assembled = regret_upper_from_proof(t, l, d, &params);
    let theorem = theorem1_bound(t, l, d)?;
    let assembled_ok =
        (params.sigma < 1.0).then(|| (assembled - theorem).abs() <= ASSEMBLY_RTOL * theorem.abs());
    let structure =
        MultiplierStructure::from_solution(&pinned_sol, params.eta, params.sigma, STRUCTURE_TOL);
    let passed = sos_ok && step_ok && assembled_ok.unwrap_or(true);
    Ok(ProofReport {
        horizon: t,
        lipschitz: l,
        diameter: d,
        params,
        sos,
        sos_ok,
        step_value: step.value,
        step_budget: budget,
        step_ok,
        assembled_bound: assembled,
        theorem_bound: theorem,
        assembled_ok,
        structure,
        passed,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    pub algo: String,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub bound: f64,
    pub dim: usize,
    pub replay_regret: f64,
    pub hull_regret: f64,
    pub ties: usize,
    pub checks: Vec<CheckLine>,
    pub passed: bool,
}

pub struct WitnessOutcome {
    pub report: WitnessReport,
    pub file: WitnessFile,
}

fn checks_of(report: &ofwpep_core::witness::AuditReport) -> Vec<CheckLine> {
    report
        .checks
        .iter()
        .map(|c| CheckLine {
            name: c.name.clone(),
            value: c.value,
            limit: c.limit,
            passed: c.passed,
        })
        .collect()
}

pub fn witness(
    source: &ScheduleSource,
    setting: &ProblemSetting,
    opts: &SolverOptions,
) -> AppResult<WitnessOutcome> {
    let schedule = if setting.horizon == 1 {
        ParamSchedule::zeros(1)?
    } else {
        source.load(setting)?
    };
    let wc: WorstCase = if setting.horizon == 1 {
        worst_case_t1(setting)?
    } else {
        let primal = build_primal(&schedule, setting)?;
        let sol = primal.solve(opts)?;
        accept(&sol.sdp, "primal")?;
        extract(&sol.gram, setting.horizon, sol.value, RANK_TOL)?
    };
    let rep = audit(&wc, &schedule, setting)?;
    let report = WitnessReport {
        algo: source.label(),
        horizon: setting.horizon,
        bound: wc.objective,
        dim: wc.dim,
        replay_regret: rep.replay_regret,
        hull_regret: rep.hull_regret,
        ties: rep.ties,
        checks: checks_of(&rep),
        passed: rep.passed(),
    };
    let file = WitnessFile {
        algo: Some(source.label()),
        lipschitz: setting.lipschitz,
        diameter: setting.diameter,
        hull: wc.vertices(),
        regret: rep.replay_regret,
        witness: wc,
    };
    Ok(WitnessOutcome { report, file })
}

#[derive(Clone, Debug, Serialize)]
pub struct ReplayReport {
    pub algo: String,
    #[serde(rename = "T")]
    pub horizon: usize,
    /// `audit` when the recorded atoms are valid oracle answers for this
    /// schedule, `hull-oracle` when the schedule was run afresh on the hull.
    pub mode: String,
    pub regret: f64,
    pub hull_regret: f64,
    /// Worst-case regret of this schedule; every instance lies below it.
    pub schedule_bound: f64,
    pub checks: Vec<CheckLine>,
    pub passed: bool,
}

const REPLAY_SLACK: f64 = 1e-4;

pub fn replay(
    file: &WitnessFile,
    source: &ScheduleSource,
    opts: &SolverOptions,
) -> AppResult<ReplayReport> {
    let wc = &file.witness;
    let setting = ProblemSetting::new(wc.horizon, file.lipschitz, file.diameter)?;
    let schedule = if wc.horizon == 1 {
        ParamSchedule::zeros(1)?
    } else {
        source.load(&setting)?
    };
    let audited = audit(wc, &schedule, &setting)?;
    let schedule_bound = if wc.horizon == 1 {
        setting.lipschitz * setting.diameter
    } else {
        let sol = build_primal(&schedule, &setting)?.solve(opts)?;
        accept(&sol.sdp, "primal")?;
        sol.value
    };
    let (mode, regret_value, hull_regret, mut checks) = if audited.passed() {
        (
            "audit",
            audited.replay_regret,
            audited.hull_regret,
            checks_of(&audited),
        )
    } else {
        let domain = Domain::hull(file.hull.clone())?;
        let grads = GradientSequence(wc.grads.clone());
        let trace = run_general(&schedule, &domain, &wc.x1(), &grads)?;
        let r = regret(&trace, &wc.x_star);
        let h = sup_regret(&trace, &domain)?;
        ("hull-oracle", r, h, Vec::new())
    };
    let limit = schedule_bound + REPLAY_SLACK * (1.0 + schedule_bound.abs());
    checks.push(CheckLine {
        name: "below_schedule_bound".into(),
        value: hull_regret.max(regret_value),
        limit,
        passed: hull_regret.max(regret_value) <= limit,
    });
    let passed = checks.iter().all(|c| c.passed);
    Ok(ReplayReport {
        algo: source.label(),
        horizon: wc.horizon,
        mode: mode.into(),
        regret: regret_value,
        hull_regret,
        schedule_bound,
        checks,
        passed,
    })
}

/// Shorthand used by the sweep: worst-case regret of one preset.
pub fn tight_value(
    source: &ScheduleSource,
    setting: &ProblemSetting,
    opts: &SolverOptions,
) -> AppResult<(f64, SolveStatus)> {
    let schedule = source.load(setting)?;
    let sol = build_primal(&schedule, setting)?.solve(opts)?;
    accept(&sol.sdp, "primal")?;
    Ok((sol.value, sol.sdp.status))
}

pub fn joint_value(
    setting: &ProblemSetting,
    options: JointOptions,
    opts: &SolverOptions,
) -> AppResult<(f64, SolveStatus)> {
    let sol = build_joint_opt(setting, options)?.solve(opts)?;
    accept(&sol.lmi.sdp, "joint program")?;
    Ok((sol.value, sol.lmi.sdp.status))
}

pub(crate) fn status_label(s: SolveStatus) -> String {
    status_name(s)
}
