use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ofwpep::commands::{self, ScheduleSource, ACCEPT_TOL};
use ofwpep::gen::{generate, GradientDistribution, GradientSpec};
use ofwpep::io::{read_json, write_json, GramSdpFile, SolutionFile, WitnessFile};
use ofwpep::sweep::{self, default_grid, SweepMode, SweepRow, SweepSpec, DEFAULT_MAX_T};
use ofwpep::{AppError, AppResult};
use ofwpep_core::model::ProblemSetting;
use ofwpep_core::pep::{build_primal, JointOptions};
use ofwpep_core::sdp::SolverOptions;
use ofwpep_core::simulate::{regret, run_general, sup_regret, Domain, GradientSequence};

#[derive(Parser)]
#[command(
    name = "ofwpep",
    version,
    about = "Worst-case regret analysis of online Frank-Wolfe methods"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct Problem {
    /// Horizon.
    #[arg(long = "T")]
    horizon: usize,
    /// Gradient norm bound.
    #[arg(long = "L", default_value_t = 1.0)]
    lipschitz: f64,
    /// Domain diameter.
    #[arg(long = "D", default_value_t = 1.0)]
    diameter: f64,
}

impl Problem {
    fn setting(&self) -> AppResult<ProblemSetting> {
        Ok(ProblemSetting::new(
            self.horizon,
            self.lipschitz,
            self.diameter,
        )?)
    }
}

#[derive(Args, Clone)]
struct Algo {
    /// Preset name.
    #[arg(long, default_value = "ofw-new", conflicts_with = "schedule")]
    algo: String,
    /// Schedule JSON file instead of a preset.
    #[arg(long)]
    schedule: Option<PathBuf>,
}

impl Algo {
    fn source(&self) -> ScheduleSource {
        match &self.schedule {
            Some(p) => ScheduleSource::File(p.clone()),
            None => ScheduleSource::Preset(self.algo.clone()),
        }
    }
}

#[derive(Args, Clone)]
struct Solver {
    /// Relative solver tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

impl Solver {
    fn options(&self) -> AppResult<SolverOptions> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(AppError::Input(format!("invalid tolerance {}", self.tol)));
        }
        Ok(SolverOptions::with_tol(self.tol))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Worst-case regret of a schedule, with its dual certificate.
    Bound {
        #[command(flatten)]
        algo: Algo,
        #[command(flatten)]
        problem: Problem,
        #[command(flatten)]
        solver: Solver,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Jointly optimised schedule and its worst-case regret.
    Optimize {
        #[command(flatten)]
        problem: Problem,
        #[command(flatten)]
        solver: Solver,
        /// Restrict to schedules without atom feedback.
        #[arg(long)]
        beta0: bool,
        /// Oracle calls per round.
        #[arg(long, default_value_t = 1)]
        rounds: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Where to write the recovered schedule.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks the potential-based regret proof for a horizon.
    VerifyProof {
        #[command(flatten)]
        problem: Problem,
        #[command(flatten)]
        solver: Solver,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One value per horizon, as CSV `T,value,status,wall_ms,series`.
    Sweep {
        #[command(flatten)]
        algo: Algo,
        /// tight-bound, joint-opt, joint-opt-beta0, joint-opt-rounds:R or closed-form.
        #[arg(long, default_value = "tight-bound")]
        mode: String,
        #[arg(long = "T-min")]
        t_min: Option<usize>,
        #[arg(long = "T-max")]
        t_max: Option<usize>,
        #[arg(long = "L", default_value_t = 1.0)]
        lipschitz: f64,
        #[arg(long = "D", default_value_t = 1.0)]
        diameter: f64,
        /// Largest horizon accepted.
        #[arg(long = "max-T", default_value_t = DEFAULT_MAX_T)]
        max_t: usize,
        #[command(flatten)]
        solver: Solver,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extracts and audits an adversarial instance.
    Witness {
        #[command(flatten)]
        algo: Algo,
        #[command(flatten)]
        problem: Problem,
        #[command(flatten)]
        solver: Solver,
        /// Where to write the witness.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replays a stored witness against a schedule.
    Replay {
        witness: PathBuf,
        #[command(flatten)]
        algo: Algo,
        #[command(flatten)]
        solver: Solver,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs a schedule on a ball against random or stored gradients.
    Simulate {
        #[command(flatten)]
        algo: Algo,
        #[command(flatten)]
        problem: Problem,
        /// Gradient JSON (list of vectors); drawn at random when absent.
        #[arg(long)]
        grads: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        /// Where to write the trace.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes the worst-case program of a schedule as sparse JSON.
    ExportSdp {
        #[command(flatten)]
        algo: Algo,
        #[command(flatten)]
        problem: Problem,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solves a program given in sparse JSON.
    Solve {
        input: PathBuf,
        #[command(flatten)]
        solver: Solver,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn csv_row(horizon: usize, value: f64, status: &str, series: String) -> SweepRow {
    SweepRow {
        horizon,
        value,
        status: status.into(),
        wall_ms: 0,
        series,
    }
}

fn emit_rows(rows: &[SweepRow], out: Option<&Path>) -> AppResult<()> {
    match out {
        Some(p) => sweep::write_csv(rows, std::fs::File::create(p)?),
        None => sweep::write_csv(rows, std::io::stdout().lock()),
    }
}

fn run(cli: Cli) -> AppResult<()> {
    match cli.command {
        Command::Bound {
            algo,
            problem,
            solver,
            format,
            out,
        } => {
            let r = commands::bound(&algo.source(), &problem.setting()?, &solver.options()?)?;
            match format {
                Format::Json => write_json(out.as_deref(), &r),
                Format::Csv => emit_rows(
                    &[csv_row(
                        r.horizon,
                        r.primal,
                        &r.status,
                        format!("tight:{}", r.algo),
                    )],
                    out.as_deref(),
                ),
            }
        }
        Command::Optimize {
            problem,
            solver,
            beta0,
            rounds,
            format,
            out,
        } => {
            let options = JointOptions {
                beta_zero: beta0,
                rounds,
            };
            let r = commands::optimize(&problem.setting()?, options, &solver.options()?)?;
            if let (Some(path), Some(s)) = (out.as_deref(), &r.schedule) {
                write_json(Some(path), s)?;
            }
            match format {
                Format::Json => write_json(None, &r),
                Format::Csv => emit_rows(
                    &[csv_row(r.horizon, r.value, &r.status, "joint-opt".into())],
                    None,
                ),
            }
        }
        Command::VerifyProof {
            problem,
            solver,
            out,
        } => {
            let r = commands::verify_proof(&problem.setting()?, &solver.options()?)?;
            write_json(out.as_deref(), &r)?;
            if r.passed {
                Ok(())
            } else {
                Err(AppError::Certificate(format!(
                    "proof checks failed at T = {}",
                    r.horizon
                )))
            }
        }
        Command::Sweep {
            algo,
            mode,
            t_min,
            t_max,
            lipschitz,
            diameter,
            max_t,
            solver,
            format,
            out,
        } => {
            let grid = match (t_min, t_max) {
                (None, None) => default_grid(),
                (lo, hi) => {
                    let lo = lo.unwrap_or(3);
                    let hi = hi.unwrap_or(lo);
                    (lo..=hi).collect()
                }
            };
            let spec = SweepSpec {
                source: algo.source(),
                grid,
                lipschitz,
                diameter,
                mode: mode.parse::<SweepMode>()?,
                solver: solver.options()?,
                max_t,
                threads: sweep::threads_from_env(),
            };
            let rows = sweep::run(&spec)?;
            match format {
                Format::Csv => emit_rows(&rows, out.as_deref())?,
                Format::Json => write_json(out.as_deref(), &rows)?,
            }
            if let Some(s) = sweep::loglog_slope(&rows) {
                eprintln!("log-log slope: {s:.4}");
            }
            match rows.iter().find(|r| !r.is_ok()) {
                Some(r) => Err(AppError::Solver(format!("T = {}: {}", r.horizon, r.status))),
                None => Ok(()),
            }
        }
        Command::Witness {
            algo,
            problem,
            solver,
            out,
        } => {
            let w = commands::witness(&algo.source(), &problem.setting()?, &solver.options()?)?;
            if let Some(p) = out.as_deref() {
                write_json(Some(p), &w.file)?;
            }
            write_json(None, &w.report)?;
            if w.report.passed {
                Ok(())
            } else {
                Err(AppError::Audit(format!(
                    "witness at T = {} failed its audit",
                    w.report.horizon
                )))
            }
        }
        Command::Replay {
            witness,
            algo,
            solver,
            out,
        } => {
            let file: WitnessFile = read_json(&witness)?;
            let r = commands::replay(&file, &algo.source(), &solver.options()?)?;
            write_json(out.as_deref(), &r)?;
            if r.passed {
                Ok(())
            } else {
                Err(AppError::Audit("replay checks failed".into()))
            }
        }
        Command::Simulate {
            algo,
            problem,
            grads,
            seed,
            dim,
            out,
        } => {
            let setting = problem.setting()?;
            let schedule = algo.source().load(&setting)?;
            let g = match grads {
                Some(p) => read_json::<GradientSequence>(&p)?,
                None => generate(&GradientSpec {
                    seed,
                    d: dim,
                    horizon: setting.horizon,
                    radius: setting.lipschitz,
                    distribution: GradientDistribution::UniformOnSphere,
                })?,
            };
            let domain = Domain::ball(vec![0.0; g.dim()], setting.diameter / 2.0)?;
            let trace = run_general(&schedule, &domain, &vec![0.0; g.dim()], &g)?;
            let best = sup_regret(&trace, &domain)?;
            let x_star = domain.lmo(&trace.gradient_sum())?;
            eprintln!("regret: {best:.6} (check {:.6})", regret(&trace, &x_star));
            write_json(out.as_deref(), &trace)
        }
        Command::ExportSdp { algo, problem, out } => {
            let setting = problem.setting()?;
            let schedule = algo.source().load(&setting)?;
            let p = build_primal(&schedule, &setting)?;
            write_json(out.as_deref(), &GramSdpFile::from(&p))
        }
        Command::Solve { input, solver, out } => {
            let file: GramSdpFile = read_json(&input)?;
            let p = file.into_problem()?;
            let sol = p.solve(&solver.options()?)?;
            write_json(out.as_deref(), &SolutionFile::from(&sol.sdp))?;
            if sol.sdp.is_acceptable(ACCEPT_TOL) {
                Ok(())
            } else {
                Err(AppError::Solver(format!("status {:?}", sol.sdp.status)))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(AppError::Input(String::new()).exit_code() as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
