//! End-to-end acceptance checks, one line per criterion.
//!
//! Run alone with `cargo test -p ofwpep --test acceptance`. The process exits
//! nonzero when a criterion fails unless it is listed in `KNOWN_MISSES`.

use std::process::{Command, ExitCode};
use std::time::Instant;

use ofwpep::commands::{self, ScheduleSource};
use ofwpep::sweep::{self, SweepMode, SweepSpec};
use ofwpep_core::bounds::{ofw_params, potential_phi, potential_psi, theorem1_bound};
use ofwpep_core::model::ProblemSetting;
use ofwpep_core::pep::JointOptions;
use ofwpep_core::sdp::SolverOptions;
use ofwpep_core::simulate::{
    regret, run_ftrl, run_general, run_ofw_fixed, Domain, GradientSequence,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::Value;

const TABLE: [f64; 5] = [1.7321, 2.3421, 2.9029, 3.4217, 3.917];

/// Criteria expected to miss on this grid; see the README.
const KNOWN_MISSES: &[u32] = &[7];

type Criterion = (u32, &'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn opts() -> SolverOptions {
    SolverOptions::default()
}

fn preset(name: &str) -> ScheduleSource {
    ScheduleSource::Preset(name.into())
}

fn unit(t: usize) -> ProblemSetting {
    ProblemSetting::unit(t).unwrap()
}

fn tight(name: &str, t: usize) -> f64 {
    commands::tight_value(&preset(name), &unit(t), &opts())
        .unwrap()
        .0
}

fn optimize_cli(t: usize) -> Value {
    let out = Command::new(env!("CARGO_BIN_EXE_ofwpep"))
        .args(["optimize", "--T", &t.to_string()])
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn table_reproduction() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut vals = Vec::new();
    for (k, want) in (2..=6).zip(TABLE) {
        let v = optimize_cli(k)["value"].as_f64().unwrap();
        worst = worst.max((v - want).abs());
        vals.push(format!("{v:.4}"));
    }
    outcome(
        worst <= 5e-3,
        format!("values [{}], max dev {worst:.1e}", vals.join(", ")),
    )
}

fn recovery_round_trip() -> Outcome {
    let mut ok = true;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_gamma: f64 = 0.0;
    for k in 2..=6 {
        let r = optimize_cli(k);
        let value = r["value"].as_f64().unwrap();
        let re = r["reevaluated"].as_f64().unwrap();
        let g21 = r["schedule"]["gamma"][1][0].as_f64().unwrap();
        worst_excess = worst_excess.max(re - value);
        worst_gamma = worst_gamma.max((g21 - 0.5).abs());
        ok &= re <= value + 5e-3 && (g21 - 0.5).abs() <= 1e-2;
    }
    outcome(
        ok,
        format!("max(re-eval - opt) {worst_excess:.1e}, max |gamma21 - 0.5| {worst_gamma:.1e}"),
    )
}

fn theorem_consistency() -> Outcome {
    let mut ok = true;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for t in 3..=20 {
        let v = tight("ofw-new", t);
        let th = theorem1_bound(t, 1.0, 1.0).unwrap();
        let r = v / th;
        lo = lo.min(r);
        hi = hi.max(r);
        ok &= v <= th + 1e-4 && (0.5..=1.0).contains(&r);
    }
    outcome(ok, format!("tight/theory in [{lo:.3}, {hi:.3}]"))
}

fn algorithm_comparison() -> Outcome {
    let a = tight("ofw-new", 20);
    let b = tight("hazan-alg27", 20);
    let r = a / b;
    outcome(
        (0.55..=0.85).contains(&r),
        format!("{a:.4} / {b:.4} = {r:.3}"),
    )
}

fn witness_closure() -> Outcome {
    let configs = [
        ("ofw-new", 2),
        ("ofw-new", 4),
        ("ofw-new", 6),
        ("ofw-new", 8),
        ("hazan-alg27", 3),
        ("hazan-alg27", 5),
        ("zero", 4),
        ("b3-opt", 3),
        ("b3-opt", 5),
        ("anytime-ofw-new", 6),
    ];
    let mut ok = true;
    let (mut worst_replay, mut worst_cert) = (0.0f64, 0.0f64);
    for (name, t) in configs {
        let w = commands::witness(&preset(name), &unit(t), &opts()).unwrap();
        let b = commands::bound(&preset(name), &unit(t), &opts()).unwrap();
        let obj = w.report.bound;
        let d_replay = (w.report.replay_regret - obj).abs();
        let d_cert = b.certified - obj;
        worst_replay = worst_replay.max(d_replay / (1.0 + obj.abs()));
        worst_cert = worst_cert.max(d_cert.abs());
        ok &= w.report.passed
            && d_replay <= 1e-4 * (1.0 + obj.abs())
            && (-1e-6..=1e-3).contains(&d_cert);
    }
    outcome(
        ok,
        format!("10 configs, replay rel dev {worst_replay:.1e}, certified - obj {worst_cert:.1e}"),
    )
}

fn proof_certificates() -> Outcome {
    let start = Instant::now();
    let mut failed = Vec::new();
    let mut worst_delta: f64 = 0.0;
    for t in 3..=1000usize {
        let r = commands::verify_proof(&unit(t), &opts()).unwrap();
        let want = 7.0 * (t as f64 / 3.0).powf(1.5) / 18.0;
        let dev = (r.sos.discriminant - want).abs() / want;
        worst_delta = worst_delta.max(dev);
        if !(r.passed && r.sos.discriminant > 0.0 && dev <= 1e-9) {
            failed.push(t);
        }
    }
    outcome(
        failed.is_empty(),
        format!(
            "{} failures over T=3..1000, Delta rel dev {worst_delta:.1e}, {:.1}s",
            failed.len(),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn slope(mode: SweepMode) -> f64 {
    let spec = SweepSpec {
        source: preset("ofw-new"),
        grid: (4..=24).collect(),
        lipschitz: 1.0,
        diameter: 1.0,
        mode,
        solver: opts(),
        max_t: 64,
        threads: sweep::threads_from_env(),
    };
    let rows = sweep::run(&spec).unwrap();
    assert!(rows.iter().all(|r| r.is_ok()), "{rows:?}");
    sweep::loglog_slope(&rows).unwrap()
}

fn rate_exponents() -> Outcome {
    let start = Instant::now();
    let s = slope(SweepMode::JointOpt);
    let s0 = slope(SweepMode::JointOptBeta0);
    outcome(
        (0.70..=0.80).contains(&s) && (0.80..=0.95).contains(&s0),
        format!(
            "slope {s:.4} (want [0.70, 0.80]), beta=0 slope {s0:.4} (want [0.80, 0.95]), {:.0}s",
            start.elapsed().as_secs_f64()
        ),
    )
}

fn multi_round() -> Outcome {
    let mut ok = true;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for t in 3..=8 {
        let one = commands::joint_value(&unit(t), JointOptions::default(), &opts())
            .unwrap()
            .0;
        let two = commands::joint_value(
            &unit(t),
            JointOptions {
                beta_zero: false,
                rounds: 2,
            },
            &opts(),
        )
        .unwrap()
        .0;
        let r = two / one;
        lo = lo.min(r);
        hi = hi.max(r);
        ok &= two <= one + 1e-3 && two >= 0.5 * one;
    }
    outcome(ok, format!("r=2 / r=1 in [{lo:.3}, {hi:.3}]"))
}

fn anytime_envelope() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for t in [5, 10, 20] {
        let r = tight("anytime-ofw-new", t) / tight("ofw-new", t);
        ok &= r <= 1.3;
        parts.push(format!("T={t}: {r:.3}"));
    }
    outcome(ok, parts.join(", "))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn random_vec(rng: &mut StdRng, d: usize, r: f64) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-r..r)).collect()
}

fn in_ball(rng: &mut StdRng, center: &[f64], radius: f64) -> Vec<f64> {
    let u = random_vec(rng, center.len(), 1.0);
    let n = dot(&u, &u).sqrt().max(1e-12);
    let s = radius * rng.random_range(0.0..1.0) / n;
    center.iter().zip(&u).map(|(c, x)| c + s * x).collect()
}

fn in_hull(rng: &mut StdRng, verts: &[Vec<f64>]) -> Vec<f64> {
    let w: Vec<f64> = verts.iter().map(|_| rng.random_range(0.001..1.0)).collect();
    let s: f64 = w.iter().sum();
    let mut p = vec![0.0; verts[0].len()];
    for (v, wi) in verts.iter().zip(&w) {
        for (pi, vi) in p.iter_mut().zip(v) {
            *pi += wi / s * vi;
        }
    }
    p
}

fn bounded_grads(rng: &mut StdRng, t: usize, d: usize, l: f64) -> GradientSequence {
    GradientSequence(
        (0..t)
            .map(|_| {
                let g = random_vec(rng, d, 1.0);
                let n = dot(&g, &g).sqrt().max(1.0);
                g.iter().map(|x| l * x / n).collect()
            })
            .collect(),
    )
}

fn simulation_invariants() -> Outcome {
    const TRIALS: usize = 100;
    const D: usize = 3;
    let mut rng = StdRng::seed_from_u64(2024);
    let mut violations = [0usize; 5];
    let names = [
        "ftrl-step",
        "ofw-potential-step",
        "translation",
        "lmo",
        "hull",
    ];
    let start = Instant::now();

    for _ in 0..TRIALS {
        let center = random_vec(&mut rng, D, 1.0);
        let radius = rng.random_range(0.2..2.0);
        let eta = rng.random_range(0.01..2.0);
        let k = Domain::ball(center.clone(), radius).unwrap();
        let y1 = in_ball(&mut rng, &center, radius);
        let len = rng.random_range(1..15);
        let grads = bounded_grads(&mut rng, len, D, 1.5);
        let tr = run_ftrl(eta, &k, &y1, &grads).unwrap();
        let mut prev = 0.0;
        for t in 1..=grads.len() {
            let psi = potential_psi(t, &tr, eta).unwrap();
            let g = &grads.0[t - 1];
            if psi - prev > 0.5 * eta * dot(g, g) + 1e-9 {
                violations[0] += 1;
            }
            prev = psi;
        }
    }

    for _ in 0..TRIALS {
        let horizon = rng.random_range(3..40);
        let diameter = rng.random_range(0.3..3.0);
        let lipschitz = rng.random_range(0.3..3.0);
        let k = Domain::ball(vec![0.0; D], diameter / 2.0).unwrap();
        let x1 = in_ball(&mut rng, &[0.0; D], diameter / 2.0);
        let grads = bounded_grads(&mut rng, horizon, D, lipschitz);
        let (eta, sigma) = ofw_params(horizon, lipschitz, diameter);
        let ofw = run_ofw_fixed(eta, sigma, &k, &x1, &grads).unwrap();
        let ftrl = run_ftrl(eta, &k, &x1, &grads).unwrap();
        let c = 3f64.powf(0.75) * (horizon as f64).powf(0.25);
        let (cg, cv) = (2.0 * diameter / (lipschitz * c), lipschitz / (diameter * c));
        let mut prev = potential_phi(0, &ofw, &ftrl, eta).unwrap();
        for t in 1..=horizon {
            let phi = potential_phi(t, &ofw, &ftrl, eta).unwrap();
            let g = &grads.0[t - 1];
            let xv = sub(&ofw.x[t - 1], &ofw.v[t - 1]);
            if phi - prev > cg * dot(g, g) + cv * dot(&xv, &xv) + 1e-8 {
                violations[1] += 1;
            }
            prev = phi;
        }
    }

    let schedules = ["ofw-new", "hazan-alg27", "hazan-thm44", "anytime-ofw-new"];
    for trial in 0..TRIALS {
        let horizon = rng.random_range(2..8);
        let s = ofwpep::algos::resolve(schedules[trial % 4], horizon, 1.0, 1.0).unwrap();
        let verts: Vec<Vec<f64>> = (0..rng.random_range(2..6))
            .map(|_| random_vec(&mut rng, D, 2.0))
            .collect();
        let k = Domain::hull(verts.clone()).unwrap();
        let x1 = in_hull(&mut rng, &verts);
        let xs = in_hull(&mut rng, &verts);
        let c = random_vec(&mut rng, D, 5.0);
        let add = |p: &[f64]| -> Vec<f64> { p.iter().zip(&c).map(|(a, b)| a + b).collect() };
        let grads = bounded_grads(&mut rng, horizon, D, 1.0);
        let a = run_general(&s, &k, &x1, &grads).unwrap();
        let b = run_general(&s, &k.translate(&c), &add(&x1), &grads).unwrap();
        let dirs_match = a
            .dirs
            .iter()
            .zip(&b.dirs)
            .all(|(p, q)| dot(&sub(p, q), &sub(p, q)).sqrt() <= 1e-10);
        let iterates_match = a.x.iter().zip(&b.x).all(|(p, q)| {
            let d = sub(&add(p), q);
            dot(&d, &d).sqrt() <= 1e-9
        });
        if !dirs_match || !iterates_match || (regret(&a, &xs) - regret(&b, &add(&xs))).abs() > 1e-9
        {
            violations[2] += 1;
        }
        if a.x.iter().any(|x| k.membership_residual(x).unwrap() > 1e-8) {
            violations[4] += 1;
        }
    }

    for _ in 0..TRIALS {
        let dir = random_vec(&mut rng, D, 3.0);
        let verts: Vec<Vec<f64>> = (0..rng.random_range(2..6))
            .map(|_| random_vec(&mut rng, D, 2.0))
            .collect();
        let center = random_vec(&mut rng, D, 2.0);
        let radius = rng.random_range(0.1..3.0);
        let cases = [
            (Domain::hull(verts.clone()).unwrap(), None),
            (
                Domain::ball(center.clone(), radius).unwrap(),
                Some((center.clone(), radius)),
            ),
        ];
        for (k, ball) in cases {
            let v = k.lmo(&dir).unwrap();
            for _ in 0..10 {
                let u = match &ball {
                    Some((c, r)) => in_ball(&mut rng, c, *r),
                    None => in_hull(&mut rng, &verts),
                };
                if dot(&dir, &sub(&v, &u)) > 1e-9 {
                    violations[3] += 1;
                }
            }
        }
    }

    let total: usize = violations.iter().sum();
    let detail = names
        .iter()
        .zip(violations)
        .map(|(n, v)| format!("{n} {v}"))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(
        total == 0,
        format!(
            "{TRIALS} trials each, violations: {detail}, {:.1}s",
            start.elapsed().as_secs_f64()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (1, "table reproduction", table_reproduction),
        (2, "recovered schedule round trip", recovery_round_trip),
        (3, "theorem consistency", theorem_consistency),
        (4, "algorithm comparison", algorithm_comparison),
        (5, "witness closure", witness_closure),
        (6, "proof certificates", proof_certificates),
        (7, "rate exponents", rate_exponents),
        (8, "multi-round", multi_round),
        (9, "anytime envelope", anytime_envelope),
        (10, "simulation invariants", simulation_invariants),
    ];
    let filter: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let o = run();
        let known = KNOWN_MISSES.contains(&id);
        let tag = match (o.passed, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("criterion {id:>2} {tag:<12} {name}: {}", o.detail);
        if !o.passed && !known {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
