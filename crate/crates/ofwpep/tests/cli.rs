use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ofwpep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ofwpep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn read(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn bound_reports_primal_and_certificate() {
    let v = json(&ofwpep(&["bound", "--T", "2", "--algo", "b3-opt"]));
    let primal = v["primal"].as_f64().unwrap();
    assert!((primal - 1.7321).abs() <= 5e-3);
    assert!(v["certified"].as_f64().unwrap() >= primal - 1e-7);
    assert!(v["gap"].as_f64().unwrap().abs() <= 1e-5);
}

#[test]
fn optimize_recovers_a_schedule() {
    let v = json(&ofwpep(&["optimize", "--T", "3"]));
    let value = v["value"].as_f64().unwrap();
    assert!((value - 2.3421).abs() <= 5e-3);
    assert!(v["reevaluated"].as_f64().unwrap() <= value + 5e-3);
    assert!(v["schedule"].is_object());
}

#[test]
fn exit_codes() {
    assert_eq!(ofwpep(&["verify-proof", "--T", "2"]).status.code(), Some(3));
    assert_eq!(
        ofwpep(&["bound", "--T", "3", "--algo", "nope"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        ofwpep(&["bound", "--T", "3", "--L", "-1"]).status.code(),
        Some(3)
    );
    assert_eq!(
        ofwpep(&["sweep", "--T-min", "3", "--T-max", "100"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        ofwpep(&["solve", "/definitely/missing.json"]).status.code(),
        Some(3)
    );
}

#[test]
fn verify_proof_passes() {
    for t in ["3", "48"] {
        let v = json(&ofwpep(&["verify-proof", "--T", t]));
        assert_eq!(v["passed"], Value::Bool(true));
    }
    let v = json(&ofwpep(&["verify-proof", "--T", "48"]));
    assert!((v["assembled_bound"].as_f64().unwrap() - 32.0).abs() <= 1e-9);
}

#[test]
fn sweep_csv_layout() {
    let out = ofwpep(&["sweep", "--T-min", "3", "--T-max", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("T,value,status,wall_ms,series"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    for (row, t) in rows.iter().zip(["3", "4", "5"]) {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f[0], t);
        assert!(f[1].parse::<f64>().unwrap() > 0.0);
        assert_eq!(f[4], "tight:ofw-new");
    }
}

#[test]
fn closed_form_sweep() {
    let out = ofwpep(&[
        "sweep",
        "--mode",
        "closed-form",
        "--T-min",
        "3",
        "--T-max",
        "3",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let v: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((v - 4.0).abs() <= 1e-12);
}

#[test]
fn witness_then_replay() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.json");
    let p = path.to_str().unwrap();
    let report = json(&ofwpep(&[
        "witness",
        "--T",
        "4",
        "--algo",
        "hazan-alg27",
        "--out",
        p,
    ]));
    assert_eq!(report["passed"], Value::Bool(true));
    let stored = read(&path);
    assert_eq!(stored["witness"]["T"], Value::from(4));

    let same = json(&ofwpep(&["replay", p, "--algo", "hazan-alg27"]));
    assert_eq!(same["mode"], Value::from("audit"));
    assert_eq!(same["passed"], Value::Bool(true));
    assert!((same["regret"].as_f64().unwrap() - report["bound"].as_f64().unwrap()).abs() <= 1e-4);

    let other = json(&ofwpep(&["replay", p, "--algo", "ofw-new"]));
    assert_eq!(other["passed"], Value::Bool(true));
    assert!(other["regret"].as_f64().unwrap() <= other["schedule_bound"].as_f64().unwrap() + 1e-3);
}

#[test]
fn single_round_witness() {
    let v = json(&ofwpep(&["witness", "--T", "1", "--L", "2", "--D", "3"]));
    assert_eq!(v["passed"], Value::Bool(true));
    assert!((v["bound"].as_f64().unwrap() - 6.0).abs() <= 1e-12);
}

#[test]
fn export_and_solve_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let sdp = dir.path().join("p.json");
    let sol = dir.path().join("s.json");
    let out = ofwpep(&["export-sdp", "--T", "3", "--out", sdp.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let problem = read(&sdp);
    assert_eq!(problem["dim"], Value::from(6));
    let out = ofwpep(&[
        "solve",
        sdp.to_str().unwrap(),
        "--out",
        sol.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let s = read(&sol);
    let direct = json(&ofwpep(&["bound", "--T", "3"]));
    let obj = s["primal_objective"].as_f64().unwrap().abs();
    assert!((obj - direct["primal"].as_f64().unwrap()).abs() <= 1e-5);
}

#[test]
fn simulate_is_seeded() {
    let a = ofwpep(&["simulate", "--T", "5", "--seed", "9"]);
    let b = ofwpep(&["simulate", "--T", "5", "--seed", "9"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = ofwpep(&["simulate", "--T", "5", "--seed", "10"]);
    assert_ne!(a.stdout, c.stdout);
}
