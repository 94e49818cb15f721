use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tunnelbench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(o)).unwrap()
}

#[test]
fn scan_prints_csv() {
    let o = bench(&["quantum", "scan", "--ell", "2", "--tmax", "3.141592653589793", "--samples", "101"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,p_exit"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (t, p) = l.split_once(',').unwrap();
            (t.parse().unwrap(), p.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 101);
    assert!((rows[50].1 - 1.0).abs() < 1e-12);
    assert!(String::from_utf8_lossy(&o.stderr).contains("best exit probability"));
}

#[test]
fn quasimomenta_csv_and_json() {
    let o = bench(&["spectral", "quasimomenta", "--ell", "5", "--alpha", "0"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 6);
    assert!(text.starts_with("j,branch,p,eigenvalue\n1,trig,"));
    let o = bench(&["spectral", "quasimomenta", "--ell", "4", "--alpha", "3", "--json"]);
    assert_eq!(code(&o), 0);
    assert!(json(&o)["hyper"].is_object());
}

#[test]
fn sweep_and_adiabatic() {
    let o = bench(&["spectral", "sweep", "--m", "4", "--ell", "5", "--s-grid", "21"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 22);
    let o = bench(&["quantum", "adiabatic", "--m", "2", "--ell", "2", "--time", "200"]);
    assert_eq!(code(&o), 0);
    assert!(json(&o)["exit_probability"].as_f64().unwrap() >= 0.9);
}

#[test]
fn build_then_inspect() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.twg");
    let o = bench(&[
        "build", "--m", "2", "--k", "1", "--ell", "5", "--unconditioned", "--rounds", "0", "--seed", "4",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["vertices"], 14);
    assert!(Path::new(&format!("{}.layout.json", out.display())).exists());
    let o = bench(&["spectral", "top", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert!(v["residual"].as_f64().unwrap() < 1e-8);
    assert_eq!(v["weights"]["l2_fraction_on_original"], 1.0);
}

#[test]
fn forecast_does_not_build() {
    let o = bench(&["build", "--m", "16", "--k", "2", "--ell", "9", "--forecast"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert!(v["vertices"].as_f64().unwrap() > 1e9);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&bench(&["build", "--m", "2"])), 2);
    assert_eq!(code(&bench(&["spectral", "quasimomenta", "--ell", "1", "--alpha", "0"])), 2);
    assert_eq!(code(&bench(&["run", "--preset", "nope"])), 2);
    let out = dir.path().join("x.twg");
    let o = bench(&[
        "build", "--m", "2", "--k", "1", "--ell", "5", "--threshold=-2", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("conditioning"));
    assert_eq!(code(&bench(&["report", dir.path().join("missing.json").to_str().unwrap()])), 1);
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"instances\": [").unwrap();
    assert_eq!(code(&bench(&["run", "--config", bad.to_str().unwrap()])), 2);
}

#[test]
fn failed_stage_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let config = serde_json::json!({
        "instances": [{
            "label": "bad",
            "params": {"m": 2, "k": 1, "ell": 5, "seed": 1, "rounds": 0,
                       "expander_threshold": -2.0, "expander_max_attempts": 2}
        }]
    });
    fs::write(&cfg, config.to_string()).unwrap();
    let o = bench(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    assert!(stdout(&o).contains("FAILED"));
}

#[test]
fn run_report_and_adversary() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("rec.json");
    let curves = dir.path().join("curves");
    let o = bench(&[
        "run", "--preset", "smoke", "--seed", "5", "--out", rec.to_str().unwrap(), "--curves",
        curves.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(curves.join("r0_gap.csv").exists());
    let saved: serde_json::Value = serde_json::from_str(&fs::read_to_string(&rec).unwrap()).unwrap();
    assert_eq!(saved["master_seed"], 5);
    let report = bench(&["report", rec.to_str().unwrap()]);
    assert_eq!(code(&report), 0);
    assert_eq!(stdout(&report), stdout(&o));

    let cfg = dir.path().join("suite.json");
    let suite = serde_json::json!({
        "params": {"m": 2, "k": 1, "ell": 5, "seed": 1, "rounds": 0, "condition_expanders": false},
        "adversary": "bfs",
        "budget": 500,
        "trials": 10,
        "master_seed": 3
    });
    fs::write(&cfg, suite.to_string()).unwrap();
    let o = bench(&["adversary", "run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["trials"], 10);
    assert_eq!(v["hits"]["successes"], 10);
}
