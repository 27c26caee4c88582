use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_takiff-toda"));
    cmd.env_remove("TAKIFF_TODA_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_canonical_writes_monotone_times() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let o = run(&[
        "simulate", "--type", "A", "--rank", "1", "--l", "1", "--formulation", "canonical",
        "--t-end", "10", "--dt", "1e-3", "--out", path_arg(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(&out).unwrap();
    assert_eq!(&r.headers().unwrap()[0], "t");
    let times: Vec<f64> = r.records().map(|rec| rec.unwrap()[0].parse().unwrap()).collect();
    assert_eq!(times.len(), 10_001);
    assert!(times.windows(2).all(|w| w[1] > w[0]));
    assert!((times.last().unwrap() - 10.0).abs() < 1e-9);
}

#[test]
fn zero_series_is_all_zero() {
    let o = run(&["series", "--a0", "0", "--a1", "0", "--a2", "0", "--c0", "0", "--order", "50"]);
    assert_eq!(o.status.code(), Some(0));
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    let rows: Vec<_> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 51);
    for row in rows {
        assert_eq!(row[1].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn check_global_reports_verdict() {
    let o = run(&["series", "check-global", "--c0", "0.5", "--c1", "0.2", "--c2", "1", "--c3", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8(o.stdout).unwrap().ends_with("global condition holds\n"));
}

#[test]
fn reduce_rejects_elements_off_the_slice() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"command": "reduce", "algebra": {"rank": 1, "l": 1},
            "element": [{"label": "f1", "level": 0, "num": 1}]}"#,
    )
    .unwrap();
    let o = run(&["--config", path_arg(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("support"));
}

#[test]
fn reduce_emits_section_data() {
    let point = r#"[{"label":"f1","level":0,"num":1},{"label":"f1","level":1,"num":1},
                    {"label":"h1","level":0,"num":3}]"#;
    let o = run(&["reduce", "--rank", "1", "--l", "1", "--point", point]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["orbit_discrepancy"], "0");
    assert_eq!(v["coordinates"].as_array().unwrap().len(), 2);
}

#[test]
fn positivity_loss_exits_with_two() {
    let o = run(&["simulate", "--rank", "1", "--l", "0", "--t-end", "50", "--dt", "2", "--out", "/dev/null"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
    assert_eq!(run(&["simulate", "--dt"]).status.code(), Some(1));
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["series", "--order", "2"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let args = ["invariants", "--rank", "2", "--l", "2", "--all", "--seed", "17"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, run(&["invariants", "--rank", "2", "--l", "2", "--all", "--seed", "18"]).stdout);

    let mut env = bin();
    env.args(["invariants", "--rank", "2", "--l", "2", "--all"]).env("TAKIFF_TODA_SEED", "17");
    assert_eq!(env.output().unwrap().stdout, a.stdout);
}

#[test]
fn config_file_drives_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out = dir.path().join("out.csv");
    let text = format!(
        r#"{{"command": "simulate", "algebra": {{"type": "A", "rank": 2, "l": 0}},
            "formulation": "lax", "seed": 5,
            "integrator": {{"t_end": 1.0, "dt": 0.01, "method": "rk45", "stride": 10}},
            "outputs": {{"path": {:?}}}}}"#,
        out.to_str().unwrap()
    );
    std::fs::write(&cfg, text).unwrap();
    let first = run(&["--config", path_arg(&cfg)]);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let bytes = std::fs::read(&out).unwrap();
    assert_eq!(String::from_utf8_lossy(&bytes).lines().count(), 12);
    run(&["--config", path_arg(&cfg)]);
    assert_eq!(std::fs::read(&out).unwrap(), bytes);
}

#[test]
fn quick_check_passes() {
    let o = run(&["check"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 11);
    assert!(!text.lines().any(|l| l.starts_with("FAIL")));
}
