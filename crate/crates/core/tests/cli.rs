use std::path::Path;
use std::process::{Command, Output};

fn hjnet(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hjnet"));
    cmd.args(args).env_remove("RUST_LOG").env_remove("HJNET_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn run_in(dir: &Path, extra: &[&str]) -> Output {
    let out = dir.to_str().unwrap();
    let mut args = vec!["run", "triangle_quadratic", "--dx", "0.1", "--out-dir", out];
    args.extend_from_slice(extra);
    hjnet(&args, &[])
}

#[test]
fn list_shows_bundled_scenarios() {
    let out = hjnet(&["list"], &[]);
    assert!(out.status.success());
    let names = text(&out.stdout);
    for name in ["triangle_quadratic", "triangle_potential", "traffic_circle", "traffic_circle_two_targets"] {
        assert!(names.lines().any(|l| l == name), "{names}");
    }
}

#[test]
fn single_run_writes_solution_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &[]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains("E_inf"));

    let mut rdr = csv::Reader::from_path(dir.path().join("solution.csv")).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["arc_id", "i", "s", "x1", "x2", "t", "value"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert!(!rows.is_empty());
    for r in &rows {
        assert!(r[6].parse::<f64>().unwrap().is_finite());
    }

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["scenario"], "triangle_quadratic");
    let single = &meta["single"];
    assert_eq!(single["dx"], 0.1);
    assert!(single["courant"].as_f64().unwrap() > 1.0);
    assert!(single["errors"]["e_inf"].as_f64().unwrap() < 0.1);
}

#[test]
fn emit_steps_writes_every_level() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["--emit-steps"]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(dir.path().join("steps.csv").exists());
    let branches = std::fs::read_to_string(dir.path().join("branches.jsonl")).unwrap();
    // 20 steps of 0.05, 3 vertices
    assert_eq!(branches.lines().count(), 60);
}

#[test]
fn ladder_writes_convergence_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["--ladder", "3", "--dt-rule", "half_dx", "--reference", "exact"]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let mut rdr = csv::Reader::from_path(dir.path().join("convergence.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    let dx: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(dx, [0.1, 0.05, 0.025]);
    let rate: f64 = rows[2][3].parse().unwrap();
    assert!(rate > 0.8, "rate {rate}");
}

#[test]
fn runs_are_reproducible_across_thread_counts() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let pa = a.path().to_str().unwrap();
    let pb = b.path().to_str().unwrap();
    let args = |p| vec!["run", "traffic_circle", "--dx", "0.1", "--T", "1", "--out-dir", p];
    assert!(hjnet(&args(pa), &[("HJNET_THREADS", "1")]).status.success());
    assert!(hjnet(&args(pb), &[("HJNET_THREADS", "4")]).status.success());
    let read = |d: &Path| std::fs::read(d.join("solution.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn bad_thread_count_fails() {
    let out = hjnet(&["list"], &[("HJNET_THREADS", "zero")]);
    assert!(!out.status.success());
    assert!(text(&out.stderr).contains("HJNET_THREADS"));
}

#[test]
fn inadmissible_limiter_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.json");
    std::fs::write(
        &file,
        r#"{
  "schema": 1,
  "name": "bad_limiter",
  "network": {"builtin": "traffic_circle"},
  "costs": {"default": {"family": "quadratic", "potential": [{"weight": 1, "center": [1, 1]}]}},
  "limiters": {"values": {"v1": 3, "v2": 1, "v3": 0, "v4": 0.5, "v5": 0, "v6": 0.5, "v7": 2, "v8": 1}},
  "initial": "zero",
  "T": 1,
  "run": {"dx": 0.1}
}"#,
    )
    .unwrap();
    let out = hjnet(
        &["run", file.to_str().unwrap(), "--out-dir", dir.path().join("out").to_str().unwrap()],
        &[],
    );
    assert!(!out.status.success());
    let err = text(&out.stderr);
    assert!(err.contains("v1") && err.contains("INADMISSIBLE"), "{err}");
    assert!(!dir.path().join("out").join("solution.csv").exists());
}

#[test]
fn invalid_scenario_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.json");
    std::fs::write(
        &file,
        r#"{"schema": 1, "name": "x", "network": {"builtin": "triangle"},
            "costs": {"default": {"family": "quadratic"}}, "limiters": {"uniform": -5},
            "initial": "zero", "T": -1, "run": {"dx": 0.1}}"#,
    )
    .unwrap();
    let out = hjnet(&["run", file.to_str().unwrap()], &[]);
    assert!(!out.status.success());
    assert!(text(&out.stderr).contains("T"), "{}", text(&out.stderr));
}

#[test]
fn unknown_scenario_fails() {
    let out = hjnet(&["run", "no_such_scenario"], &[]);
    assert!(!out.status.success());
    assert!(text(&out.stderr).starts_with("error:"));
}

#[test]
fn check_invariants_flag_is_accepted_for_passing_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["--check-invariants", "--T", "0.5"]);
    assert!(out.status.success(), "{}", text(&out.stderr));
}
