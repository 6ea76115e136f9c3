//! End-to-end runs of the `polyham` binary: golden reports, exit codes, CSV
//! trajectories and the output-directory override.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use polyham_cli::golden::{compare, FLOAT_TOLERANCE};

fn polyham(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyham"))
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .env_remove(polyham_cli::OUT_DIR_VAR)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

fn assert_golden(name: &str, args: &[&str]) {
    let out = polyham(args);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    let expected: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let diffs = compare(&expected, &json(&out), FLOAT_TOLERANCE);
    assert!(diffs.is_empty(), "{name} differs from golden:\n{}", diffs.join("\n"));
}

#[test]
fn example_reports_match_golden() {
    assert_golden("ex1_report.json", &["example", "ex1"]);
    assert_golden("ex2_report.json", &["example", "ex2"]);
}

#[test]
fn command_reports_match_golden() {
    assert_golden("info_ex1.json", &["info", "builtin:ex1"]);
    assert_golden("conservative_ex2.json", &["conservative", "builtin:ex2"]);
    assert_golden("equilibrium_ex2.json", &["equilibrium", "builtin:ex2"]);
    assert_golden("leaves_ex1.json", &["leaves", "builtin:ex1"]);
    assert_golden("poisson_check_ex1.json", &["poisson-check", "builtin:ex1", "--samples", "20"]);
}

#[test]
fn example_reports_carry_reference_values() {
    let ex1 = json(&polyham(&["example", "ex1"]));
    let b = &ex1["leaves"]["reduced"];
    assert_eq!(b, &serde_json::json!([["0", "1", "-1/2"], ["-1", "0", "-3/2"], ["1/2", "3/2", "0"]]));
    assert_eq!(ex1["equilibria"]["directions"][0]["model"], serde_json::json!(["6/5", "-4/9", "-1"]));
    assert_eq!(ex1["verdict"], "ok");

    let ex2 = json(&polyham(&["example", "ex2"]));
    let eq = &ex2["reconstruction"]["equilibrium"];
    assert_eq!(eq["q_model"], serde_json::json!(["-9/2", "8", "0"]));
    assert_eq!(eq["meets_prism"], false);
    assert_eq!(ex2["repeller"]["model_point"], serde_json::json!(["1", "0", "0"]));
    assert_eq!(ex2["repeller"]["kind"], "repeller");
    assert_eq!(ex2["sink"]["model_point"], serde_json::json!(["0", "0", "1"]));
    assert_eq!(ex2["sink"]["kind"], "sink");
    assert_eq!(ex2["verdict"], "ok");
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for args in [&["example", "ex2"][..], &["poisson-check", "builtin:ex2", "--seed", "7", "--samples", "30"]] {
        assert_eq!(polyham(args).stdout, polyham(args).stdout);
    }
}

#[test]
fn seed_changes_the_sweep() {
    let a = json(&polyham(&["poisson-check", "builtin:ex2", "--seed", "1", "--samples", "10"]));
    let b = json(&polyham(&["poisson-check", "builtin:ex2", "--seed", "2", "--samples", "10"]));
    assert_eq!(a["verdict"], "poisson");
    assert_ne!(a["jacobi_fd"]["max_residual"], b["jacobi_fd"]["max_residual"]);
}

#[test]
fn exit_codes() {
    let out = polyham(&["info", "tests/data/bad_token.game"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 4, column 8"), "{}", stderr(&out));

    let out = polyham(&["info", "tests/data/short_row.game"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("row 3 has 5 entries"), "{}", stderr(&out));

    // informative verdicts succeed
    let out = polyham(&["conservative", "tests/data/counterexample.game"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdict"], "not-conservative");

    let out = polyham(&["conservative", "tests/data/counterexample.game", "--expect", "conservative"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(&out)["verdict"], "not-conservative");

    let out = polyham(&["conservative", "builtin:ex1", "--expect", "conservative"]);
    assert_eq!(out.status.code(), Some(0));

    assert_eq!(polyham(&["info", "builtin:ex9"]).status.code(), Some(3));
    assert_eq!(polyham(&["integrate", "tests/data/counterexample.game", "--x0", "1,0"]).status.code(), Some(3));
    assert_eq!(polyham(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn verdicts_of_each_command() {
    let verdict = |args: &[&str]| json(&polyham(args))["verdict"].as_str().unwrap().to_string();
    assert_eq!(verdict(&["info", "tests/data/rps.game"]), "skew");
    assert_eq!(verdict(&["info", "builtin:ex1"]), "not-skew");
    assert_eq!(verdict(&["equilibrium", "builtin:ex1"]), "interior");
    assert_eq!(verdict(&["equilibrium", "builtin:ex2"]), "exterior");
    assert_eq!(verdict(&["poisson-check", "tests/data/counterexample.game"]), "not-poisson");
    assert_eq!(verdict(&["leaves", "tests/data/rps.game", "--point", "1/3,1/3,1/3"]), "ok");
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

#[test]
fn integrate_ex1_conserves_h_in_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_polyham"))
        .args(["integrate", "builtin:ex1", "--t-end", "100", "--out", "ex1.csv"])
        .env(polyham_cli::OUT_DIR_VAR, dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let summary = json(&out);
    assert_eq!(summary["csv"], dir.path().join("ex1.csv").display().to_string());
    let csv = std::fs::read_to_string(dir.path().join("ex1.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,x_1,x_2,x_3,x_4,x_5,x_6,H,c_1");
    let h = column(&csv, "H");
    assert!((h[h.len() - 1] - h[0]).abs() <= 1e-8);
    let c = column(&csv, "c_1");
    assert!((c[c.len() - 1] - c[0]).abs() <= 1e-8);
    assert_eq!(column(&csv, "t").last(), Some(&100.0));
    assert!(summary["drift"]["hamiltonian_drift"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn integrate_to_stdout_and_boundary_start() {
    let out = polyham(&["integrate", "tests/data/rps.game", "--method", "rk4", "--max-step", "0.01", "--stride", "100"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = stdout(&out);
    assert_eq!(csv.lines().next().unwrap(), "t,x_1,x_2,x_3,H");
    assert_eq!(csv.lines().count(), 1 + 20 + 1);

    // on a face the monitors are dropped, not fatal
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("face.csv");
    let out = polyham(&[
        "integrate",
        "builtin:ex1",
        "--x0",
        "1,0,1/2,1/2,1/2,1/2",
        "--t-end",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(json(&out)["note"].as_str().unwrap().contains("boundary"));
    let csv = std::fs::read_to_string(&path).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,x_1,x_2,x_3,x_4,x_5,x_6");
    assert!(column(&csv, "x_2").iter().all(|v| *v == 0.0));
}

#[test]
fn example_writes_files_to_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = polyham(&["example", "ex2", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let written = std::fs::read_to_string(dir.path().join("ex2_report.json")).unwrap();
    assert_eq!(written, stdout(&out));
    let csv = std::fs::read_to_string(dir.path().join("ex2_trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,x_1,x_2,x_3,x_4,x_5,H,c_1\n"));
}

#[test]
fn reads_games_from_stdin() {
    use std::io::Write;
    let mut child = Command::new(env!("CARGO_BIN_EXE_polyham"))
        .args(["info", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"format = v1; signature = [1]; payoff = [[0]]\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["signature"], serde_json::json!([1]));
}
