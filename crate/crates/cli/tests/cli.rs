use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fpan(args: &[&str]) -> Output {
    fpan_env(args, &[])
}

fn fpan_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fpan"));
    cmd.args(args).env_remove("FPAN_SOLVER");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("not json ({e}): {}", stdout(o)))
}

fn have_z3() -> bool {
    let ok = Command::new("z3").arg("-version").output().is_ok_and(|o| o.status.success());
    if !ok {
        eprintln!("z3 not found; skipping");
    }
    ok
}

/// A stand-in solver that prints `reply` whatever it is given.
fn fake_solver(dir: &Path, reply: &str) -> String {
    let path = dir.join("solver.sh");
    std::fs::write(&path, format!("#!/bin/sh\nprintf '{reply}\\n'\n")).unwrap();
    format!("sh {} {{file}}", path.display())
}

#[test]
fn simulate_add2() {
    let o = fpan(&["simulate", "--network", "add2", "--format", "binary64", "--inputs", "1,0,0,0"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("z0 = 1 "), "{text}");
    assert!(text.contains("z1 = 0 "), "{text}");

    let o = fpan(&["simulate", "--network", "add2", "--inputs", "1,0,0,0", "--json"]);
    let r = json(&o);
    assert_eq!(r["schema"], 1);
    assert_eq!(r["verdict"], "ok");
    let outs = r["data"]["trace"]["outputs"].as_array().unwrap();
    assert_eq!(outs.len(), 2);
}

#[test]
fn check_lemmas_setz_p5() {
    let o = fpan(&[
        "check-lemmas",
        "--domain",
        "setz",
        "--format",
        "custom:p=5,emin=-40",
        "--window",
        "-14..0",
        "--json",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let r = json(&o);
    let reports = r["data"].as_array().expect("array of soundness reports");
    assert!(reports.len() > 50);
    assert!(reports.iter().all(|x| x["violation_count"] == 0));
    assert!(r["catalog_fingerprint"]["SETZ"].is_string());
}

#[test]
fn usage_errors_exit_3() {
    for args in [
        vec!["bogus"],
        vec!["simulate", "--network", "nope", "--inputs", "1"],
        vec!["simulate", "--network", "add2", "--inputs", "1,2"],
        vec!["simulate", "--network", "add2", "--format", "binary99", "--inputs", "1,0,0,0"],
        vec!["verify", "--network", "madd", "--k", "3", "--relation", "ulp"],
        vec!["verify", "--network", "madd", "--property", "dominance", "--relation", "ulp", "--k", "auto"],
        vec!["verify", "--network", "madd"],
        vec!["check-lemmas", "--window", "3..1"],
        vec!["search-error", "--network", "ddadd", "-p", "40"],
    ] {
        let o = fpan(&args);
        assert_eq!(code(&o), 3, "{args:?}");
    }
    assert_eq!(code(&fpan(&["--help"])), 0);
}

#[test]
fn sat_never_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    for reply in ["sat", "unknown", "timeout"] {
        let solver = fake_solver(dir.path(), reply);
        let o = fpan(&["verify", "--network", "madd", "--k", "90", "--solver", &solver]);
        assert_eq!(code(&o), 2, "{reply}: {}", stdout(&o));
    }
    let solver = fake_solver(dir.path(), "unsat");
    let o = fpan(&["verify", "--network", "madd", "--k", "90", "--solver", &solver]);
    assert_eq!(code(&o), 0);
}

#[test]
fn solver_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let solver = fake_solver(dir.path(), "unsat");
    let o = fpan_env(&["verify", "--network", "madd", "--k", "5", "--json"], &[("FPAN_SOLVER", &solver)]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["config"]["solver"], solver);
    let o = fpan_env(&["verify", "--network", "madd", "--k", "5"], &[("FPAN_SOLVER", "/nonexistent/solver {file}")]);
    assert_eq!(code(&o), 3);
}

#[test]
fn verify_madd_setz_binary64_auto() {
    if !have_z3() {
        return;
    }
    let o = fpan(&[
        "verify",
        "--network",
        "madd",
        "--domain",
        "setz",
        "--format",
        "binary64",
        "--property",
        "relerr",
        "--k",
        "auto",
        "--json",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let r = json(&o);
    assert_eq!(r["data"]["k"], 103);
    assert_eq!(r["verdict"], "proved");
}

#[test]
fn refutation_and_unrealized_sat() {
    if !have_z3() {
        return;
    }
    let o = fpan(&["verify", "--network", "add2", "--k", "1", "--format", "custom:p=4,emin=-30", "--json"]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    let r = json(&o);
    assert_eq!(r["verdict"], "refuted");
    let cex: Vec<String> = serde_json::from_value(r["data"]["counterexample"].clone()).unwrap();
    assert_eq!(cex.len(), 4);
    let o = fpan(&["simulate", "--network", "add2", "--format", "custom:p=4,emin=-30", "--inputs", &cex.join(","), "--json"]);
    assert_eq!(code(&o), 0);

    let o = fpan(&["verify", "--network", "ddadd", "--k", "13", "--domain", "seltzo", "--format", "custom:p=8,emin=-60"]);
    assert_eq!(code(&o), 2, "{}", stdout(&o));
}

#[test]
fn replay_reproduces_config() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    let o = fpan(&[
        "search-error",
        "--network",
        "madd",
        "-p",
        "3",
        "--bound",
        "0.125",
        "-o",
        first.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let o = fpan(&["replay", first.to_str().unwrap(), "-o", second.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let a: Value = serde_json::from_str(&std::fs::read_to_string(&first).unwrap()).unwrap();
    let b: Value = serde_json::from_str(&std::fs::read_to_string(&second).unwrap()).unwrap();
    assert_eq!(a["config"], b["config"]);
    assert_eq!(a["data"], b["data"]);
    assert_eq!(a["verdict"], b["verdict"]);
    assert_eq!(code(&fpan(&["replay", dir.path().join("missing.json").to_str().unwrap()])), 3);
}

#[test]
fn search_and_exhaustive() {
    let o = fpan(&["search-error", "--network", "add2", "-p", "4", "--window=-6..0", "--bound", "0.5", "--json"]);
    assert_eq!(code(&o), 1);
    assert!(json(&o)["data"]["error_f64"].as_f64().unwrap() >= 0.5);

    let o = fpan(&["exhaustive", "--network", "ddadd", "-p", "3", "--k", "4"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = fpan(&["exhaustive", "--network", "ddadd", "-p", "3", "--bound", "1/1024"]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
}

#[test]
fn emit_smt_is_deterministic() {
    let args = ["emit-smt", "--network", "ddadd", "--domain", "seltzo", "--k", "100"];
    let a = stdout(&fpan(&args));
    let b = stdout(&fpan(&args));
    assert_eq!(a, b);
    assert_eq!(a.matches("(declare-fun ").count(), 108);
    assert!(a.starts_with("; network ddadd_aug"));
    let q = fpan(&["emit-smt", "--lemma", "Z2", "--format", "binary16"]);
    assert_eq!(code(&q), 0);
    assert!(stdout(&q).contains("QF_BVFP"));
}

#[test]
fn network_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fast2sum.fpan");
    std::fs::write(&path, "network fast2sum\nwires a b\ninputs a b\ntwosum a b\noutputs s=a e=b\n").unwrap();
    let o = fpan(&["simulate", "--network", path.to_str().unwrap(), "--format", "binary16", "--inputs", "1,0.0001220703125"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("e = "));
    assert_eq!(code(&fpan(&["list-networks"])), 0);
}
