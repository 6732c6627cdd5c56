use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn bnf() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bnf"));
    c.env_remove("BNF_MAX_TERMS");
    c
}

fn run(args: &[&str]) -> Output {
    bnf().args(args).output().unwrap()
}

fn ok_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn write(dir: &TempDir, name: &str, v: &Value) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn quartic(dir: &TempDir) -> PathBuf {
    write(dir, "quartic.json", &json!({"n": 1, "d": 0, "E0": "0", "u": ["1"], "coeffs": [{"alpha": [2], "c": "1"}]}))
}

fn barrier(dir: &TempDir) -> PathBuf {
    write(dir, "barrier.json", &json!({"n": 1, "d": 1, "E0": "1", "u": ["1"], "coeffs": []}))
}

#[test]
fn quartic_normal_form() {
    let dir = TempDir::new().unwrap();
    let v = ok_json(&run(&["bnf", s(&quartic(&dir)), "--order", "3"]));
    assert_eq!(v["mode"], "exact");
    let h2 = &v["unscaled"]["actions"][0];
    assert_eq!(h2["N"], 2);
    assert_eq!(h2["terms"][0]["re"], "3/8");
    assert_eq!(v["manifest"]["command"], "bnf");
}

#[test]
fn quadratic_has_no_corrections() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "q.json", &json!({"n": 2, "d": 1, "E0": "0", "u": ["1", "3/2"], "coeffs": []}));
    let v = ok_json(&run(&["bnf", s(&spec), "--order", "4"]));
    for h in v["normal_form"]["actions"].as_array().unwrap() {
        assert!(h["terms"].as_array().unwrap().is_empty(), "{h}");
    }
}

#[test]
fn resonant_frequencies_exit_2() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "r.json",
        &json!({"n": 2, "d": 0, "E0": "0", "u": ["1", "2"], "coeffs": [{"alpha": [2, 0], "c": "1"}]}),
    );
    let out = run(&["bnf", s(&spec), "--order", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("[2, -1]") || err.contains("[2,-1]"), "{err}");
}

#[test]
fn resonances_per_h_and_bundle() {
    let dir = TempDir::new().unwrap();
    let nf = dir.path().join("nf.json");
    ok(&run(&["bnf", s(&barrier(&dir)), "--order", "2", "-o", s(&nf)]));
    let out_dir = dir.path().join("res");
    let out = run(&["resonances", s(&nf), "--h", "0.01,0.02", "--kmax", "5", "--out-dir", s(&out_dir)]);
    assert!(out.status.success());
    let one: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("resonances_h0.01.json")).unwrap()).unwrap();
    assert_eq!(one["values"].as_array().unwrap().len(), 6);
    assert!(out_dir.join("resonances_h0.02.json").exists());

    let v = ok_json(&run(&["resonances", s(&nf), "--h", "0.05", "--kmax", "0"]));
    let lists = v["lists"].as_array().unwrap();
    assert_eq!(lists.len(), 1);
    let vals = lists[0]["values"].as_array().unwrap();
    assert_eq!(vals.len(), 1);
    assert!((vals[0]["re"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((vals[0]["im"].as_f64().unwrap() + 0.05).abs() < 1e-12);
}

#[test]
fn resonances_need_h() {
    let dir = TempDir::new().unwrap();
    let nf = dir.path().join("nf.json");
    ok(&run(&["bnf", s(&barrier(&dir)), "--order", "2", "-o", s(&nf)]));
    assert_eq!(run(&["resonances", s(&nf), "--kmax", "3"]).status.code(), Some(3));
}

#[test]
fn invert_recovers_spec() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "s.json",
        &json!({"n": 1, "d": 1, "E0": "1", "u": ["1"], "coeffs": [{"alpha": [2], "c": "1/5"}]}),
    );
    let nf = dir.path().join("nf.json");
    ok(&run(&["bnf", s(&spec), "--order", "2", "--mode", "float", "-o", s(&nf)]));
    let res = dir.path().join("res");
    assert!(run(&["resonances", s(&nf), "--h", "0.01,0.015,0.02", "--kmax", "6", "--out-dir", s(&res)]).status.success());
    let inputs: Vec<PathBuf> = ["0.01", "0.015", "0.02"].iter().map(|h| res.join(format!("resonances_h{h}.json"))).collect();
    let report = dir.path().join("report.json");
    let mut args = vec!["invert"];
    args.extend(inputs.iter().map(|p| s(p)));
    args.extend(["--order", "2", "--report", s(&report)]);
    let v = ok_json(&run(&args));
    assert_eq!(v["d"], 1);
    let c: f64 = v["coeffs"][0]["c"].as_str().unwrap().parse().unwrap();
    assert!((c - 0.2).abs() < 1e-6, "{c}");
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["structure"]["d"], 1);

    let single = run(&["invert", s(&inputs[0]), "--order", "2"]);
    assert_eq!(single.status.code(), Some(2));
}

#[test]
fn oracle_on_barrier() {
    let dir = TempDir::new().unwrap();
    let v = ok_json(&run(&["oracle", s(&barrier(&dir)), "--h", "0.05", "--basis", "40"]));
    let vals = v["values"].as_array().unwrap();
    assert!(!vals.is_empty());
    for (k, z) in vals.iter().enumerate() {
        assert!((z["re"].as_f64().unwrap() - 1.0).abs() < 1e-10);
        assert!((z["im"].as_f64().unwrap() + 0.05 * (2 * k + 1) as f64).abs() < 1e-10);
    }
    let cfg = write(&dir, "cfg.json", &json!({"h": 0.05, "bogus": 1}));
    assert_eq!(run(&["oracle", s(&barrier(&dir)), "--config", s(&cfg)]).status.code(), Some(3));
}

#[test]
fn roundtrip_modes() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "s.json",
        &json!({"n": 2, "d": 1, "E0": "1/3", "u": ["1", "3/2"], "coeffs": [
            {"alpha": [2, 0], "c": "1/7"}, {"alpha": [1, 1], "c": "-2/5"}, {"alpha": [0, 3], "c": "1/9"}
        ]}),
    );
    let exact = ok_json(&run(&["roundtrip", s(&spec), "--order", "3"]));
    assert_eq!(exact["identical"], true);
    assert_eq!(exact["max_diff"], "0");
    let float = ok_json(&run(&["roundtrip", s(&spec), "--order", "3", "--mode", "float"]));
    let diff: f64 = float["max_diff"].as_str().map_or_else(|| float["max_diff"].as_f64().unwrap(), |x| x.parse().unwrap());
    assert!(diff <= 1e-9, "{diff}");
    let trunc = ok_json(&run(&["roundtrip", s(&spec), "--order", "2"]));
    assert_eq!(trunc["identical"], true);
    assert!(trunc["coefficients"].as_array().unwrap().iter().all(|r| r["alpha"] != json!([0, 3])));
}

#[test]
fn exact_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let a = run(&["random-spec", "--seed", "7", "--n", "2", "--d", "1", "--max-degree", "3"]);
    let b = run(&["random-spec", "--seed", "7", "--n", "2", "--d", "1", "--max-degree", "3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let spec = dir.path().join("r.json");
    std::fs::write(&spec, &a.stdout).unwrap();
    let x = run(&["bnf", s(&spec), "--order", "3"]);
    let y = run(&["bnf", s(&spec), "--order", "3"]);
    assert!(x.status.success());
    assert_eq!(x.stdout, y.stdout);
}

#[test]
fn max_terms_variable() {
    let dir = TempDir::new().unwrap();
    let spec = quartic(&dir);
    let bad = bnf().args(["bnf", s(&spec), "--order", "3"]).env("BNF_MAX_TERMS", "lots").output().unwrap();
    assert_eq!(bad.status.code(), Some(3));
    let tight = bnf().args(["bnf", s(&spec), "--order", "4"]).env("BNF_MAX_TERMS", "1").output().unwrap();
    assert_ne!(tight.status.code(), Some(0));
    let fine = bnf().args(["bnf", s(&spec), "--order", "3"]).env("BNF_MAX_TERMS", "100000").output().unwrap();
    assert!(fine.status.success());
}

#[test]
fn usage_errors() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["bnf", "/nonexistent/spec.json", "--order", "2"]).status.code(), Some(3));
}
