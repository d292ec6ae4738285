use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_killrange");

fn specs() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../specs"))
}

fn run(cache: &Path, args: &[&str]) -> (i32, Value) {
    let out: Output = Command::new(BIN)
        .args(args)
        .env("KILLRANGE_CACHE", cache)
        .output()
        .expect("binary runs");
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().expect("exit code"), v)
}

fn spec(name: &str) -> String {
    specs().join(name).to_string_lossy().into_owned()
}

#[test]
fn exactness_of_the_obstruction_case() {
    let dir = tempfile::tempdir().unwrap();
    let (code, v) = run(dir.path(), &["exactness", &spec("s2_x_mink2.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["exact"], Value::Bool(false));
    assert_eq!(v["rule"], "hermitian×(flat|CW)");
    assert_eq!(v["outcome"], "not_exact");
}

#[test]
fn cw_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let (code, v) = run(dir.path(), &["cw", "[[1,0],[0,2]]"]);
    assert_eq!(code, 0);
    assert_eq!(v["h_dims"], serde_json::json!([2, 4, 6]));
    assert_eq!(v["E_dims"], serde_json::json!([6, 8, 10]));
    assert_eq!(v["exact"], Value::Bool(true));
}

#[test]
fn verify_flat_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, v) = run(dir.path(), &["verify", &spec("flat12.json"), "--seeds", "1,2"]);
    assert_eq!(code, 0);
    assert_eq!(v["pass"], Value::Bool(true));
    assert_eq!(v["seeds"], serde_json::json!([1, 2]));
}

#[test]
fn malformed_spec_exits_2_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let (code, v) = run(dir.path(), &["describe", r#"{"type":"torus"}"#]);
    assert_eq!(code, 2);
    assert!(v["error"].as_str().unwrap().contains("torus"));
    let (code, _) = run(dir.path(), &["cw", "[[1,2],[0,1]]"]);
    assert_eq!(code, 2);
    let (code, _) = run(dir.path(), &["describe", "/no/such/file.json"]);
    assert_eq!(code, 2);
    let (code, _) = run(dir.path(), &["verify", &spec("flat12.json"), "--degree", "9"]);
    assert_eq!(code, 2);
}

#[test]
fn witness_precondition_and_success() {
    let dir = tempfile::tempdir().unwrap();
    let (code, v) = run(dir.path(), &["witness", &spec("flat12.json")]);
    assert_eq!(code, 2);
    assert!(v["error"].as_str().unwrap().contains("precondition"));
    let (code, v) = run(dir.path(), &["witness", &spec("s2_x_mink2.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["residual_zero"], Value::Bool(true));
    assert_eq!(v["obstruction_nonzero"], Value::Bool(true));
}

#[test]
fn permuted_factors_hit_the_same_cache_entry() {
    let dir = tempfile::tempdir().unwrap();
    let a = r#"{"type":"product","factors":[{"type":"sphere","n":2,"hermitian":true},{"type":"flat","p":1,"q":1}]}"#;
    let b = r#"{"type":"product","factors":[{"type":"flat","p":1,"q":1},{"type":"sphere","n":2,"hermitian":true}]}"#;
    let (_, va) = run(dir.path(), &["filtration", a]);
    let entries = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(entries, 1);
    let (_, vb) = run(dir.path(), &["filtration", b]);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    assert_eq!(va, vb);
}

#[test]
fn cached_result_is_served_and_no_cache_bypasses() {
    let dir = tempfile::tempdir().unwrap();
    let (_, first) = run(dir.path(), &["exactness", &spec("cw12.json")]);
    let entry = std::fs::read_dir(dir.path()).unwrap().next().unwrap().unwrap().path();
    // Tamper with the entry: a hit must return exactly what is stored.
    let mut stored: Value = serde_json::from_str(&std::fs::read_to_string(&entry).unwrap()).unwrap();
    stored["result"]["note"] = Value::String("from cache".into());
    std::fs::write(&entry, stored.to_string()).unwrap();
    let (_, second) = run(dir.path(), &["exactness", &spec("cw12.json")]);
    assert_eq!(second["note"], "from cache");
    let (_, fresh) = run(dir.path(), &["exactness", &spec("cw12.json"), "--no-cache"]);
    assert_eq!(fresh, first);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let cache = dir.path().join("cache");
    let (code, v) = run(&cache, &["describe", &spec("cw12.json"), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v, Value::Null);
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(written["lorentzian"], Value::Bool(true));
    let (code, _) = run(&cache, &["describe", &spec("cw12.json"), "--out", "/no/such/dir/x.json"]);
    assert_eq!(code, 2);
}

#[test]
fn cache_dir_flag_overrides_env() {
    let dir = tempfile::tempdir().unwrap();
    let flag_dir = dir.path().join("flag");
    let env_dir = dir.path().join("env");
    run(&env_dir, &["cw", "[[1]]", "--cache-dir", flag_dir.to_str().unwrap()]);
    assert_eq!(std::fs::read_dir(&flag_dir).unwrap().count(), 1);
    assert!(!env_dir.exists());
}
