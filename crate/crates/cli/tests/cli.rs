use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn moldsched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moldsched")).args(args).env_remove("MOLDSCHED_SEED").output().unwrap()
}

fn report(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

// two 5-wide 1-unit tasks on 11 processors with delta = 5
const PAIR: &str = r#"{"delta": 5, "k": 5, "m": 11, "tasks": [
  {"id": 0, "value": "3", "profile": {"type": "table", "workloads": ["1","1","1","1","1"]}},
  {"id": 1, "value": "2", "profile": {"type": "piecewise", "d1": "2", "linear_limit": 5, "growth": "0"}}
]}"#;

#[test]
fn params_echo_constants() {
    let r = report(&moldsched(&["params", "--delta", "5", "-m", "11"]));
    assert_eq!(r["H"], 4);
    assert_eq!(r["nu"], 2);
    assert_eq!(r["r"], "3/4");
    assert_eq!(r["theta"], "5/11");
}

#[test]
fn schedule_writes_a_valid_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "pair.json", PAIR);
    let sched = dir.path().join("s.json");
    let r = report(&moldsched(&["schedule", "-i", &input, "-d", "1", "-o", sched.to_str().unwrap()]));
    assert_eq!(r["exit_reason"], "all_placed");
    assert_eq!(r["placed"], 2);
    let s: Value = serde_json::from_str(&std::fs::read_to_string(sched).unwrap()).unwrap();
    assert_eq!(s["placements"].as_array().unwrap().len(), 2);
}

#[test]
fn makespan_and_welfare_report_their_results() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "pair.json", PAIR);
    let r = report(&moldsched(&["makespan", "-i", &input, "--epsilon", "1/10"]));
    assert_eq!(r["fast_exit"], true);
    let w = report(&moldsched(&["welfare", "-i", &input, "--tau", "1"]));
    assert_eq!(w["alpha"], "1");
    assert_eq!(w["welfare"], "5");
}

#[test]
fn classify_lists_every_task_once() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "pair.json", PAIR);
    let r = report(&moldsched(&["classify", "-i", &input, "-d", "1/2"]));
    let mut seen: Vec<u64> = ["dedicated", "short", "infeasible", "class_2", "class_3"]
        .iter()
        .filter_map(|k| r[*k].as_array())
        .flatten()
        .map(|v| v.as_u64().unwrap())
        .collect();
    seen.sort();
    assert_eq!(seen, vec![0, 1]);
}

#[test]
fn generation_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "spec.json",
        r#"{"n": 6, "delta": 4, "k": 6, "m": 12, "workload_range": ["1", "10"], "growth_range": ["0", "1"]}"#,
    );
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let c = dir.path().join("c.json");
    report(&moldsched(&["gen", "--spec", &spec, "--seed", "7", "-o", a.to_str().unwrap()]));
    report(&moldsched(&["gen", "--spec", &spec, "--seed", "7", "-o", b.to_str().unwrap()]));
    report(&moldsched(&["gen", "--spec", &spec, "--seed", "8", "-o", c.to_str().unwrap()]));
    let read = |p: &Path| std::fs::read_to_string(p).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));

    let env = Command::new(env!("CARGO_BIN_EXE_moldsched"))
        .args(["gen", "--spec", &spec, "-o", c.to_str().unwrap()])
        .env("MOLDSCHED_SEED", "7")
        .output()
        .unwrap();
    assert!(env.status.success());
    assert_eq!(read(&a), read(&c));
}

#[test]
fn exit_codes_distinguish_failures() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "pair.json", PAIR);
    assert_eq!(moldsched(&["schedule", "-i", &input, "-d", "0"]).status.code(), Some(2));
    assert_eq!(moldsched(&["makespan", "-i", &input, "--epsilon", "2"]).status.code(), Some(2));

    let broken = write(dir.path(), "broken.json", r#"{"delta": 5, "k": 5, "m": 11, "tasks": [}"#);
    assert_eq!(moldsched(&["schedule", "-i", &broken, "-d", "1"]).status.code(), Some(3));
    let bad_profile = write(
        dir.path(),
        "bad.json",
        r#"{"delta": 2, "k": 3, "m": 3, "tasks": [{"id": 0, "profile": {"type": "table", "workloads": ["2","1","1"]}}]}"#,
    );
    assert_eq!(moldsched(&["schedule", "-i", &bad_profile, "-d", "1"]).status.code(), Some(3));
    assert_eq!(moldsched(&["schedule", "-i", "/nonexistent.json", "-d", "1"]).status.code(), Some(3));
    let unvalued = write(
        dir.path(),
        "unvalued.json",
        r#"{"delta": 1, "k": 1, "m": 1, "tasks": [{"id": 0, "profile": {"type": "table", "workloads": ["1"]}}]}"#,
    );
    assert_eq!(moldsched(&["welfare", "-i", &unvalued, "--tau", "1"]).status.code(), Some(3));
}

#[test]
fn verify_compares_against_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let saved = dir.path().join("verify.json");
    let r = report(&moldsched(&["verify", "--seeds", "0..10", "--report", saved.to_str().unwrap()]));
    assert_eq!(r["instances"], 10);
    assert_eq!(r["makespan_bound_violations"], 0);
    let on_disk: Value = serde_json::from_str(&std::fs::read_to_string(saved).unwrap()).unwrap();
    assert_eq!(on_disk, r);
    assert_eq!(moldsched(&["verify", "--seeds", "5..5"]).status.code(), Some(2));
}
