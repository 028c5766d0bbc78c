use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twobundle")).args(args).env_remove("TWOBUNDLE_TRUNCATION").output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn json(path: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn check_ids(report: &Value) -> Vec<(String, bool)> {
    report["suites"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|s| s["checks"].as_array().unwrap().iter())
        .map(|c| (c["id"].as_str().unwrap().to_string(), c["passed"].as_bool().unwrap()))
        .collect()
}

#[test]
fn verify_report_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (p(&dir, "a.json"), p(&dir, "b.json"));
    for out in [&a, &b] {
        let o = run(&["verify", "--cm", "CM-C", "--suite", "cartan", "--seed", "7", "--out", out]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let r = json(&a);
    assert_eq!(r["schema"], "twobundle-report/1");
    assert_eq!(r["crossed_module"], "CM-C");
    assert!(r["suites"][0]["checks"].as_array().unwrap().iter().all(|c| !c["anchor"].as_str().unwrap().is_empty()));
}

#[test]
fn ordinary_theory_passes_every_suite() {
    let o = run(&["verify", "--cm", "CM-T", "--suite", "all", "--samples", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    let names: Vec<_> = r["suites"].as_array().unwrap().iter().map(|s| s["name"].as_str().unwrap().to_string()).collect();
    assert_eq!(names, ["cartan", "connection", "gauge1", "gauge2", "basic", "matching", "cocycle"]);
}

#[test]
fn truncation_comes_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_twobundle"))
        .args(["verify", "--cm", "CM-T", "--suite", "connection"])
        .env("TWOBUNDLE_TRUNCATION", "5")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["truncation"], 5);
}

#[test]
fn input_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(&["verify", "--cm", "CM-T", "--suite", "gauge3"])), 2);
    assert_eq!(code(&run(&["verify", "--cm", "CM-T", "--truncation", "3"])), 2);
    assert_eq!(code(&run(&["verify", "--cm", &p(&dir, "missing.json")])), 2);
    let bad = p(&dir, "bad.json");
    std::fs::write(&bad, "{\"schema\": \"twobundle-scenario/1\"").unwrap();
    assert_eq!(code(&run(&["cocycle", "check", &bad])), 2);
}

/// Flip the sign of the first nonzero entry under `pointer`.
fn corrupt(cm: &mut Value, pointer: &str) {
    fn flip(v: &mut Value) -> bool {
        match v {
            Value::Array(xs) => xs.iter_mut().any(flip),
            Value::Number(n) if n.as_i64() != Some(0) => {
                *v = Value::from(-n.as_i64().unwrap());
                true
            }
            Value::String(s) if s != "0" => {
                *s = if let Some(t) = s.strip_prefix('-') { t.to_string() } else { format!("-{s}") };
                true
            }
            _ => false,
        }
    }
    assert!(flip(cm.pointer_mut(pointer).unwrap()), "nothing to corrupt at {pointer}");
}

#[test]
fn corrupted_crossed_module_file_is_a_schema_error() {
    let dir = TempDir::new().unwrap();
    let good = p(&dir, "cm.json");
    std::fs::write(&good, twobundle::liecm::instances::to_json(&twobundle::liecm::instances::cm_c())).unwrap();
    let o = run(&["verify", "--cm", &good, "--suite", "connection", "--samples", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for pointer in ["/g/structure", "/tau_dot"] {
        let mut v = json(&good);
        corrupt(&mut v, pointer);
        let bad = p(&dir, "bad.json");
        std::fs::write(&bad, v.to_string()).unwrap();
        let o = run(&["verify", "--cm", &bad, "--suite", "cartan"]);
        assert_eq!(code(&o), 2, "{pointer}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("crossed module"));
    }
}

fn random(dir: &TempDir, kind: &str, cm: &str, seed: &str) -> String {
    let path = p(dir, &format!("{kind}.json"));
    let o = run(&["random", kind, "--cm", cm, "--seed", seed, "--out", &path]);
    assert_eq!(code(&o), 0);
    path
}

/// Use one sample to keep the scenario tests quick.
fn lighten(path: &str, f: impl FnOnce(&mut Value)) {
    let mut v = json(path);
    v["samples"] = Value::from(1);
    f(&mut v);
    std::fs::write(path, v.to_string()).unwrap();
}

#[test]
fn random_scenarios_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = random(&dir, "paraequivalence", "CM-A", "5");
    let first = std::fs::read(&a).unwrap();
    let b = random(&dir, "paraequivalence", "CM-A", "5");
    assert_eq!(first, std::fs::read(b).unwrap());
    assert!(json(&a)["paraequivalence"].is_u64());
}

#[test]
fn each_random_kind_round_trips_through_its_checker() {
    let dir = TempDir::new().unwrap();
    let s = random(&dir, "paracocycle", "CM-A", "1");
    lighten(&s, |_| ());
    assert_eq!(code(&run(&["cocycle", "check", &s])), 0);

    let s = random(&dir, "paraequivalence", "CM-H", "2");
    lighten(&s, |_| ());
    let w = p(&dir, "transformed.json");
    let o = run(&["cocycle", "transform", &s, "--write", &w]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&w)["steps"][0]["op"], "transform");
    assert_eq!(code(&run(&["cocycle", "check", &w])), 0);

    let s = random(&dir, "equivalence", "CM-T", "3");
    lighten(&s, |_| ());
    let w = p(&dir, "equivalent.json");
    let o = run(&["cocycle", "equivalence", &s, "--write", &w]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(json(&w).get("equivalence").is_none());
    assert_eq!(code(&run(&["cocycle", "check", &w])), 0);
}

#[test]
fn transform_then_inverse_round_trip() {
    let dir = TempDir::new().unwrap();
    let s = random(&dir, "paraequivalence", "CM-A", "9");
    lighten(&s, |_| ());
    let seed = json(&s)["paraequivalence"].as_u64().unwrap().to_string();
    let (fwd, back, rep) = (p(&dir, "fwd.json"), p(&dir, "back.json"), p(&dir, "rep.json"));
    assert_eq!(code(&run(&["cocycle", "transform", &s, "--write", &fwd, "--out", &rep])), 0);
    let ids = check_ids(&json(&rep));
    assert!(ids.iter().any(|(id, ok)| id.starts_with("roundtrip.") && *ok));
    assert!(ids.iter().all(|(_, ok)| *ok));
    assert_eq!(code(&run(&["cocycle", "transform", &fwd, "--seed", &seed, "--inverse", "--write", &back])), 0);
    let steps = json(&back)["steps"].clone();
    assert_eq!(steps.as_array().unwrap().len(), 2);
    assert_eq!(steps[1]["inverse"], true);
    assert_eq!(code(&run(&["cocycle", "check", &back])), 0);
}

#[test]
fn one_patch_and_tetrahedron_scenarios() {
    let dir = TempDir::new().unwrap();
    let one = random(&dir, "paracocycle", "CM-C", "4");
    lighten(&one, |v| v["patches"] = Value::from(1));
    assert_eq!(code(&run(&["cocycle", "check", &one])), 0);

    let four = random(&dir, "paracocycle", "CM-T", "4");
    lighten(&four, |v| v["patches"] = Value::from(4));
    let rep = p(&dir, "tetra.json");
    assert_eq!(code(&run(&["cocycle", "check", &four, "--out", &rep])), 0);
    let ids = check_ids(&json(&rep));
    assert!(ids.iter().any(|(id, ok)| id == "base.tetra.0123" && *ok));
}

#[test]
fn tampered_scenario_exits_with_one() {
    let dir = TempDir::new().unwrap();
    let s = random(&dir, "paracocycle", "CM-A", "6");
    lighten(&s, |v| v["tamper"] = Value::from("t-bar"));
    let rep = p(&dir, "rep.json");
    let o = run(&["cocycle", "check", &s, "--out", &rep]);
    assert_eq!(code(&o), 1);
    let r = json(&rep);
    let failed: Vec<_> = check_ids(&r).into_iter().filter(|(_, ok)| !ok).map(|(id, _)| id).collect();
    assert!(failed.iter().any(|id| id.ends_with("cond3.012")), "{failed:?}");
}

#[test]
fn transform_without_pending_seed_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let s = random(&dir, "paracocycle", "CM-T", "1");
    assert_eq!(code(&run(&["cocycle", "transform", &s])), 2);
}

#[test]
fn relative_crossed_module_paths_resolve_against_the_scenario() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("mine.json"), twobundle::liecm::instances::to_json(&twobundle::liecm::instances::cm_t())).unwrap();
    let s = random(&dir, "paracocycle", "CM-T", "2");
    lighten(&s, |v| {
        v["cm"] = Value::from("mine.json");
        v["patches"] = Value::from(2);
    });
    assert!(Path::new(&s).exists());
    assert_eq!(code(&run(&["cocycle", "check", &s])), 0);
}
