use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qarrange(args: &[&str], cache: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qarrange"));
    cmd.args(args).env("RUST_LOG", "warn");
    match cache {
        Some(dir) => cmd.env("QARRANGE_CACHE_DIR", dir),
        None => cmd.arg("--no-cache"),
    };
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = qarrange(args, None);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    stdout(&o)
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok(args)).unwrap()
}

#[test]
fn lines_headers() {
    assert!(ok(&["lines", "U"]).starts_with("165 lines in dimension 5\n"));
    let s1 = ok(&["lines", "S1"]);
    assert!(s1.contains("9 frames of 4 mutually orthogonal lines"));
    assert_eq!(s1.lines().filter(|l| l.contains(": (")).count(), 36);
    assert_eq!(json(&["lines", "G(3,3,3)", "--json"])["lines"].as_array().unwrap().len(), 9);
}

#[test]
fn poincare_factored() {
    assert_eq!(ok(&["poincare", "Q", "--factor"]).trim_end().lines().last().unwrap(), "(1+t)(1+25t)(1+37t)");
    let v = json(&["poincare", "A3", "--method", "delres", "--json"]);
    assert_eq!(v["poincare"], serde_json::json!([1, 6, 11, 6]));
}

#[test]
fn codim_methods_agree() {
    let mut seen = Vec::new();
    for m in ["lattice", "enumerate", "formula"] {
        let v = json(&["codim", "family:Q8:pm1:3", "--method", m, "--json"]);
        seen.push(v["codim"].clone());
    }
    assert_eq!(seen[0], serde_json::json!([1, 27, 215, 525]));
    assert!(seen.iter().all(|s| *s == seen[0]));
    let f = ok(&["codim", "family:Q8:full:4", "--method", "formula", "--factor"]);
    assert!(f.contains("(1+7t)(1+15t)(1+23t)(1+31t)"), "{f}");
}

#[test]
fn gs_and_lattice() {
    let v = json(&["gs", "G(3,3,4)", "--json"]);
    let size = |k: &str| v["decomposition"][k].as_array().unwrap().len();
    assert_eq!((size("delta"), size("lambda"), size("gamma_a")), (3, 12, 0));
    let v = json(&["lattice", "G(3,3,4)", "--census", "--json"]);
    assert_eq!(v["flats_per_rank"], serde_json::json!([1, 18, 69, 49, 1]));
    assert_eq!(v["top"]["mobius"], 168);
    assert_eq!(v["census"]["2"]["A2"], 42);
}

#[test]
fn usage_errors_exit_2() {
    for args in [&["lines", "nope"][..], &["poincare"], &["family", "C3", "triv", "0"], &["gs", "B3"]] {
        let o = qarrange(args, None);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn caps_exit_3() {
    let o = qarrange(&["poincare", "family:Q8:pm1:3", "--method", "delres"], None);
    assert_eq!(o.status.code(), Some(3));
    let o = qarrange(&["codim", "R", "--method", "enumerate"], None);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_fast_suite() {
    let v = json(&["verify", "--json"]);
    let checked = v["checked"].as_u64().unwrap();
    assert!(checked >= 60);
    assert_eq!(v["passed"].as_u64(), Some(checked));
}

#[test]
fn verify_reports_a_perturbed_record() {
    let mut reg = json(&["verify", "--dump-registry"]);
    let rec = reg["records"].as_array_mut().unwrap().iter_mut().find(|r| r["id"] == "G(3,3,3)/mu").unwrap();
    rec["expected"] = "17".into();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("registry.json");
    std::fs::write(&path, serde_json::to_string(&reg).unwrap()).unwrap();
    let o = qarrange(&["verify", "--registry", path.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o) + &String::from_utf8_lossy(&o.stderr);
    assert!(out.contains("G(3,3,3)/mu"), "{out}");
    assert!(out.contains("expected 17, got 16"), "{out}");
}

#[test]
fn json_is_deterministic() {
    for args in [&["lattice", "S1", "--census", "--json"][..], &["codim", "Q", "--json"], &["catalog", "--json"]] {
        assert_eq!(ok(args), ok(args), "{args:?}");
    }
}

#[test]
fn cache_is_transparent() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["lattice", "S1", "--census", "--refine", "--json"];
    let cold = qarrange(&args, Some(dir.path()));
    assert!(cold.status.success());
    assert!(std::fs::read_dir(dir.path()).unwrap().count() > 0, "cache file written");
    let warm = qarrange(&args, Some(dir.path()));
    assert_eq!(stdout(&cold), stdout(&warm));
    assert_eq!(stdout(&warm), ok(&args));
}
