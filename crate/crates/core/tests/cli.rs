use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const PLANE_WAVE: &str = r#"{
  "n": 2, "mode": "log", "a": "2",
  "truncation": {"D": 6, "K": 8},
  "arithmetic": "rational",
  "f": [{"coeff": [{"c": "1/2"}], "tau": 2, "xi": [0, 0]},
        {"coeff": [{"c": "-1/2"}], "xi": [2, 0]},
        {"coeff": [{"c": "-1/2"}], "xi": [0, 2]}],
  "psi": [{"x": [1, 0], "c": "1/2"}],
  "v0": [{"c": "3"}]
}"#;

const FORCED: &str = r#"{
  "n": 1, "mode": "log", "a": "1",
  "truncation": {"D": 3, "K": 6},
  "arithmetic": "rational",
  "f": [{"coeff": [{"c": "1"}], "tau": 2, "xi": [0]},
        {"coeff": [{"t": 1, "c": "1"}, {"x": [1], "c": "1/3"}], "xi": [0]}],
  "psi": [],
  "v0": [{"c": "1/2"}]
}"#;

const EIKONAL: &str = r#"{
  "n": 2, "mode": "log", "a": "0.5", "truncation": {"D": 5, "K": 6},
  "f": [{"coeff": [{"c": "1"}], "tau": 2, "xi": [0, 0]}],
  "psi": {"solve": {"init": [{"x": [1], "c": "0.25"}]}}
}"#;

const FRACTIONAL: &str = r#"{
  "n": 1, "mode": "fractional", "m": 2, "a": "1", "truncation": {"D": 4, "K": 6},
  "f": [{"coeff": [{"c": "-2"}], "tau": 3, "xi": [0]}]
}"#;

const ELLIPTIC: &str = r#"{
  "n": 3, "mode": "elliptic", "a": "1.7", "base_point": [0.1, -0.2], "truncation": {"D": 5, "K": 5},
  "psi": [{"x": [1, 0], "c": "0.3"}, {"x": [0, 2], "c": "0.1"}]
}"#;

const NOT_REVERSIBLE: &str = r#"{
  "n": 1, "mode": "negative_side", "a": "1", "truncation": {"D": 4, "K": 4},
  "f": [{"coeff": [{"c": "1"}], "tau": 2, "xi": [0]},
        {"coeff": [{"c": "-1"}], "xi": [2]},
        {"coeff": [{"c": "1"}], "tau": 1, "xi": [1]}]
}"#;

fn swf() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_swf"));
    cmd.env_remove("SWF_OUT_DIR");
    cmd
}

fn problem(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str], problem: Option<&Path>, out: &Path) -> Output {
    let mut cmd = swf();
    cmd.args(args).arg("--out").arg(out);
    if let Some(p) = problem {
        cmd.arg("--problem").arg(p);
    }
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn all_writes_every_artifact() {
    let dir = TempDir::new().unwrap();
    let p = problem(dir.path(), "p.json", PLANE_WAVE);
    let out = dir.path().join("out");
    let o = run(&["all"], Some(&p), &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["status"], "ok");
    assert_eq!(summary["arithmetic"], "rational");
    for f in ["check.json", "solution.json", "residual.csv", "fit.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let check = json(&out.join("check.json"));
    assert_eq!(check["passed"], true);
    let fit = json(&out.join("fit.json"));
    assert_eq!(fit["passed"], true);
    assert_eq!(fit["max_abs_residual"], 0.0);
    let csv = fs::read_to_string(out.join("residual.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "T,x1,x2,residual,u,du_dt");
    let sol = json(&out.join("solution.json"));
    assert_eq!(sol["format"], "swf-solution/1");
    assert_eq!(sol["K"], 8);
}

#[test]
fn rational_output_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let p = problem(dir.path(), "p.json", FORCED);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(code(&run(&["all"], Some(&p), &a)), 0);
    assert_eq!(code(&run(&["all"], Some(&p), &b)), 0);
    for f in ["solution.json", "fit.json", "residual.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn verify_from_solution_file() {
    let dir = TempDir::new().unwrap();
    let p = problem(dir.path(), "p.json", FORCED);
    let first = dir.path().join("first");
    assert_eq!(code(&run(&["all"], Some(&p), &first)), 0);
    let second = dir.path().join("second");
    let o = swf()
        .args(["verify", "--solution"])
        .arg(first.join("solution.json"))
        .arg("--out")
        .arg(&second)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        fs::read(first.join("fit.json")).unwrap(),
        fs::read(second.join("fit.json")).unwrap()
    );
    assert_eq!(
        fs::read(first.join("residual.csv")).unwrap(),
        fs::read(second.join("residual.csv")).unwrap()
    );

    let o = swf()
        .args(["verify", "--arithmetic", "float", "--solution"])
        .arg(first.join("solution.json"))
        .arg("--out")
        .arg(dir.path().join("third"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn order_override() {
    let dir = TempDir::new().unwrap();
    let p = problem(dir.path(), "p.json", FORCED);
    let out = dir.path().join("out");
    let o = run(&["solve", "--order", "3"], Some(&p), &out);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&out.join("solution.json"))["K"], 3);
}

#[test]
fn out_dir_from_environment() {
    let dir = TempDir::new().unwrap();
    let p = problem(dir.path(), "p.json", FORCED);
    let out = dir.path().join("env_out");
    let o = swf()
        .args(["check", "--problem"])
        .arg(&p)
        .env("SWF_OUT_DIR", &out)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(out.join("check.json").exists());
}

#[test]
fn eikonal_writes_surface() {
    let dir = TempDir::new().unwrap();
    let p = problem(dir.path(), "p.json", EIKONAL);
    let out = dir.path().join("out");
    let o = run(&["eikonal", "--branch", "+"], Some(&p), &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("psi.json").exists());

    let o = run(&["all", "--branch", "-"], Some(&p), &dir.path().join("all"));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("all/psi.json").exists());
}

#[test]
fn eikonal_without_branch_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let p = problem(dir.path(), "p.json", EIKONAL);
    let out = dir.path().join("out");
    let o = run(&["eikonal"], Some(&p), &out);
    assert_eq!(code(&o), 2);
    let failure = json(&out.join("failure.json"));
    assert_eq!(failure["status"], "error");
    assert_eq!(failure["exit_code"], 2);
}

#[test]
fn fractional_and_elliptic_succeed() {
    let dir = TempDir::new().unwrap();
    let p = problem(dir.path(), "f.json", FRACTIONAL);
    let o = run(&["all"], Some(&p), &dir.path().join("f"));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let p = problem(dir.path(), "e.json", ELLIPTIC);
    let out = dir.path().join("e");
    let o = run(&["all"], Some(&p), &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("residual.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "T,x2,x3,residual,u,du_dt");
}

#[test]
fn failed_condition_exits_three() {
    let dir = TempDir::new().unwrap();
    let body = PLANE_WAVE.replace(r#""a": "2""#, r#""a": "3""#);
    let p = problem(dir.path(), "p.json", &body);
    let out = dir.path().join("out");
    let o = run(&["check"], Some(&p), &out);
    assert_eq!(code(&o), 3);
    assert!(out.join("check.json").exists());
    assert_eq!(json(&out.join("check.json"))["passed"], false);
    assert_eq!(json(&out.join("failure.json"))["exit_code"], 3);

    let p = problem(dir.path(), "odd.json", NOT_REVERSIBLE);
    assert_eq!(code(&run(&["solve"], Some(&p), &dir.path().join("odd"))), 3);
}

#[test]
fn schema_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let p = problem(dir.path(), "bad.json", r#"{"n": 1, "mode": "log", "bogus": 1}"#);
    let out = dir.path().join("out");
    let o = run(&["check"], Some(&p), &out);
    assert_eq!(code(&o), 2);
    let failure: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(failure["exit_code"], 2);

    let o = run(&["check"], Some(&dir.path().join("missing.json")), &out);
    assert_eq!(code(&o), 2);
    let o = run(&["check"], None, &out);
    assert_eq!(code(&o), 2);
}

#[test]
fn tampered_solution_fails_verification() {
    let dir = TempDir::new().unwrap();
    let p = problem(dir.path(), "p.json", FORCED);
    let first = dir.path().join("first");
    assert_eq!(code(&run(&["solve"], Some(&p), &first)), 0);
    let mut sol = json(&first.join("solution.json"));
    sol["v"][2]["terms"][0]["c"] = serde_json::json!(["7", "1"]);
    let tampered = dir.path().join("tampered.json");
    fs::write(&tampered, serde_json::to_string(&sol).unwrap()).unwrap();
    let out = dir.path().join("out");
    let o = swf()
        .args(["verify", "--solution"])
        .arg(&tampered)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(json(&out.join("failure.json"))["kind"], "residual");
    assert!(out.join("fit.json").exists());
}
