use std::path::Path;
use std::process::{Command, Output};

const FANO: &str = r#"{"family":"A","n":2,"q":2}"#;
const HEXAGON: &str = r#"{"thin":{"family":"A","n":2}}"#;

fn hemilab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hemilab"))
        .args(args)
        .current_dir(dir)
        .env_remove("HEMILAB_CACHE")
        .output()
        .expect("binary runs")
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("fano.json"), FANO).unwrap();
    std::fs::write(dir.path().join("hex.json"), HEXAGON).unwrap();
    dir
}

fn stdout_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn generate_caches_the_complex() {
    let dir = setup();
    let o = hemilab(dir.path(), &["generate", "--spec", "fano.json", "--cache", "c"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["facets"], 21);
    assert_eq!(v["vertices"], 14);
    let cached: Vec<_> = std::fs::read_dir(dir.path().join("c")).unwrap().collect();
    assert_eq!(cached.len(), 1);
    // reformatted spec: same cache entry
    std::fs::write(dir.path().join("fano2.json"), "{ \"q\": 2, \"n\": 2, \"family\": \"A\" }").unwrap();
    let again = hemilab(dir.path(), &["generate", "--spec", "fano2.json", "--cache", "c"]);
    assert_eq!(stdout_json(&again), v);
    assert_eq!(std::fs::read_dir(dir.path().join("c")).unwrap().count(), 1);
}

#[test]
fn generate_honours_cache_env() {
    let dir = setup();
    let o = Command::new(env!("CARGO_BIN_EXE_hemilab"))
        .args(["generate", "--spec", "fano.json"])
        .current_dir(dir.path())
        .env("HEMILAB_CACHE", dir.path().join("envcache"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_dir(dir.path().join("envcache")).unwrap().count(), 1);
}

#[test]
fn verify_theorem_b_on_fano_vertex() {
    let dir = setup();
    let o = hemilab(dir.path(), &["verify", "--spec", "fano.json", "--pole", "vertex:0", "--checks", "theorem-b", "--out", "r.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["schema"], "hemilab/v1");
    assert_eq!(report["summary"]["fail"], 0);
    let summary = hemilab(dir.path(), &["report", "r.json"]);
    assert_eq!(summary.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&summary.stdout).contains("theorem-b"));
}

#[test]
fn verify_is_byte_identical_across_runs() {
    let dir = setup();
    let args = ["--jobs", "2", "verify", "--spec", "hex.json", "--seed", "9", "--checks", "lemmas-metric,lemmas-cones"];
    let a = hemilab(dir.path(), &args);
    let b = hemilab(dir.path(), &args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_job_file() {
    let dir = setup();
    std::fs::write(
        dir.path().join("job.json"),
        r#"{"schema":"hemilab/v1","building":{"family":"A","n":2,"q":2},"poles":[{"barycenter":[0,7]}],"checks":["theorem-a","lemmas-filtration"],"seed":3}"#,
    )
    .unwrap();
    let o = hemilab(dir.path(), &["verify", "--job", "job.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = stdout_json(&o);
    assert_eq!(report["seed"], 3);
    assert_eq!(report["summary"]["fail"], 0);
    assert!(report["summary"]["pass"].as_u64().unwrap() >= 3);
}

#[test]
fn export_dot_hexagon_classes() {
    let dir = setup();
    let o = hemilab(dir.path(), &["export-dot", "--spec", "hex.json", "--pole", "vertex:0"]);
    assert_eq!(o.status.code(), Some(0));
    let dot = String::from_utf8(o.stdout).unwrap();
    assert!(dot.starts_with("graph"));
    assert_eq!(dot.matches("class=LT").count(), 3);
    assert_eq!(dot.matches("class=GT").count(), 3);
    assert_eq!(dot.matches(" -- ").count(), 6);
}

#[test]
fn classify_filtrate_and_homology() {
    let dir = setup();
    let c = hemilab(dir.path(), &["classify", "--spec", "hex.json", "--pole", "vertex:0"]);
    assert_eq!(c.status.code(), Some(0));
    assert_eq!(stdout_json(&c)["counts"], serde_json::json!({"GT": 3, "LT": 3}));

    let edge = r#"{"barycenter":[0,3]}"#;
    std::fs::write(dir.path().join("pole.json"), edge).unwrap();
    let f = hemilab(dir.path(), &["filtrate", "--spec", "hex.json", "--pole", "pole.json"]);
    assert_eq!(f.status.code(), Some(0), "{}", String::from_utf8_lossy(&f.stderr));
    assert!(stdout_json(&f)["stages"].is_array());

    let h = hemilab(dir.path(), &["homology", "--spec", "fano.json", "--cm"]);
    assert_eq!(h.status.code(), Some(0));
    let v = stdout_json(&h);
    assert_eq!(v["profile"]["groups"][2]["betti"], 8);
    let gt = hemilab(dir.path(), &["homology", "--spec", "fano.json", "--complex", "gt", "--pole", "vertex:0"]);
    assert_eq!(stdout_json(&gt)["profile"]["groups"][2]["betti"], 3);
}

#[test]
fn exit_codes() {
    let dir = setup();
    assert_eq!(hemilab(dir.path(), &["verify", "--spec", "fano.json", "--bogus"]).status.code(), Some(2));
    assert_eq!(hemilab(dir.path(), &["nonsense"]).status.code(), Some(2));
    assert_eq!(hemilab(dir.path(), &["classify", "--spec", "fano.json", "--pole", "vertex:999"]).status.code(), Some(2));
    assert_eq!(hemilab(dir.path(), &["verify", "--spec", "fano.json", "--checks", "theorem-z"]).status.code(), Some(2));
    std::fs::write(dir.path().join("big.json"), r#"{"family":"A","n":4,"q":5}"#).unwrap();
    assert_eq!(hemilab(dir.path(), &["generate", "--spec", "big.json"]).status.code(), Some(3));
    let h = hemilab(dir.path(), &["homology", "--spec", "fano.json", "--max-cells", "10"]);
    assert_eq!(h.status.code(), Some(3));
}
