use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mukai_core::io::{self, MatrixJson, SliceJson};

const BIN: &str = env!("CARGO_BIN_EXE_mukai");

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/gamma5.json")
}

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env_remove("MUKAI_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_matrix(path: &Path, rows: usize, cols: usize, data: Vec<[f64; 2]>) {
    let m = MatrixJson { rows, cols, data };
    std::fs::write(path, io::to_string(&m).unwrap()).unwrap();
}

#[test]
fn slice_is_deterministic_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.json", "b.json"] {
        let o = run(&["slice", "--seed", "7", "--out", name], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = std::fs::read_to_string(dir.path().join("a.json")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("b.json")).unwrap();
    assert_eq!(a, b);
    assert!(dir.path().join("a.json.manifest.json").exists());

    let parsed: SliceJson = io::from_str(&a).unwrap();
    assert_eq!(io::to_string(&parsed).unwrap(), a);
    assert_eq!(parsed.plucker_points.len(), 14);
    assert!(parsed.max_relation_residual < 1e-10);

    let o = run(&["check", "--input", "a.json#gamma"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "self-dual"), "{out}");
    let residual: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("witness residual: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(residual < 1e-9);
}

#[test]
fn rank_deficient_section_is_a_domain_failure() {
    let dir = tempfile::tempdir().unwrap();
    write_matrix(&dir.path().join("bad.json"), 8, 15, vec![[1.0, 0.0]; 120]);
    let o = run(&["slice", "--input", "bad.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("rank deficient"), "{}", stderr(&o));
}

#[test]
fn gaussian_configuration_is_not_self_dual() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = mukai_core::random::stream(5, 0);
    let g = mukai_core::random::real_gaussian_mat(&mut rng, 7, 14);
    write_matrix(&dir.path().join("random.json"), 7, 14, io::pairs(g.as_slice()));
    let o = run(&["check", "--gamma", "random.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("not self-dual"));
}

#[test]
fn io_and_parse_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["check", "--gamma", "missing.json"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    std::fs::write(dir.path().join("junk.json"), "{not json").unwrap();
    let o = run(&["snf", "--gamma", "junk.json"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let f = fixture();
    let source = format!("{}#nope", f.display());
    let o = run(&["snf", "--gamma", &source], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn snf_of_fixture_is_integral() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture();
    let o = run(&["snf", "--gamma", f.to_str().unwrap(), "--out", "snf.json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("snf.json")).unwrap()).unwrap();
    let s = v["s"].as_array().unwrap();
    assert_eq!(s.len(), 21);
    // first row of the upper triangle: S[0][1..7]
    let expected = [-1.0, 1.0, 0.0, -1.0, 4.0, 2.0];
    for (z, e) in s.iter().zip(expected) {
        assert!((z[0].as_f64().unwrap() - e).abs() < 1e-3);
        assert!(z[1].as_f64().unwrap().abs() < 1e-3);
    }
}

#[test]
fn census_conserves_samples_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let one = Command::new(BIN)
        .args(["census", "--samples", "40", "--seed", "1", "--out", "one.csv"])
        .current_dir(dir.path())
        .env("MUKAI_THREADS", "1")
        .output()
        .unwrap();
    assert!(one.status.success(), "{}", stderr(&one));
    let o = run(&["--threads", "2", "census", "--samples", "40", "--seed", "1", "--out", "two.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let a = std::fs::read_to_string(dir.path().join("one.csv")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("two.csv")).unwrap();
    assert_eq!(a, b);

    let mut lines = a.lines();
    assert_eq!(lines.next(), Some("real_count,count,proportion"));
    let mut total = 0;
    let mut labels = Vec::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        labels.push(f[0].to_string());
        total += f[1].parse::<usize>().unwrap();
    }
    assert_eq!(total, 40);
    assert_eq!(labels, ["0", "2", "4", "6", "8", "10", "12", "14", "failures"]);
}

#[test]
fn census_rejects_zero_samples() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["census", "--samples", "0"], dir.path());
    assert!(!o.status.success());
}

#[test]
fn lift_fixture_from_persisted_start_pair() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["make-start-pair", "--seed", "3", "--out", "pair.json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let f = fixture();
    let o = run(
        &["lift", "--gamma", f.to_str().unwrap(), "--seed", "3", "--start-cache", "pair.json", "--out", "lift.json"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let residual: f64 = stdout(&o)
        .lines()
        .find_map(|l| l.strip_prefix("max relation residual: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(residual < 1e-8, "{residual}");

    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("lift.json")).unwrap()).unwrap();
    assert_eq!(v["L_hat"]["rows"], 15);
    assert_eq!(v["L_hat"]["cols"], 7);
    assert_eq!(v["ell"].as_array().unwrap().len(), 69);
    assert_eq!(v["seed"], 3);
    assert!(v["report"]["max_residual"].as_f64().unwrap() < 1e-8);
    let manifest = std::fs::read_to_string(dir.path().join("lift.json.manifest.json")).unwrap();
    assert!(manifest.contains("pair.json"));
}
