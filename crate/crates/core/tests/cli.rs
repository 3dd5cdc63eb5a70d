//! The `fermikin` binary: exit codes, overrides and outputs.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fermikin(dir: &Path, args: &[&str], config: &str) -> Output {
    let cfg = dir.join("run.ini");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_fermikin"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .env_remove("FERMIKIN_THREADS")
        .current_dir(dir)
        .output()
        .unwrap()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

const MICRO: &str = "[grid]\nL = 4\n[micro]\neta = 0.5\nlambda = 0.25\nT = 0.3\nsamples = 3\ncheckpoints = 0.1, 0.3\n[initial]\nkind = cosine_bump\n";

#[test]
fn graphs_pass_the_dichotomy() {
    let dir = tempfile::tempdir().unwrap();
    let out = fermikin(dir.path(), &["graphs", "--out", "g"], "[grid]\nL = 2\n[graphs]\nmax_order = 4\n");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS dichotomy"));
    let csv = std::fs::read_to_string(dir.path().join("g/graphs.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 + 5 * 3 + 7 * 15 + 9 * 105);
    let m = manifest(&dir.path().join("g"));
    assert_eq!(m["status"], "complete");
    assert_eq!(m["checks"][0]["status"], "PASS");
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn validation_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = fermikin(dir.path(), &["micro"], "[grid]\n\n\nL = 15\n");
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4") && err.contains("L must be even"), "{err}");

    let out = fermikin(dir.path(), &["micro"], "[grid]\nL = 4\n[micro]\neta = 0.5\nscaling = lambda\nlambda = 0.1\n");
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("micro.delta"));

    let out = Command::new(env!("CARGO_BIN_EXE_fermikin"))
        .args(["graphs", "--config", "/nonexistent/run.ini"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn compute_errors_exit_with_two_and_remove_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = fermikin(
        dir.path(),
        &["boltzmann", "--out", "b"],
        "[grid]\nL = 4\n[kinetic]\nmethod = duhamel\nT = 1000\nbin_width = 0.5\n",
    );
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let names: Vec<_> = std::fs::read_dir(dir.path().join("b")).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, ["manifest.json"]);
    let m = manifest(&dir.path().join("b"));
    assert_eq!(m["status"], "failed");
    assert!(m["error"].as_str().unwrap().contains("overflow"));
}

#[test]
fn non_convergence_exits_with_three_and_keeps_results() {
    let dir = tempfile::tempdir().unwrap();
    let out = fermikin(
        dir.path(),
        &["fixed-point-theorem3", "--out", "f"],
        "[grid]\nL = 8\n[initial]\nkind = cosine_bump\n[fixed_point]\nlambda = 0.1\nmax_iter = 2\n",
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(dir.path().join("f/fixed_point.csv").exists());
    assert_eq!(manifest(&dir.path().join("f"))["status"], "not_converged");
}

#[test]
fn thread_count_and_seed_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let a = fermikin(dir.path(), &["micro", "--out", "a", "--threads", "1"], MICRO);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let cfg = dir.path().join("run.ini");
    let b = Command::new(env!("CARGO_BIN_EXE_fermikin"))
        .args(["micro", "--out", "b", "--config"])
        .arg(&cfg)
        .env("FERMIKIN_THREADS", "3")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(b.status.code(), Some(0));
    let c = fermikin(dir.path(), &["micro", "--out", "c", "--seed", "77"], MICRO);
    assert_eq!(c.status.code(), Some(0));

    let (ma, mb, mc) = (manifest(&dir.path().join("a")), manifest(&dir.path().join("b")), manifest(&dir.path().join("c")));
    assert_eq!(ma["threads"], 1);
    assert_eq!(mb["threads"], 3);
    assert_eq!(mc["config"]["seed"], 77);
    for name in ["occupation_0.csv", "occupation_1.csv", "occupation_se_1.csv"] {
        let read = |d: &str| std::fs::read(dir.path().join(d).join(name)).unwrap();
        assert_eq!(read("a"), read("b"), "{name} differs across thread counts");
        assert_ne!(read("a"), read("c"), "{name} ignores the seed");
    }
    assert_eq!(ma["config_text"], MICRO);
}
