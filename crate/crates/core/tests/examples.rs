// Runs the example programs, which `cargo test` builds alongside the tests.

use std::path::PathBuf;
use std::process::Command;

fn example_path(name: &str) -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    // target/<profile>/deps/<test> -> target/<profile>/examples/<name>
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    profile_dir.join("examples").join(format!("{name}{}", std::env::consts::EXE_SUFFIX))
}

fn run(name: &str) -> String {
    let path = example_path(name);
    assert!(path.exists(), "{} not built", path.display());
    let out = Command::new(&path).output().unwrap();
    assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn leapfrog() {
    assert_eq!(run("leapfrog").lines().count(), 5);
}

#[test]
fn stationarity() {
    assert!(run("stationarity").contains("covariance"));
}

#[test]
fn diagnostics() {
    assert!(run("diagnostics").contains("coverage95"));
}

#[test]
fn mvn_sweep() {
    assert!(run("mvn_sweep").contains("mfhmc"));
}

#[test]
fn heat_table() {
    assert!(run("heat_table").contains("mfhmc"));
}

#[test]
fn external_surrogate() {
    assert!(run("external_surrogate").contains("stage2_acceptance"));
}
