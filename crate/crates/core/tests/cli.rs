use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mfhmc::cli_io::read_chain;
use mfhmc::forward_models::default_initial_field;
use mfhmc::matrix_csv::load_linear_operator;

fn mfhmc(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfhmc"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .env_remove("MFHMC_SEED")
        .output()
        .unwrap()
}

#[test]
fn sample_writes_chain_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = mfhmc(&["sample", "--dim", "3", "--n-steps", "100", "--gamma", "1e-3", "--thin", "10"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let chain = read_chain(&dir.path().join("chain.csv")).unwrap();
    assert_eq!(chain.iterations.len(), 11);
    assert_eq!(chain.dim, 3);
    let report = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(report.starts_with("metric,value\n"));
}

#[test]
fn failures_exit_nonzero_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["sample", "--epsilon", "-1"][..],
        &["sample", "--bogus", "1"][..],
        &["sample", "--n-steps", "ten"][..],
        &["heat-table", "--grid-n", "3", "--modes", "99"][..],
    ] {
        let out = mfhmc(args, dir.path());
        assert!(!out.status.success(), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.trim_end().lines().count(), 1, "{err}");
        assert!(err.starts_with("error: "), "{err}");
    }
    let out = mfhmc(&["sample", "--epsilon", "-1"], dir.path());
    assert!(String::from_utf8(out.stderr).unwrap().contains("epsilon"));
}

#[test]
fn config_file_and_env_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# small run\ndim = 2\nn_steps = 50\ngamma = 1e-3\nseed = 1\n").unwrap();
    let run = |env: Option<&str>, sub: &str| {
        let out_dir = dir.path().join(sub);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_mfhmc"));
        cmd.args(["sample", "--config"]).arg(&cfg).arg("--out-dir").arg(&out_dir);
        match env {
            Some(v) => cmd.env("MFHMC_SEED", v),
            None => cmd.env_remove("MFHMC_SEED"),
        };
        assert!(cmd.output().unwrap().status.success());
        fs::read(out_dir.join("chain.csv")).unwrap()
    };
    let a = run(None, "a");
    assert_eq!(a, run(None, "b"));
    assert_ne!(a, run(Some("99"), "c"));
}

#[test]
fn small_sweeps_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = mfhmc(
        &["mvn-sweep", "--dim", "3", "--budgets", "200,400", "--trajectories", "0.1:5", "--gamma", "1e-3", "--n-seeds", "2"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cells = fs::read_to_string(dir.path().join("mvn_cells.csv")).unwrap();
    assert!(cells.starts_with(
        "algorithm,gamma_or_modes,epsilon,L,budget,seed,accepted_per_hf,ess_per_hf,esjd_per_hf,rel_err_pct,coverage95,n_hf\n"
    ));
    assert_eq!(cells.lines().count(), 1 + 2 * 2 * 2);
    let summary = fs::read_to_string(dir.path().join("mvn_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 2 * 2);

    let out = mfhmc(
        &["heat-table", "--grid-n", "4", "--modes", "4,16", "--n-steps", "200", "--n-seeds", "1", "--epsilon", "0.05"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(dir.path().join("heat_table.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 3);
}

#[test]
fn shipped_true_field_matches_generator() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/heat_true_field.csv");
    let stored = load_linear_operator(&path).unwrap();
    let field = default_initial_field(32);
    assert_eq!(stored.shape(), (1024, 1));
    for (a, b) in stored.iter().zip(field.iter()) {
        assert!((a - b).abs() <= 1e-15 * b.abs().max(1e-300));
    }
}

#[test]
fn heat_accepts_true_field_file() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("field.csv");
    fs::write(&field, "4,1\n0.1\n0.2\n0.3\n0.4\n").unwrap();
    let arg = format!("--true-field={}", field.display());
    let out = mfhmc(
        &["sample", "--problem", "heat", "--grid-n", "2", "--modes", "2", "--n-steps", "50", &arg],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
