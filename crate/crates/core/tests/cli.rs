use std::fs;
use std::process::Command;

use tpa_cmaes::experiment::{parse_config, run_experiment, Controller, ExperimentConfig, SUMMARY_COLUMNS, TRACE_COLUMNS};
use tpa_cmaes::objectives::ObjectiveKind;

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tpa-bench"))
}

fn pairs(items: &[(&str, &str)]) -> Vec<(String, String)> {
    items.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

#[test]
fn grid_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let (cfg, _) = ExperimentConfig::from_pairs(&pairs(&[
        ("objective", "sphere"),
        ("n", "3"),
        ("controller", "tpa,csa"),
        ("seeds", "1..=4"),
        ("no-timestamp", "true"),
        ("out", out.to_str().unwrap()),
    ]))
    .unwrap();
    let summary = run_experiment(&cfg).unwrap();
    assert_eq!(summary.rows.len(), 2);
    assert_eq!(summary.outcomes.len(), 8);
    let row = summary.row(ObjectiveKind::Sphere, 3, Controller::Tpa).unwrap();
    assert_eq!((row.runs, row.successes, row.errors), (4, 4, 0));

    let text = fs::read_to_string(out.join("summary.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), SUMMARY_COLUMNS.join(","));
    assert_eq!(lines.count(), 2);

    let trace = fs::read_to_string(out.join("sphere_n3_csa_seed2.csv")).unwrap();
    let mut lines = trace.lines();
    assert!(lines.next().unwrap().starts_with("# objective=sphere controller=csa seed=2"));
    assert_eq!(lines.next().unwrap(), TRACE_COLUMNS.join(","));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 7);
    assert_eq!(first[4], "", "CSA rows have no alpha_s");
}

#[test]
fn timestamp_line_is_optional() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ts");
    let status = bench()
        .args(["--n", "2", "--controller", "tpa", "--seed", "1", "--budget", "200", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success());
    let trace = fs::read_to_string(out.join("sphere_n2_tpa_seed1.csv")).unwrap();
    assert!(trace.starts_with("# timestamp="));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("grid.cfg");
    fs::write(&file, "# grid\nobjective = ellipsoid\nn = 3,4\nbudget = 500\nseeds = 1,2\n").unwrap();
    let (cfg, _) = parse_config(Some(&file), &pairs(&[("budget", "900")])).unwrap();
    assert_eq!(cfg.objectives, vec![ObjectiveKind::Ellipsoid]);
    assert_eq!(cfg.dims, vec![3, 4]);
    assert_eq!(cfg.budget, 900);
    assert_eq!(cfg.seeds, vec![1, 2]);
}

#[test]
fn bad_configs_exit_nonzero_with_every_problem() {
    let out = bench()
        .args(["--objective", "spere", "--seeds", "", "--budget", "lots"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("spere"), "{err}");
    assert!(err.contains("budget"), "{err}");
    assert!(err.contains("seed list is empty"), "{err}");

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.cfg");
    fs::write(&file, "colour = blue\nn = 2\n").unwrap();
    let out = bench().arg("--config").arg(&file).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key `colour`"));
}

#[test]
fn beta_with_csa_warns() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench()
        .args(["--controller", "csa", "--beta", "0.1", "--n", "2", "--seed", "1", "--budget", "100", "--no-timestamp", "--out"])
        .arg(dir.path().join("w"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning: beta is unused by the csa controller"));
}

#[test]
fn unsuccessful_runs_count_at_budget() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, _) = ExperimentConfig::from_pairs(&pairs(&[
        ("objective", "rosenbrock"),
        ("n", "8"),
        ("controller", "tpa"),
        ("seeds", "1..=3"),
        ("budget", "300"),
        ("out", dir.path().to_str().unwrap()),
    ]))
    .unwrap();
    let summary = run_experiment(&cfg).unwrap();
    let row = &summary.rows[0];
    assert_eq!(row.successes, 0);
    assert_eq!(row.median_evals, 300.0);
}
