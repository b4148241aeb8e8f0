//! A small comparison grid written to a temporary directory, the same
//! machinery as the `tpa-bench` binary.

use tpa_cmaes::experiment::{format_table, parse_config, run_experiment};

fn main() {
    let out = std::env::temp_dir().join("tpa_cmaes_grid");
    let flags: Vec<(String, String)> = [
        ("objective", "sphere,ellipsoid"),
        ("n", "5"),
        ("controller", "tpa,tpa_legacy,csa"),
        ("seeds", "1..=5"),
        ("budget", "30000"),
        ("no-timestamp", "true"),
        ("out", out.to_str().expect("utf-8 temp dir")),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect();

    let (config, warnings) = parse_config(None, &flags).expect("valid flags");
    for w in warnings {
        eprintln!("warning: {w}");
    }
    let summary = run_experiment(&config).expect("writable output directory");
    print!("{}", format_table(&summary.rows));
    println!("traces and summary.csv in {}", out.display());
}
