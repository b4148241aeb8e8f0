//! Runs a benchmark grid and writes per-run traces plus `summary.csv`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use tpa_cmaes::experiment::{format_table, parse_config, run_experiment};

#[derive(Debug, Parser)]
#[command(name = "tpa-bench", version, about = "Compare CMA-ES step-size controllers on benchmark functions")]
struct Cli {
    /// File of key=value lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated: sphere, ellipsoid, rosenbrock, rastrigin, noisy_sphere, random_fitness.
    #[arg(long)]
    objective: Option<String>,
    /// Comma-separated dimensions.
    #[arg(long)]
    n: Option<String>,
    /// Comma-separated: tpa, tpa_noise, tpa_legacy, csa.
    #[arg(long)]
    controller: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long = "c-alpha")]
    c_alpha: Option<String>,
    /// List `1,2,3` or range `1..=11`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Evaluations per run.
    #[arg(long)]
    budget: Option<String>,
    #[arg(long = "target-f")]
    target_f: Option<String>,
    #[arg(long)]
    restarts: Option<String>,
    #[arg(long)]
    sigma0: Option<String>,
    #[arg(long)]
    x0: Option<String>,
    #[arg(long = "noise-level")]
    noise_level: Option<String>,
    #[arg(long)]
    condition: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    /// Omit the timestamp line so repeated runs are byte-identical.
    #[arg(long = "no-timestamp")]
    no_timestamp: bool,
}

impl Cli {
    fn pairs(&self) -> Vec<(String, String)> {
        let opts = [
            ("objective", &self.objective),
            ("n", &self.n),
            ("controller", &self.controller),
            ("lambda", &self.lambda),
            ("beta", &self.beta),
            ("c-alpha", &self.c_alpha),
            ("seeds", &self.seeds),
            ("seed", &self.seed),
            ("budget", &self.budget),
            ("target-f", &self.target_f),
            ("restarts", &self.restarts),
            ("sigma0", &self.sigma0),
            ("x0", &self.x0),
            ("noise-level", &self.noise_level),
            ("condition", &self.condition),
            ("out", &self.out),
            ("workers", &self.workers),
        ];
        let mut pairs: Vec<(String, String)> = opts
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect();
        if self.no_timestamp {
            pairs.push(("no-timestamp".into(), "true".into()));
        }
        pairs
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cfg, warnings) = match parse_config(cli.config.as_deref(), &cli.pairs()) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    match run_experiment(&cfg) {
        Ok(summary) => {
            print!("{}", format_table(&summary.rows));
            let failed = summary.outcomes.iter().filter(|o| o.result.is_err()).count();
            if failed > 0 {
                eprintln!("warning: {failed} run(s) failed; see summary.csv");
            }
            println!("results written to {}", cfg.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

