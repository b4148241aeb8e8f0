//! Minimize a 10-dimensional sphere from `m = 3·1`, `σ = 2`.

use tpa_cmaes::engine::{run, RunConfig, TerminationCriteria};
use tpa_cmaes::objectives::sphere;

fn main() {
    let mut config = RunConfig::new(vec![3.0; 10], 2.0);
    config.seed = 7;
    config.termination = TerminationCriteria::default().with_target(Some(1e-10));

    let result = run(&config, &sphere).expect("valid configuration");
    println!("stopped: {}", result.reason);
    println!("evaluations: {}", result.evals);
    println!("best f: {:.3e}", result.best_f);
    println!("final sigma: {:.3e}", result.final_sigma);

    for r in result.trace.iter().step_by(20) {
        println!(
            "gen {:>4}  evals {:>6}  f {:>10.3e}  sigma {:>10.3e}  alpha_s {:>7.3}",
            r.generation,
            r.evals,
            r.best_f,
            r.sigma,
            r.alpha_s.unwrap_or(0.0)
        );
    }
}
