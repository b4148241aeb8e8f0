//! Restarts with doubling population size on the multimodal Rastrigin function.

use tpa_cmaes::engine::{run_with_restarts, RestartPolicy, RunConfig, TerminationCriteria};
use tpa_cmaes::objectives::{ObjectiveKind, ObjectiveSpec};

fn main() {
    let n = 5;
    let spec = ObjectiveSpec::new(ObjectiveKind::Rastrigin, n);
    let policy = RestartPolicy {
        bounds: Some((-5.0, 5.0)),
        ..RestartPolicy::default()
    };
    let mut solved = 0;
    for seed in 1..=10 {
        let mut config = RunConfig::new(vec![3.0; n], 2.0);
        config.seed = seed;
        config.keep_trace = false;
        config.termination = TerminationCriteria {
            max_evals: 200_000,
            ..TerminationCriteria::default()
        }
        .with_target(Some(1e-8));
        let r = run_with_restarts(&config, &policy, &spec).expect("valid configuration");
        if r.evals_to_target.is_some() {
            solved += 1;
        }
        println!(
            "seed {seed:>2}  best {:>9.3e}  evals {:>7}  lambdas {:?}",
            r.best_f, r.evals, r.lambdas
        );
    }
    println!("solved {solved}/10");
}
