//! Evaluations to target for two-point adaptation and CSA, 11 seeds each.

use tpa_cmaes::engine::{run, RunConfig, StepSizeMode, TerminationCriteria};
use tpa_cmaes::objectives::{ObjectiveKind, ObjectiveSpec};

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn main() {
    let budget = 100_000;
    for kind in [ObjectiveKind::Sphere, ObjectiveKind::Ellipsoid, ObjectiveKind::Rosenbrock] {
        for n in [5, 10] {
            let spec = ObjectiveSpec::new(kind, n);
            let mut medians = Vec::new();
            for mode in [StepSizeMode::Tpa, StepSizeMode::Csa] {
                let evals: Vec<f64> = (1..=11)
                    .map(|seed| {
                        let mut config = RunConfig::new(vec![3.0; n], 2.0);
                        config.mode = mode;
                        config.seed = seed;
                        config.keep_trace = false;
                        config.termination = TerminationCriteria {
                            max_evals: budget,
                            ..TerminationCriteria::default()
                        }
                        .with_target(kind.default_target());
                        let r = run(&config, &spec).expect("valid configuration");
                        r.evals_to_target.unwrap_or(budget) as f64
                    })
                    .collect();
                medians.push(median(evals));
            }
            println!(
                "{:<11} n={:<3} tpa {:>7.0}  csa {:>7.0}  ratio {:.2}",
                kind.name(),
                n,
                medians[0],
                medians[1],
                medians[0] / medians[1]
            );
        }
    }
}
