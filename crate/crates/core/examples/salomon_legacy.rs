//! The original two-point rule: σ is multiplied by 1.8 or divided by 1.8
//! every generation, and the new mean is the better test point.

use tpa_cmaes::engine::{run, RunConfig, StepSizeMode, TerminationCriteria};
use tpa_cmaes::objectives::sphere;

fn main() {
    let mut config = RunConfig::new(vec![1.0; 8], 1.0);
    config.mode = StepSizeMode::TpaLegacy;
    config.termination = TerminationCriteria::budget_only(3_000).with_target(Some(1e-12));

    let result = run(&config, &sphere).expect("valid configuration");
    let mut up = 0;
    let mut down = 0;
    let mut prev = config.sigma0;
    for r in &result.trace {
        if r.sigma > prev {
            up += 1;
        } else {
            down += 1;
        }
        prev = r.sigma;
    }
    println!("stopped: {} after {} evaluations", result.reason, result.evals);
    println!("best f: {:.3e}", result.best_f);
    println!("sigma grew {up} times, shrank {down} times");
    for r in result.trace.iter().take(8) {
        println!("gen {:>2}  sigma {:.5}  factor {:.5}", r.generation, r.sigma, r.sigma_multiplier);
    }
}
