//! Multiplicative noise `f(x)(1 + s·N(0,1))` with and without the bias β.
//!
//! β > 0 makes a decrease of σ require a clear win of the minus test point,
//! which keeps σ from collapsing when the comparisons are mostly noise.

use tpa_cmaes::engine::{run, RunConfig, TerminationCriteria};
use tpa_cmaes::objectives::{sphere, ObjectiveKind, ObjectiveSpec};

fn main() {
    let n = 10;
    for level in [0.3, 0.5, 1.0] {
        let spec = ObjectiveSpec::new(ObjectiveKind::NoisySphere, n).with_noise(level);
        for beta in [0.0, 0.1] {
            let mut sigmas = Vec::new();
            let mut fs = Vec::new();
            for seed in 0..11 {
                let mut config = RunConfig::new(vec![3.0; n], 2.0);
                config.seed = seed;
                config.keep_trace = false;
                config.overrides.beta_bias = Some(beta);
                config.termination = TerminationCriteria::budget_only(20_000);
                let r = run(&config, &spec).expect("valid configuration");
                sigmas.push(r.final_sigma);
                fs.push(sphere(&r.final_mean));
            }
            sigmas.sort_by(f64::total_cmp);
            fs.sort_by(f64::total_cmp);
            println!(
                "noise {level:.1}  beta {beta:.1}  median sigma {:>10.3e}  median f(mean) {:>10.3e}",
                sigmas[5], fs[5]
            );
        }
    }
}
