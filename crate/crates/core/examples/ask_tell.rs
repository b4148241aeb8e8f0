//! Drive the optimizer by hand: the caller owns every evaluation.
//!
//! A generation is two rounds. First the population, then the two test
//! points that decide the step-size change.

use nalgebra::DVector;
use tpa_cmaes::engine::{CandidateKind, Optimizer, StepSizeMode};
use tpa_cmaes::objectives::rosenbrock;
use tpa_cmaes::params::StrategyParams;

fn main() {
    let n = 6;
    let params = StrategyParams::default_for(n, None).expect("n > 0");
    let mut opt = Optimizer::seeded(params, StepSizeMode::Tpa, DVector::zeros(n), 0.5, 3)
        .expect("valid start");

    let mut calls = 0u64;
    while opt.state().generation < 3000 {
        let batch = opt.ask();
        let fitness: Vec<f64> = batch.points.iter().map(|x| rosenbrock(x.as_slice())).collect();
        calls += fitness.len() as u64;
        let round = match batch.kind {
            CandidateKind::Population => "population",
            CandidateKind::TestPoints => "test points",
        };
        if let Some(record) = opt.tell(&fitness).expect("finite fitness") {
            if record.generation % 250 == 0 {
                println!(
                    "gen {:>5} (last round: {round})  best {:.3e}  sigma {:.2e}  axis ratio {:.1}",
                    record.generation, record.best_f, record.sigma, record.axis_ratio
                );
            }
            if record.best_f < 1e-12 {
                break;
            }
        }
    }
    let state = opt.state();
    println!("calls: {calls}  counted: {}", state.evals);
    println!("mean: {:.6?}", state.mean.as_slice());
}
