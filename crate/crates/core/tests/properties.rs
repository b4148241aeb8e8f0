use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tpa_cmaes::engine::{run, run_with_restarts, RestartPolicy, RunConfig, StepSizeMode, TerminationCriteria};
use tpa_cmaes::objectives::{sphere, ObjectiveKind, ObjectiveSpec};
use tpa_cmaes::params::{compute_weights, variance_effective_mass, StrategyParams};
use tpa_cmaes::recombine::{rank, recombine_candidates, update_mean, weighted_mean_step};
use tpa_cmaes::sampler::{decompose, sample_population, CovarianceFactor};

proptest! {
    #[test]
    fn weights_are_normalized_and_decreasing(lambda in 2usize..400) {
        let p = StrategyParams::default_for(3, Some(lambda)).unwrap();
        let sum: f64 = p.weights.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!(p.weights.windows(2).all(|w| w[0] > w[1]));
        prop_assert!(p.mu_w >= 1.0 && p.mu_w <= p.mu as f64 + 1e-9);
        prop_assert!((variance_effective_mass(&p.weights).unwrap() - p.mu_w).abs() < 1e-9);
    }

    #[test]
    fn learning_rates_leave_room(n in 1usize..200) {
        let p = StrategyParams::default_for(n, None).unwrap();
        prop_assert!(p.c_1 > 0.0 && p.c_mu >= 0.0 && p.c_1 + p.c_mu <= 1.0 + 1e-15);
        prop_assert!(p.c_c > 0.0 && p.c_c <= 1.0);
    }

    #[test]
    fn both_mean_forms_agree(seed in any::<u64>(), n in 1usize..12, sigma in 1e-3f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = StrategyParams::default_for(n, None).unwrap();
        let mean = DVector::from_fn(n, |i, _| i as f64 - 2.5);
        let off = sample_population(&mean, sigma, &CovarianceFactor::identity(n, false), p.lambda, &mut rng);
        let members = off.into_iter().map(|o| { let f = sphere(o.x.as_slice()); (o, f) }).collect();
        let ranked = rank(members).unwrap();
        let a = update_mean(&mean, sigma, &weighted_mean_step(&ranked, &p.weights));
        let b = recombine_candidates(&ranked, &p.weights);
        let scale = a.norm().max(mean.norm()).max(sigma);
        prop_assert!((a - b).norm() <= 1e-12 * scale);
    }

    #[test]
    fn ranking_ignores_monotone_transforms(values in prop::collection::vec(-1e6f64..1e6, 2..30)) {
        let mk = |vals: &[f64]| -> Vec<usize> {
            let members = vals.iter().enumerate().map(|(i, &f)| {
                let y = DVector::from_element(1, i as f64);
                (tpa_cmaes::sampler::Offspring { x: y.clone(), y }, f)
            }).collect();
            let r = rank(members).unwrap();
            (0..vals.len()).map(|k| r.nth(k).0.y[0] as usize).collect()
        };
        let shifted: Vec<f64> = values.iter().map(|v| 3.0 * v + 7.0).collect();
        prop_assert_eq!(mk(&values), mk(&shifted));
    }

    #[test]
    fn decomposition_round_trips(entries in prop::collection::vec(-2.0f64..2.0, 16)) {
        let a = DMatrix::from_vec(4, 4, entries);
        let c = &a * a.transpose() + DMatrix::identity(4, 4) * 0.1;
        let f = decompose(&c, true).unwrap();
        prop_assert!((f.reconstruct() - &c).amax() < 1e-9 * c.amax());
        let inv = f.inv_sqrt.as_ref().unwrap();
        prop_assert!((inv * &c * inv - DMatrix::identity(4, 4)).amax() < 1e-8);
    }
}

#[test]
fn weights_oracle() {
    let w = compute_weights(2.0, 2).unwrap();
    assert!((w[0] - 0.8041628599327295).abs() < 1e-12);
}

fn config(n: usize, seed: u64, mode: StepSizeMode) -> RunConfig {
    let mut cfg = RunConfig::new(vec![3.0; n], 2.0);
    cfg.seed = seed;
    cfg.mode = mode;
    cfg.termination = TerminationCriteria::default().with_target(Some(1e-9));
    cfg
}

#[test]
fn same_seed_same_trace() {
    for mode in [StepSizeMode::Tpa, StepSizeMode::TpaLegacy, StepSizeMode::Csa] {
        let spec = ObjectiveSpec::new(ObjectiveKind::Rosenbrock, 4);
        let a = run(&config(4, 9, mode), &spec).unwrap();
        let b = run(&config(4, 9, mode), &spec).unwrap();
        assert_eq!(a.trace, b.trace, "{mode:?}");
        let c = run(&config(4, 10, mode), &spec).unwrap();
        assert_ne!(a.trace, c.trace, "{mode:?}");
    }
}

#[test]
fn noisy_sphere_trace_is_reproducible() {
    let spec = ObjectiveSpec::new(ObjectiveKind::NoisySphere, 5).with_noise(0.5);
    let mut cfg = config(5, 4, StepSizeMode::Tpa);
    cfg.termination = TerminationCriteria::budget_only(3000);
    assert_eq!(run(&cfg, &spec).unwrap().trace, run(&cfg, &spec).unwrap().trace);
}

/// Moderate noise: the bias keeps σ from collapsing, and the optimizer
/// with bias gets closer to the optimum.
#[test]
fn bias_helps_under_moderate_noise() {
    let n = 10;
    let spec = ObjectiveSpec::new(ObjectiveKind::NoisySphere, n).with_noise(0.5);
    let go = |beta: f64| {
        let mut sig = Vec::new();
        let mut fs = Vec::new();
        for seed in 1..=11 {
            let mut cfg = config(n, seed, StepSizeMode::Tpa);
            cfg.keep_trace = false;
            cfg.overrides.beta_bias = Some(beta);
            cfg.termination = TerminationCriteria::budget_only(20_000);
            let r = run(&cfg, &spec).unwrap();
            sig.push(r.final_sigma);
            fs.push(sphere(&r.final_mean));
        }
        sig.sort_by(f64::total_cmp);
        fs.sort_by(f64::total_cmp);
        (sig[5], fs[5])
    };
    let (s0, f0) = go(0.0);
    let (s1, f1) = go(0.1);
    assert!(s1 >= 10.0 * s0, "sigma {s1} vs {s0}");
    assert!(f1 <= f0, "f {f1} vs {f0}");
}

#[test]
fn restarts_solve_rastrigin() {
    let n = 5;
    let spec = ObjectiveSpec::new(ObjectiveKind::Rastrigin, n);
    let policy = RestartPolicy {
        bounds: Some((-5.0, 5.0)),
        ..RestartPolicy::default()
    };
    let mut solved = 0;
    for seed in 1..=20 {
        let mut cfg = config(n, seed, StepSizeMode::Tpa);
        cfg.keep_trace = false;
        cfg.termination = TerminationCriteria {
            max_evals: 200_000,
            ..TerminationCriteria::default()
        }
        .with_target(Some(1e-8));
        let r = run_with_restarts(&cfg, &policy, &spec).unwrap();
        for pair in r.lambdas.windows(2) {
            assert_eq!(pair[1], 2 * pair[0]);
        }
        if r.evals_to_target.is_some() {
            solved += 1;
        }
    }
    assert!(solved >= 15, "solved {solved}/20");
}

#[test]
fn trace_accounting() {
    let spec = ObjectiveSpec::new(ObjectiveKind::Sphere, 6);
    for (mode, extra) in [(StepSizeMode::Tpa, 2), (StepSizeMode::Csa, 0)] {
        let r = run(&config(6, 2, mode), &spec).unwrap();
        let lambda = StrategyParams::default_for(6, None).unwrap().lambda as u64;
        for (i, rec) in r.trace.iter().enumerate() {
            assert_eq!(rec.generation, i as u64 + 1);
            assert_eq!(rec.evals, (i as u64 + 1) * (lambda + extra));
        }
        assert!(r.trace.windows(2).all(|w| w[1].best_f <= w[0].best_f));
        assert_eq!(r.trace.last().unwrap().evals, r.evals);
    }
}
