//! The generation loop.
//!
//! [`Optimizer`] is an ask/tell state machine. In two-point mode a generation
//! takes two rounds: `ask` hands out the λ candidates, `tell` consumes their
//! values and moves the mean, then `ask` hands out the two test points and
//! the second `tell` adapts σ and `C`. In CSA mode one round suffices.
//! [`run`] and [`run_with_restarts`] drive the loop with termination checks.

mod run;

pub use run::{
    run, run_with_restarts, RestartPolicy, RunConfig, RunResult, TerminationCriteria,
    TerminationReason,
};

use nalgebra::DVector;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::covariance::{self, CovarianceState};
use crate::objectives::Objective;
use crate::params::{ParamError, StrategyParams};
use crate::recombine::{self, RankError, RankedPopulation};
use crate::sampler::{self, CovarianceFactor, DecomposeError, Offspring};
use crate::stepsize::{self, CsaParams, CsaState, LegacyFlags, TpaState};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error("generation {generation}: covariance factorization failed: {source}")]
    Decompose {
        generation: u64,
        source: DecomposeError,
    },
    #[error("expected {expected} fitness values, got {got}")]
    FitnessCount { expected: usize, got: usize },
    #[error("test point fitness is NaN")]
    NanTestPoint,
    #[error("generation {generation}: numerical breakdown ({detail}), sigma = {sigma:e}")]
    Numerical {
        generation: u64,
        sigma: f64,
        detail: String,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Which step-size controller drives σ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepSizeMode {
    #[default]
    Tpa,
    /// Two-point adaptation with the older asymmetric settings.
    TpaLegacy,
    Csa,
}

/// Replacement constants for the CSA controller.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CsaOverrides {
    pub c_sigma: Option<f64>,
    pub d_sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ControllerState {
    Tpa(TpaState),
    Csa(CsaState),
}

/// Mutable state of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionState {
    pub mean: DVector<f64>,
    pub sigma: f64,
    pub cov: CovarianceState,
    pub controller: ControllerState,
    /// Completed generations.
    pub generation: u64,
    /// Objective evaluations, test points included.
    pub evals: u64,
    pub best: Option<(DVector<f64>, f64)>,
}

impl EvolutionState {
    pub fn alpha_s(&self) -> Option<f64> {
        match &self.controller {
            ControllerState::Tpa(t) => Some(t.alpha_s),
            ControllerState::Csa(_) => None,
        }
    }

    pub fn best_f(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |b| b.1)
    }
}

/// One row of the per-generation trace.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub generation: u64,
    pub evals: u64,
    pub best_f: f64,
    pub sigma: f64,
    /// Smoothed signal after this generation; absent in CSA mode.
    pub alpha_s: Option<f64>,
    pub alpha_act: Option<f64>,
    pub sigma_multiplier: f64,
    pub h_sigma: f64,
    pub axis_ratio: f64,
    pub trace_c: f64,
    /// Best and worst population value of this generation.
    pub gen_best_f: f64,
    pub gen_worst_f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateKind {
    Population,
    TestPoints,
}

/// Points handed out by [`Optimizer::ask`].
#[derive(Debug, Clone)]
pub struct Candidates {
    pub kind: CandidateKind,
    pub points: Vec<DVector<f64>>,
    /// Mutation vectors `y_k` with `x_k = m + σ y_k`; empty for test points.
    pub mutations: Vec<DVector<f64>>,
}

#[derive(Debug, Clone)]
enum Phase {
    Idle,
    Population(Vec<Offspring>),
    TestPoints(Pending),
}

#[derive(Debug, Clone)]
struct Pending {
    ranked: RankedPopulation,
    mean_step: DVector<f64>,
    mean_old: DVector<f64>,
    points: [DVector<f64>; 2],
}

pub struct Optimizer {
    params: StrategyParams,
    mode: StepSizeMode,
    legacy: LegacyFlags,
    csa: Option<CsaParams>,
    state: EvolutionState,
    factor: CovarianceFactor,
    rng: ChaCha8Rng,
    phase: Phase,
    target: Option<f64>,
    target_hit_at: Option<u64>,
}

impl Optimizer {
    /// `params` are the plain two-point/CMA constants; legacy settings and
    /// CSA constants are derived from them according to `mode`.
    pub fn new(
        params: StrategyParams,
        mode: StepSizeMode,
        mean: DVector<f64>,
        sigma: f64,
        rng: ChaCha8Rng,
    ) -> Result<Self, EngineError> {
        Self::with_csa_overrides(params, mode, CsaOverrides::default(), mean, sigma, rng)
    }

    pub fn with_csa_overrides(
        params: StrategyParams,
        mode: StepSizeMode,
        csa_overrides: CsaOverrides,
        mean: DVector<f64>,
        sigma: f64,
        rng: ChaCha8Rng,
    ) -> Result<Self, EngineError> {
        params.validate()?;
        if mean.len() != params.n {
            return Err(EngineError::Config(format!(
                "initial mean has {} coordinates, dimension is {}",
                mean.len(),
                params.n
            )));
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(EngineError::Config("initial mean is not finite".into()));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(EngineError::Config(format!("initial step-size {sigma} must be positive")));
        }
        let (params, legacy) = match mode {
            StepSizeMode::TpaLegacy => stepsize::salomon_legacy_params(&params),
            _ => (params, LegacyFlags::default()),
        };
        let csa = (mode == StepSizeMode::Csa).then(|| {
            let mut c = CsaParams::defaults(&params);
            if let Some(v) = csa_overrides.c_sigma {
                c.c_sigma = v;
            }
            if let Some(v) = csa_overrides.d_sigma {
                c.d_sigma = v;
            }
            c
        });
        if let Some(c) = &csa {
            if !(c.c_sigma > 0.0 && c.c_sigma <= 1.0 && c.d_sigma > 0.0) {
                return Err(EngineError::Config(format!(
                    "CSA constants out of range: c_sigma = {}, d_sigma = {}",
                    c.c_sigma, c.d_sigma
                )));
            }
        }
        let n = params.n;
        let controller = match mode {
            StepSizeMode::Csa => ControllerState::Csa(CsaState::new(n)),
            _ => ControllerState::Tpa(TpaState::default()),
        };
        Ok(Optimizer {
            factor: CovarianceFactor::identity(n, csa.is_some()),
            state: EvolutionState {
                mean,
                sigma,
                cov: CovarianceState::new(n),
                controller,
                generation: 0,
                evals: 0,
                best: None,
            },
            params,
            mode,
            legacy,
            csa,
            rng,
            phase: Phase::Idle,
            target: None,
            target_hit_at: None,
        })
    }

    /// Convenience constructor seeding the sampling stream from `seed`.
    pub fn seeded(
        params: StrategyParams,
        mode: StepSizeMode,
        mean: DVector<f64>,
        sigma: f64,
        seed: u64,
    ) -> Result<Self, EngineError> {
        Self::new(params, mode, mean, sigma, ChaCha8Rng::seed_from_u64(seed))
    }

    /// Records the evaluation index at which the best value first drops below `target`.
    pub fn set_target(&mut self, target: Option<f64>) {
        self.target = target;
        self.target_hit_at = None;
        if let (Some(t), Some((_, f))) = (target, &self.state.best) {
            if *f < t {
                self.target_hit_at = Some(self.state.evals);
            }
        }
    }

    pub fn target_hit_at(&self) -> Option<u64> {
        self.target_hit_at
    }

    pub fn params(&self) -> &StrategyParams {
        &self.params
    }

    pub fn mode(&self) -> StepSizeMode {
        self.mode
    }

    pub fn legacy_flags(&self) -> LegacyFlags {
        self.legacy
    }

    pub fn csa_params(&self) -> Option<&CsaParams> {
        self.csa.as_ref()
    }

    pub fn state(&self) -> &EvolutionState {
        &self.state
    }

    /// Factorization of the current `C`, used for the next sampling round.
    pub fn factor(&self) -> &CovarianceFactor {
        &self.factor
    }

    /// Evaluations one full generation costs.
    pub fn evals_per_generation(&self) -> u64 {
        match self.mode {
            StepSizeMode::Csa => self.params.lambda as u64,
            _ => self.params.lambda as u64 + 2,
        }
    }

    /// Points awaiting evaluation. Asking twice without telling returns the
    /// same points.
    pub fn ask(&mut self) -> Candidates {
        if let Phase::Idle = self.phase {
            let offspring = sampler::sample_population(
                &self.state.mean,
                self.state.sigma,
                &self.factor,
                self.params.lambda,
                &mut self.rng,
            );
            self.phase = Phase::Population(offspring);
        }
        match &self.phase {
            Phase::Population(off) => Candidates {
                kind: CandidateKind::Population,
                points: off.iter().map(|o| o.x.clone()).collect(),
                mutations: off.iter().map(|o| o.y.clone()).collect(),
            },
            Phase::TestPoints(p) => Candidates {
                kind: CandidateKind::TestPoints,
                points: p.points.to_vec(),
                mutations: Vec::new(),
            },
            Phase::Idle => unreachable!(),
        }
    }

    /// Consumes values for the points of the last `ask`. Returns the trace
    /// row once the generation is complete.
    pub fn tell(&mut self, fitness: &[f64]) -> Result<Option<RunRecord>, EngineError> {
        match std::mem::replace(&mut self.phase, Phase::Idle) {
            Phase::Idle => Err(EngineError::Config("tell called before ask".into())),
            Phase::Population(offspring) => {
                if fitness.len() != offspring.len() {
                    let expected = offspring.len();
                    self.phase = Phase::Population(offspring);
                    return Err(EngineError::FitnessCount {
                        expected,
                        got: fitness.len(),
                    });
                }
                self.tell_population(offspring, fitness)
            }
            Phase::TestPoints(pending) => {
                if fitness.len() != 2 {
                    self.phase = Phase::TestPoints(pending);
                    return Err(EngineError::FitnessCount {
                        expected: 2,
                        got: fitness.len(),
                    });
                }
                if fitness.iter().any(|f| f.is_nan()) {
                    self.phase = Phase::TestPoints(pending);
                    return Err(EngineError::NanTestPoint);
                }
                self.tell_test_points(pending, fitness[0], fitness[1]).map(Some)
            }
        }
    }

    /// One full generation against `objective`.
    pub fn step<O: Objective + ?Sized>(
        &mut self,
        objective: &O,
        noise: &mut dyn RngCore,
    ) -> Result<RunRecord, EngineError> {
        loop {
            let cand = self.ask();
            let values: Vec<f64> = cand
                .points
                .iter()
                .map(|x| objective.evaluate(x.as_slice(), noise))
                .collect();
            if let Some(record) = self.tell(&values)? {
                return Ok(record);
            }
        }
    }

    fn note_evaluation(&mut self, x: &DVector<f64>, f: f64) {
        self.state.evals += 1;
        if f < self.state.best_f() {
            self.state.best = Some((x.clone(), f));
            if let (Some(t), None) = (self.target, self.target_hit_at) {
                if f < t {
                    self.target_hit_at = Some(self.state.evals);
                }
            }
        }
    }

    fn tell_population(
        &mut self,
        offspring: Vec<Offspring>,
        fitness: &[f64],
    ) -> Result<Option<RunRecord>, EngineError> {
        let members: Vec<(Offspring, f64)> = offspring.into_iter().zip(fitness.iter().copied()).collect();
        let ranked = recombine::rank(members)?;
        for (o, f) in &ranked.members {
            self.note_evaluation(&o.x, *f);
        }
        let infeasible = ranked.infeasible_count();
        let allowed = self.params.lambda - self.params.mu;
        if infeasible > allowed {
            return Err(RankError::TooManyInfeasible {
                infeasible,
                lambda: self.params.lambda,
                allowed,
            }
            .into());
        }
        let mean_step = recombine::weighted_mean_step(&ranked, &self.params.weights);
        let mean_old = self.state.mean.clone();
        let moved = recombine::update_mean(&mean_old, self.state.sigma, &mean_step);

        match self.mode {
            StepSizeMode::Csa => {
                self.state.mean = moved;
                let csa = self.csa.expect("CSA constants");
                let ControllerState::Csa(path) = &self.state.controller else {
                    unreachable!("CSA mode with two-point state")
                };
                let inv_sqrt = self.factor.inv_sqrt.as_ref().expect("C^-1/2 in CSA mode");
                let up = stepsize::csa_update(path, &mean_step, inv_sqrt, self.params.mu_w, &csa);
                let generation = self.state.generation + 1;
                let h_sigma = csa.path_indicator(&up.state.p_sigma, generation, self.params.n);
                self.state.controller = ControllerState::Csa(up.state);
                self.state.sigma *= up.sigma_multiplier;
                self.finish(&ranked, &mean_step, h_sigma, None, up.sigma_multiplier)
                    .map(Some)
            }
            StepSizeMode::Tpa | StepSizeMode::TpaLegacy => {
                let (plus, minus) = stepsize::tpa_test_points_with(
                    &moved,
                    self.state.sigma,
                    &mean_step,
                    self.params.alpha_test,
                    self.legacy,
                );
                if !self.legacy.mean_uses_new_sigma {
                    self.state.mean = moved;
                }
                self.phase = Phase::TestPoints(Pending {
                    ranked,
                    mean_step,
                    mean_old,
                    points: [plus, minus],
                });
                Ok(None)
            }
        }
    }

    fn tell_test_points(&mut self, pending: Pending, f_plus: f64, f_minus: f64) -> Result<RunRecord, EngineError> {
        let [plus, minus] = &pending.points;
        self.note_evaluation(plus, f_plus);
        self.note_evaluation(minus, f_minus);
        let ControllerState::Tpa(tpa) = self.state.controller else {
            unreachable!("two-point mode with CSA state")
        };
        let up = stepsize::tpa_update(tpa, f_plus, f_minus, &self.params);
        if up.uninformative {
            log::warn!(
                "generation {}: both test points are infeasible, decreasing step-size",
                self.state.generation + 1
            );
        }
        self.state.controller = ControllerState::Tpa(up.state);
        self.state.sigma *= up.sigma_multiplier;
        if self.legacy.mean_uses_new_sigma {
            self.state.mean = recombine::update_mean(&pending.mean_old, self.state.sigma, &pending.mean_step);
        }
        let generation = self.state.generation + 1;
        let h_sigma = covariance::stall_indicator(up.state.alpha_s, generation, &self.params);
        self.finish(
            &pending.ranked,
            &pending.mean_step,
            h_sigma,
            Some(up.alpha_act),
            up.sigma_multiplier,
        )
    }

    fn finish(
        &mut self,
        ranked: &RankedPopulation,
        mean_step: &DVector<f64>,
        h_sigma: f64,
        alpha_act: Option<f64>,
        sigma_multiplier: f64,
    ) -> Result<RunRecord, EngineError> {
        let generation = self.state.generation + 1;
        self.state.cov = covariance::adapt(&self.state.cov, mean_step, h_sigma, ranked, &self.params);
        if !(self.state.sigma.is_finite() && self.state.sigma > 0.0) {
            return Err(EngineError::Numerical {
                generation,
                sigma: self.state.sigma,
                detail: "step-size left (0, inf)".into(),
            });
        }
        if self.state.mean.iter().any(|v| !v.is_finite()) {
            return Err(EngineError::Numerical {
                generation,
                sigma: self.state.sigma,
                detail: "mean is not finite".into(),
            });
        }
        self.factor = sampler::decompose(&self.state.cov.c, self.csa.is_some())
            .map_err(|source| EngineError::Decompose { generation, source })?;
        if self.factor.repaired {
            log::debug!("generation {generation}: covariance eigenvalues floored");
        }
        self.state.generation = generation;
        Ok(RunRecord {
            generation,
            evals: self.state.evals,
            best_f: self.state.best_f(),
            sigma: self.state.sigma,
            alpha_s: self.state.alpha_s(),
            alpha_act,
            sigma_multiplier,
            h_sigma,
            axis_ratio: self.factor.axis_ratio(),
            trace_c: self.state.cov.c.trace(),
            gen_best_f: ranked.best().1,
            gen_worst_f: ranked.nth(ranked.len() - 1).1,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::sphere;

    fn optimizer(mode: StepSizeMode) -> Optimizer {
        let p = StrategyParams::default_for(2, None).unwrap();
        Optimizer::seeded(p, mode, DVector::from_vec(vec![1.0, 0.0]), 0.5, 7).unwrap()
    }

    #[test]
    fn evaluation_accounting() {
        let mut noise = ChaCha8Rng::seed_from_u64(0);
        let mut opt = optimizer(StepSizeMode::Tpa);
        let rec = opt.step(&sphere, &mut noise).unwrap();
        assert_eq!(rec.evals, 8);
        assert_eq!(rec.generation, 1);
        let mut opt = optimizer(StepSizeMode::Csa);
        let rec = opt.step(&sphere, &mut noise).unwrap();
        assert_eq!(rec.evals, 6);
        assert!(rec.alpha_s.is_none());
    }

    #[test]
    fn ask_tell_phases() {
        let mut opt = optimizer(StepSizeMode::Tpa);
        assert!(matches!(opt.tell(&[1.0]), Err(EngineError::Config(_))));
        let a = opt.ask();
        assert_eq!(a.kind, CandidateKind::Population);
        assert_eq!(a.points.len(), 6);
        let again = opt.ask();
        assert_eq!(a.points, again.points);
        assert!(matches!(
            opt.tell(&[1.0; 5]),
            Err(EngineError::FitnessCount { expected: 6, got: 5 })
        ));
        let values: Vec<f64> = a.points.iter().map(|x| sphere(x.as_slice())).collect();
        assert!(opt.tell(&values).unwrap().is_none());
        let t = opt.ask();
        assert_eq!(t.kind, CandidateKind::TestPoints);
        assert_eq!(t.points.len(), 2);
        let mid = (&t.points[0] + &t.points[1]) / 2.0;
        assert!((mid - &opt.state().mean).norm() < 1e-15);
        assert!(matches!(opt.tell(&[f64::NAN, 1.0]), Err(EngineError::NanTestPoint)));
        let rec = opt.tell(&[1.0, 2.0]).unwrap().unwrap();
        assert_eq!(rec.alpha_act, Some(0.5));
        assert_eq!(opt.state().generation, 1);
    }

    #[test]
    fn too_many_infeasible() {
        let mut opt = optimizer(StepSizeMode::Tpa);
        let a = opt.ask();
        let mut values = vec![f64::INFINITY; a.points.len()];
        values[0] = 1.0;
        assert!(matches!(
            opt.tell(&values),
            Err(EngineError::Rank(RankError::TooManyInfeasible { infeasible: 5, .. }))
        ));
    }

    #[test]
    fn invalid_construction() {
        let p = StrategyParams::default_for(2, None).unwrap();
        assert!(Optimizer::seeded(p.clone(), StepSizeMode::Tpa, DVector::zeros(3), 1.0, 0).is_err());
        assert!(Optimizer::seeded(p.clone(), StepSizeMode::Tpa, DVector::zeros(2), 0.0, 0).is_err());
        assert!(Optimizer::seeded(p, StepSizeMode::Tpa, DVector::from_vec(vec![f64::NAN, 0.0]), 1.0, 0).is_err());
    }

    #[test]
    fn frozen_adaptation_moves_only_mean() {
        let p = StrategyParams {
            c_1: 0.0,
            c_mu: 0.0,
            alpha_change: 0.0,
            ..StrategyParams::default_for(3, None).unwrap()
        };
        let mut opt = Optimizer::seeded(p, StepSizeMode::Tpa, DVector::from_element(3, 2.0), 0.7, 3).unwrap();
        let mut noise = ChaCha8Rng::seed_from_u64(0);
        let before = opt.state().clone();
        for _ in 0..5 {
            opt.step(&sphere, &mut noise).unwrap();
        }
        let after = opt.state();
        assert_eq!(after.sigma, before.sigma);
        assert_eq!(after.cov.c, before.cov.c);
        assert_eq!(after.alpha_s(), Some(0.0));
        assert_ne!(after.mean, before.mean);
        assert_eq!(after.generation, 5);
    }

    #[test]
    fn legacy_mean_uses_new_sigma() {
        let p = StrategyParams::default_for(2, None).unwrap();
        let mut opt =
            Optimizer::seeded(p, StepSizeMode::TpaLegacy, DVector::from_vec(vec![1.0, 1.0]), 0.5, 1).unwrap();
        assert!(opt.legacy_flags().mean_uses_new_sigma);
        let a = opt.ask();
        let values: Vec<f64> = a.points.iter().map(|x| sphere(x.as_slice())).collect();
        opt.tell(&values).unwrap();
        // mean is not moved before the step-size decision
        assert_eq!(opt.state().mean, DVector::from_vec(vec![1.0, 1.0]));
        let t = opt.ask();
        let (fp, fm) = (sphere(t.points[0].as_slice()), sphere(t.points[1].as_slice()));
        let rec = opt.tell(&[fp, fm]).unwrap().unwrap();
        let expect = if fm < fp { 1.0 / 1.8 } else { 1.8 };
        assert!((rec.sigma_multiplier - expect).abs() < 1e-12);
        // the new mean is the winning test point
        let winner = if fm < fp { &t.points[1] } else { &t.points[0] };
        assert!((winner - &opt.state().mean).norm() < 1e-12);
    }

    #[test]
    fn target_tracking() {
        let mut opt = optimizer(StepSizeMode::Tpa);
        opt.set_target(Some(10.0));
        let mut noise = ChaCha8Rng::seed_from_u64(0);
        opt.step(&sphere, &mut noise).unwrap();
        assert_eq!(opt.target_hit_at(), Some(1));
    }
}
