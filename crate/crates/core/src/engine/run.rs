use std::collections::VecDeque;
use std::fmt;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CsaOverrides, EngineError, Optimizer, RunRecord, StepSizeMode};
use crate::objectives::Objective;
use crate::params::{default_lambda, ParamOverrides, StrategyParams};

#[derive(Debug, Clone, PartialEq)]
pub struct TerminationCriteria {
    pub max_evals: u64,
    /// Stop once the best value is strictly below this.
    pub target_f: Option<f64>,
    /// Stop when `σ · max_i sqrt(C_ii)` drops below this.
    pub tol_x: Option<f64>,
    /// Stop when recent best values and the current population span less than this.
    pub tol_fun: Option<f64>,
    /// Allowed range of `σ / σ₀`.
    pub sigma_ratio_bounds: (f64, f64),
    pub max_axis_ratio: f64,
}

impl Default for TerminationCriteria {
    fn default() -> Self {
        TerminationCriteria {
            max_evals: 100_000,
            target_f: None,
            tol_x: Some(1e-12),
            tol_fun: Some(1e-12),
            sigma_ratio_bounds: (0.0, 1e10),
            max_axis_ratio: 1e7,
        }
    }
}

impl TerminationCriteria {
    /// Only the evaluation budget, everything else disabled.
    pub fn budget_only(max_evals: u64) -> Self {
        TerminationCriteria {
            max_evals,
            target_f: None,
            tol_x: None,
            tol_fun: None,
            sigma_ratio_bounds: (0.0, f64::INFINITY),
            max_axis_ratio: f64::INFINITY,
        }
    }

    pub fn with_target(mut self, target: Option<f64>) -> Self {
        self.target_f = target;
        self
    }

    fn validate(&self) -> Result<(), EngineError> {
        let (lo, hi) = self.sigma_ratio_bounds;
        let positive = |v: Option<f64>| v.is_none_or(|v| v > 0.0);
        if !(positive(self.tol_x) && positive(self.tol_fun) && lo >= 0.0 && hi > lo && self.max_axis_ratio > 1.0) {
            return Err(EngineError::Config(format!("invalid termination criteria {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TerminationReason {
    TargetF,
    MaxEvals,
    TolX,
    TolFun,
    SigmaRatio,
    AxisRatio,
}

impl fmt::Display for TerminationReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TerminationReason::TargetF => "target_f",
            TerminationReason::MaxEvals => "max_evals",
            TerminationReason::TolX => "tol_x",
            TerminationReason::TolFun => "tol_fun",
            TerminationReason::SigmaRatio => "sigma_ratio",
            TerminationReason::AxisRatio => "axis_ratio",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub initial_mean: Vec<f64>,
    pub sigma0: f64,
    pub mode: StepSizeMode,
    pub overrides: ParamOverrides,
    pub csa_overrides: CsaOverrides,
    pub termination: TerminationCriteria,
    pub seed: u64,
    /// Keep one [`RunRecord`] per generation.
    pub keep_trace: bool,
}

impl RunConfig {
    pub fn new(initial_mean: Vec<f64>, sigma0: f64) -> Self {
        RunConfig {
            initial_mean,
            sigma0,
            mode: StepSizeMode::Tpa,
            overrides: ParamOverrides::default(),
            csa_overrides: CsaOverrides::default(),
            termination: TerminationCriteria::default(),
            seed: 0,
            keep_trace: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.initial_mean.len()
    }
}

/// Restarts with a growing population.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartPolicy {
    /// λ is multiplied by this factor at every restart.
    pub lambda_multiplier: usize,
    pub max_restarts: usize,
    /// Box for drawing fresh initial means; without it the initial mean is reused.
    pub bounds: Option<(f64, f64)>,
}

impl Default for RestartPolicy {
    fn default() -> Self {
        RestartPolicy {
            lambda_multiplier: 2,
            max_restarts: 9,
            bounds: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub best_x: Option<Vec<f64>>,
    pub best_f: f64,
    pub reason: TerminationReason,
    pub trace: Vec<RunRecord>,
    pub evals: u64,
    pub generations: u64,
    /// Evaluation at which the target was first undercut.
    pub evals_to_target: Option<u64>,
    pub final_mean: Vec<f64>,
    pub final_sigma: f64,
    /// Population size of every (re)start, in order.
    pub lambdas: Vec<usize>,
}

impl RunResult {
    pub fn restarts(&self) -> usize {
        self.lambdas.len().saturating_sub(1)
    }
}

/// Sampling stream and noise stream of restart `k`.
fn streams(seed: u64, k: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut sampling = ChaCha8Rng::seed_from_u64(seed);
    sampling.set_stream(2 * k);
    let mut noise = ChaCha8Rng::seed_from_u64(seed);
    noise.set_stream(2 * k + 1);
    (sampling, noise)
}

struct Segment {
    best: Option<(Vec<f64>, f64)>,
    reason: TerminationReason,
    evals: u64,
    generations: u64,
    target_hit_at: Option<u64>,
    final_mean: Vec<f64>,
    final_sigma: f64,
}

struct TolFunWindow {
    len: usize,
    history: VecDeque<f64>,
}

impl TolFunWindow {
    fn new(n: usize, lambda: usize) -> Self {
        TolFunWindow {
            len: 10 + (30.0 * n as f64 / lambda as f64).ceil() as usize,
            history: VecDeque::new(),
        }
    }

    fn push(&mut self, rec: &RunRecord) {
        if self.history.len() == self.len {
            self.history.pop_front();
        }
        self.history.push_back(rec.gen_best_f);
    }

    fn span(&self, last: &RunRecord) -> Option<f64> {
        if self.history.len() < self.len {
            return None;
        }
        let hi = self.history.iter().copied().fold(last.gen_worst_f, f64::max);
        let lo = self.history.iter().copied().fold(last.gen_best_f, f64::min);
        Some(hi - lo)
    }
}

fn check_termination(
    opt: &Optimizer,
    crit: &TerminationCriteria,
    budget: u64,
    sigma0: f64,
    tol_fun: &TolFunWindow,
    last: Option<&RunRecord>,
) -> Option<TerminationReason> {
    let state = opt.state();
    if let Some(t) = crit.target_f {
        if state.best_f() < t {
            return Some(TerminationReason::TargetF);
        }
    }
    if state.evals >= budget {
        return Some(TerminationReason::MaxEvals);
    }
    if let Some(tol) = crit.tol_x {
        let max_sd = state.cov.c.diagonal().iter().fold(0.0f64, |a, &v| a.max(v)).sqrt();
        if state.sigma * max_sd < tol {
            return Some(TerminationReason::TolX);
        }
    }
    if let (Some(tol), Some(rec)) = (crit.tol_fun, last) {
        if tol_fun.span(rec).is_some_and(|s| s < tol) {
            return Some(TerminationReason::TolFun);
        }
    }
    let ratio = state.sigma / sigma0;
    if ratio < crit.sigma_ratio_bounds.0 || ratio > crit.sigma_ratio_bounds.1 {
        return Some(TerminationReason::SigmaRatio);
    }
    if opt.factor().axis_ratio() > crit.max_axis_ratio {
        return Some(TerminationReason::AxisRatio);
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn run_segment<O: Objective + ?Sized>(
    config: &RunConfig,
    lambda: usize,
    mean: Vec<f64>,
    restart: u64,
    evals_offset: u64,
    generation_offset: u64,
    best_so_far: f64,
    objective: &O,
    trace: &mut Vec<RunRecord>,
) -> Result<Segment, EngineError> {
    let n = config.dim();
    let overrides = ParamOverrides {
        lambda: Some(lambda),
        ..config.overrides.clone()
    };
    let params = StrategyParams::with_overrides(n, &overrides)?;
    let (sampling, mut noise) = streams(config.seed, restart);
    let mut opt = Optimizer::with_csa_overrides(
        params,
        config.mode,
        config.csa_overrides,
        DVector::from_vec(mean),
        config.sigma0,
        sampling,
    )?;
    opt.set_target(config.termination.target_f);
    let budget = config.termination.max_evals.saturating_sub(evals_offset);
    let mut window = TolFunWindow::new(n, lambda);
    let mut last: Option<RunRecord> = None;
    let reason = loop {
        if let Some(r) = check_termination(
            &opt,
            &config.termination,
            budget,
            config.sigma0,
            &window,
            last.as_ref(),
        ) {
            break r;
        }
        let mut rec = opt.step(objective, &mut noise)?;
        window.push(&rec);
        if config.keep_trace {
            let mut row = rec.clone();
            row.generation += generation_offset;
            row.evals += evals_offset;
            row.best_f = row.best_f.min(best_so_far);
            trace.push(row);
        }
        rec.generation += generation_offset;
        last = Some(rec);
    };
    let state = opt.state();
    Ok(Segment {
        best: state.best.as_ref().map(|(x, f)| (x.iter().copied().collect(), *f)),
        reason,
        evals: state.evals,
        generations: state.generation,
        target_hit_at: opt.target_hit_at(),
        final_mean: state.mean.iter().copied().collect(),
        final_sigma: state.sigma,
    })
}

fn validate(config: &RunConfig) -> Result<(), EngineError> {
    if config.initial_mean.is_empty() {
        return Err(EngineError::Config("initial mean is empty".into()));
    }
    if !(config.sigma0 > 0.0 && config.sigma0.is_finite()) {
        return Err(EngineError::Config(format!("sigma0 = {} must be positive", config.sigma0)));
    }
    config.termination.validate()?;
    StrategyParams::with_overrides(config.dim(), &config.overrides)?;
    Ok(())
}

/// A single run until one of the termination criteria fires.
pub fn run<O: Objective + ?Sized>(config: &RunConfig, objective: &O) -> Result<RunResult, EngineError> {
    run_with_restarts(
        config,
        &RestartPolicy {
            max_restarts: 0,
            ..RestartPolicy::default()
        },
        objective,
    )
}

/// Runs, restarting with `λ ← multiplier · λ` after every termination that
/// is neither the target nor the budget.
pub fn run_with_restarts<O: Objective + ?Sized>(
    config: &RunConfig,
    policy: &RestartPolicy,
    objective: &O,
) -> Result<RunResult, EngineError> {
    validate(config)?;
    if policy.lambda_multiplier == 0 {
        return Err(EngineError::Config("lambda multiplier must be positive".into()));
    }
    if let Some((lo, hi)) = policy.bounds {
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(EngineError::Config(format!("invalid restart bounds [{lo}, {hi}]")));
        }
    }
    let n = config.dim();
    let mut lambda = config.overrides.lambda.unwrap_or_else(|| default_lambda(n));
    let mut trace = Vec::new();
    let mut lambdas = Vec::new();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut evals = 0;
    let mut generations = 0;
    let mut evals_to_target = None;
    let mut restart = 0u64;
    loop {
        let mean = match (restart, policy.bounds) {
            (0, _) | (_, None) => config.initial_mean.clone(),
            (k, Some((lo, hi))) => {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(u64::MAX - k);
                (0..n).map(|_| rng.random_range(lo..hi)).collect()
            }
        };
        lambdas.push(lambda);
        let best_f = best.as_ref().map_or(f64::INFINITY, |b| b.1);
        let seg = run_segment(
            config,
            lambda,
            mean,
            restart,
            evals,
            generations,
            best_f,
            objective,
            &mut trace,
        )?;
        if evals_to_target.is_none() {
            evals_to_target = seg.target_hit_at.map(|e| e + evals);
        }
        evals += seg.evals;
        generations += seg.generations;
        if let Some((x, f)) = seg.best {
            if f < best.as_ref().map_or(f64::INFINITY, |b| b.1) {
                best = Some((x, f));
            }
        }
        let done = matches!(seg.reason, TerminationReason::TargetF | TerminationReason::MaxEvals)
            || restart as usize >= policy.max_restarts;
        if done {
            return Ok(RunResult {
                best_f: best.as_ref().map_or(f64::INFINITY, |b| b.1),
                best_x: best.map(|b| b.0),
                reason: seg.reason,
                trace,
                evals,
                generations,
                evals_to_target,
                final_mean: seg.final_mean,
                final_sigma: seg.final_sigma,
                lambdas,
            });
        }
        log::debug!("restart {} after {} ({} evals so far)", restart + 1, seg.reason, evals);
        restart += 1;
        lambda *= policy.lambda_multiplier;
    }
}
