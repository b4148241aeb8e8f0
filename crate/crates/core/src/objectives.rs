//! Benchmark functions and the objective abstraction used by the optimizer.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

/// Something to minimize.
///
/// `rng` is a stream reserved for objective noise; deterministic objectives
/// ignore it.
pub trait Objective {
    fn evaluate(&self, x: &[f64], rng: &mut dyn RngCore) -> f64;
}

impl<F> Objective for F
where
    F: Fn(&[f64]) -> f64,
{
    fn evaluate(&self, x: &[f64], _rng: &mut dyn RngCore) -> f64 {
        self(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObjectiveKind {
    Sphere,
    Ellipsoid,
    Rosenbrock,
    Rastrigin,
    NoisySphere,
    RandomFitness,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 6] = [
        ObjectiveKind::Sphere,
        ObjectiveKind::Ellipsoid,
        ObjectiveKind::Rosenbrock,
        ObjectiveKind::Rastrigin,
        ObjectiveKind::NoisySphere,
        ObjectiveKind::RandomFitness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObjectiveKind::Sphere => "sphere",
            ObjectiveKind::Ellipsoid => "ellipsoid",
            ObjectiveKind::Rosenbrock => "rosenbrock",
            ObjectiveKind::Rastrigin => "rastrigin",
            ObjectiveKind::NoisySphere => "noisy_sphere",
            ObjectiveKind::RandomFitness => "random_fitness",
        }
    }

    pub fn is_noisy(self) -> bool {
        matches!(self, ObjectiveKind::NoisySphere | ObjectiveKind::RandomFitness)
    }

    /// Target value used by the benchmark runner when none is given.
    pub fn default_target(self) -> Option<f64> {
        match self {
            ObjectiveKind::Sphere | ObjectiveKind::Ellipsoid => Some(1e-9),
            ObjectiveKind::Rosenbrock => Some(1e-6),
            ObjectiveKind::Rastrigin => Some(1e-8),
            ObjectiveKind::NoisySphere | ObjectiveKind::RandomFitness => None,
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObjectiveKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ObjectiveKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = ObjectiveKind::ALL.iter().map(|k| k.name()).collect();
                format!("unknown objective `{s}` (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveSpec {
    pub kind: ObjectiveKind,
    pub n: usize,
    /// Relative noise strength, `noisy_sphere` only.
    pub noise_level: f64,
    /// Condition number, `ellipsoid` only.
    pub condition: f64,
}

impl ObjectiveSpec {
    pub fn new(kind: ObjectiveKind, n: usize) -> Self {
        ObjectiveSpec {
            kind,
            n,
            noise_level: 1.0,
            condition: 1e6,
        }
    }

    pub fn with_noise(mut self, noise_level: f64) -> Self {
        self.noise_level = noise_level;
        self
    }

    pub fn with_condition(mut self, condition: f64) -> Self {
        self.condition = condition;
        self
    }

    /// Value without the noise term. For `random_fitness` this is 0.
    pub fn noiseless(&self, x: &[f64]) -> f64 {
        match self.kind {
            ObjectiveKind::Sphere | ObjectiveKind::NoisySphere => sphere(x),
            ObjectiveKind::Ellipsoid => ellipsoid(x, self.condition),
            ObjectiveKind::Rosenbrock => rosenbrock(x),
            ObjectiveKind::Rastrigin => rastrigin(x),
            ObjectiveKind::RandomFitness => 0.0,
        }
    }
}

impl Objective for ObjectiveSpec {
    fn evaluate(&self, x: &[f64], rng: &mut dyn RngCore) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        match self.kind {
            ObjectiveKind::NoisySphere => {
                let noise: f64 = rng.sample(StandardNormal);
                sphere(x) * (1.0 + self.noise_level * noise)
            }
            ObjectiveKind::RandomFitness => rng.random::<f64>(),
            _ => self.noiseless(x),
        }
    }
}

pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// `Σ condition^((i−1)/(n−1)) x_i²`.
pub fn ellipsoid(x: &[f64], condition: f64) -> f64 {
    let n = x.len();
    if n == 1 {
        return x[0] * x[0];
    }
    x.iter()
        .enumerate()
        .map(|(i, v)| condition.powf(i as f64 / (n - 1) as f64) * v * v)
        .sum()
}

pub fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
        .sum()
}

pub fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64
        + x.iter()
            .map(|v| v * v - 10.0 * (2.0 * PI * v).cos())
            .sum::<f64>()
}
