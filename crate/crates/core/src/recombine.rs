//! Ranking of evaluated offspring and weighted recombination.

use nalgebra::DVector;
use thiserror::Error;

use crate::sampler::Offspring;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RankError {
    #[error("fitness of offspring {0} is NaN")]
    NaN(usize),
    #[error("{infeasible} of {lambda} offspring are infeasible, at most {allowed} allowed")]
    TooManyInfeasible {
        infeasible: usize,
        lambda: usize,
        allowed: usize,
    },
}

/// Evaluated population with its selection order, best first.
#[derive(Debug, Clone)]
pub struct RankedPopulation {
    pub members: Vec<(Offspring, f64)>,
    /// Indices into `members`, sorted by ascending fitness.
    pub order: Vec<usize>,
}

impl RankedPopulation {
    /// The `i`-th best member (0-based).
    pub fn nth(&self, i: usize) -> &(Offspring, f64) {
        &self.members[self.order[i]]
    }

    pub fn best(&self) -> &(Offspring, f64) {
        self.nth(0)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn fitness_sorted(&self) -> impl Iterator<Item = f64> + '_ {
        self.order.iter().map(move |&i| self.members[i].1)
    }

    pub fn infeasible_count(&self) -> usize {
        self.members.iter().filter(|(_, f)| *f == f64::INFINITY).count()
    }
}

/// Stable ascending sort by fitness. `+inf` marks infeasible points.
pub fn rank(members: Vec<(Offspring, f64)>) -> Result<RankedPopulation, RankError> {
    if let Some(i) = members.iter().position(|(_, f)| f.is_nan()) {
        return Err(RankError::NaN(i));
    }
    let mut order: Vec<usize> = (0..members.len()).collect();
    order.sort_by(|&a, &b| members[a].1.total_cmp(&members[b].1));
    Ok(RankedPopulation { members, order })
}

/// `⟨y⟩ = Σ w_i y_{i:λ}` over the `weights.len()` best members.
pub fn weighted_mean_step(ranked: &RankedPopulation, weights: &[f64]) -> DVector<f64> {
    assert!(weights.len() <= ranked.len(), "more weights than offspring");
    let n = ranked.best().0.y.len();
    weights
        .iter()
        .enumerate()
        .fold(DVector::zeros(n), |acc, (i, w)| acc + &ranked.nth(i).0.y * *w)
}

/// `m + σ ⟨y⟩`.
pub fn update_mean(mean: &DVector<f64>, sigma: f64, mean_step: &DVector<f64>) -> DVector<f64> {
    mean + mean_step * sigma
}

/// `Σ w_i x_{i:λ}`, the candidate-space form of the same update.
pub fn recombine_candidates(ranked: &RankedPopulation, weights: &[f64]) -> DVector<f64> {
    let n = ranked.best().0.x.len();
    weights
        .iter()
        .enumerate()
        .fold(DVector::zeros(n), |acc, (i, w)| acc + &ranked.nth(i).0.x * *w)
}
