//! Rank-one and rank-μ covariance matrix adaptation.

use nalgebra::{DMatrix, DVector};

use crate::params::StrategyParams;
use crate::recombine::RankedPopulation;

/// Search covariance `C` and its evolution path `p_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceState {
    pub c: DMatrix<f64>,
    pub p_c: DVector<f64>,
}

impl CovarianceState {
    pub fn new(n: usize) -> Self {
        CovarianceState {
            c: DMatrix::identity(n, n),
            p_c: DVector::zeros(n),
        }
    }
}

/// Threshold on α_s above which the path update is stalled.
pub fn stall_threshold(generation: u64, params: &StrategyParams) -> f64 {
    let keep = 1.0 - params.c_alpha;
    (1.0 - keep.powi(9)) * (1.0 - keep.powf(generation as f64)) * params.alpha_change
}

/// h_σ: 0 while α_s exceeds the threshold, 1 otherwise.
///
/// `generation` is 1 on the first update.
pub fn stall_indicator(alpha_s: f64, generation: u64, params: &StrategyParams) -> f64 {
    if alpha_s > stall_threshold(generation, params) {
        0.0
    } else {
        1.0
    }
}

/// `p_c ← (1−c_c) p_c + h_σ √(c_c(2−c_c)μ_w) ⟨y⟩`.
pub fn update_path(
    p_c: &DVector<f64>,
    mean_step: &DVector<f64>,
    h_sigma: f64,
    params: &StrategyParams,
) -> DVector<f64> {
    let cc = params.c_c;
    let coeff = h_sigma * (cc * (2.0 - cc) * params.mu_w).sqrt();
    p_c * (1.0 - cc) + mean_step * coeff
}

/// `C ← (1−c_1−c_μ) C + c_1 p_c p_cᵀ + c_μ Σ w_i y_{i:λ} y_{i:λ}ᵀ`, re-symmetrized.
///
/// `p_c` must already be this generation's path.
pub fn update_covariance(
    c: &DMatrix<f64>,
    p_c: &DVector<f64>,
    ranked: &RankedPopulation,
    weights: &[f64],
    params: &StrategyParams,
) -> DMatrix<f64> {
    let mut next = c * (1.0 - params.c_1 - params.c_mu);
    next.ger(params.c_1, p_c, p_c, 1.0);
    for (i, w) in weights.iter().enumerate() {
        let y = &ranked.nth(i).0.y;
        next.ger(params.c_mu * w, y, y, 1.0);
    }
    symmetrize(&mut next);
    next
}

/// `C ← (C + Cᵀ)/2`.
pub fn symmetrize(c: &mut DMatrix<f64>) {
    let n = c.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
}

/// Combined update of path and matrix for one generation.
pub fn adapt(
    state: &CovarianceState,
    mean_step: &DVector<f64>,
    h_sigma: f64,
    ranked: &RankedPopulation,
    params: &StrategyParams,
) -> CovarianceState {
    let p_c = update_path(&state.p_c, mean_step, h_sigma, params);
    let c = update_covariance(&state.c, &p_c, ranked, &params.weights, params);
    CovarianceState { c, p_c }
}
