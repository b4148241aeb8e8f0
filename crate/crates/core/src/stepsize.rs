//! Step-size controllers.
//!
//! Two-point adaptation compares the objective at two test points placed
//! symmetrically about the new mean, along the realized mean shift, and
//! smooths the resulting increase/decrease signal. Cumulative step-size
//! adaptation is provided as the baseline controller.

use nalgebra::{DMatrix, DVector};

use crate::params::StrategyParams;

/// Smoothed step-size signal α_s. Starts at zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TpaState {
    pub alpha_s: f64,
}

/// Result of one two-point update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TpaUpdate {
    pub state: TpaState,
    /// The raw decision α_act of this generation.
    pub alpha_act: f64,
    /// Factor to apply to σ, `exp(α_s′)`.
    pub sigma_multiplier: f64,
    /// Both test evaluations were non-finite; the decrease branch was taken.
    pub uninformative: bool,
}

/// Switches that turn the two-point rule into the older asymmetric scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LegacyFlags {
    /// The minus point sits at `−α′/(1+α′)` instead of `−α′`.
    pub asymmetric_minus_point: bool,
    /// The mean is moved with the updated σ, after the σ update.
    pub mean_uses_new_sigma: bool,
}

impl LegacyFlags {
    pub fn is_legacy(&self) -> bool {
        self.asymmetric_minus_point || self.mean_uses_new_sigma
    }
}

/// `(m + α′σ⟨y⟩, m − α′σ⟨y⟩)` about the already updated mean.
pub fn tpa_test_points(
    mean: &DVector<f64>,
    sigma: f64,
    mean_step: &DVector<f64>,
    alpha_test: f64,
) -> (DVector<f64>, DVector<f64>) {
    tpa_test_points_with(mean, sigma, mean_step, alpha_test, LegacyFlags::default())
}

/// Test points honouring the legacy minus-point placement.
pub fn tpa_test_points_with(
    mean: &DVector<f64>,
    sigma: f64,
    mean_step: &DVector<f64>,
    alpha_test: f64,
    flags: LegacyFlags,
) -> (DVector<f64>, DVector<f64>) {
    let minus_coeff = if flags.asymmetric_minus_point {
        alpha_test / (1.0 + alpha_test)
    } else {
        alpha_test
    };
    let plus = mean + mean_step * (alpha_test * sigma);
    let minus = mean - mean_step * (minus_coeff * sigma);
    (plus, minus)
}

/// Decision and smoothing from the two test values.
///
/// Only a strictly smaller `f_minus` selects the decrease branch `−α + β`;
/// ties increase. If both values are non-finite the decrease branch is taken
/// and the result is flagged.
pub fn tpa_update(state: TpaState, f_plus: f64, f_minus: f64, params: &StrategyParams) -> TpaUpdate {
    let alpha = params.alpha_change;
    let decrease = -alpha + params.beta_bias;
    let uninformative = !f_plus.is_finite() && !f_minus.is_finite();
    let alpha_act = if uninformative || f_minus < f_plus {
        decrease
    } else {
        alpha
    };
    let alpha_s = (1.0 - params.c_alpha) * state.alpha_s + params.c_alpha * alpha_act;
    TpaUpdate {
        state: TpaState { alpha_s },
        alpha_act,
        sigma_multiplier: alpha_s.exp(),
        uninformative,
    }
}

/// Constants of the older two-point scheme: α′ = 0.8, α = ln 1.8, β = 0,
/// c_α = 1, asymmetric minus point, mean moved with the new σ.
pub fn salomon_legacy_params(base: &StrategyParams) -> (StrategyParams, LegacyFlags) {
    let params = StrategyParams {
        alpha_test: 0.8,
        alpha_change: 1.8f64.ln(),
        beta_bias: 0.0,
        c_alpha: 1.0,
        ..base.clone()
    };
    let flags = LegacyFlags {
        asymmetric_minus_point: true,
        mean_uses_new_sigma: true,
    };
    (params, flags)
}

/// Constants of cumulative step-size adaptation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsaParams {
    pub c_sigma: f64,
    pub d_sigma: f64,
    /// Expected length of an `n`-dimensional standard normal vector.
    pub chi_n: f64,
}

impl CsaParams {
    pub fn defaults(params: &StrategyParams) -> Self {
        let n = params.n as f64;
        let mu_w = params.mu_w;
        let c_sigma = (mu_w + 2.0) / (n + mu_w + 3.0);
        let d_sigma = 1.0 + 2.0 * (((mu_w - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        CsaParams {
            c_sigma,
            d_sigma,
            chi_n: expected_norm(params.n),
        }
    }

    /// Stall rule for the covariance path in CSA mode.
    ///
    /// `generation` is 1 on the first update.
    pub fn path_indicator(&self, p_sigma: &DVector<f64>, generation: u64, n: usize) -> f64 {
        let decay = 1.0 - (1.0 - self.c_sigma).powf(2.0 * generation as f64);
        let lhs = p_sigma.norm() / decay.sqrt();
        if lhs < (1.4 + 2.0 / (n as f64 + 1.0)) * self.chi_n {
            1.0
        } else {
            0.0
        }
    }
}

/// `√n (1 − 1/(4n) + 1/(21n²))`.
pub fn expected_norm(n: usize) -> f64 {
    let n = n as f64;
    n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n))
}

/// Conjugate evolution path p_σ. Starts at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CsaState {
    pub p_sigma: DVector<f64>,
}

impl CsaState {
    pub fn new(n: usize) -> Self {
        CsaState {
            p_sigma: DVector::zeros(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsaUpdate {
    pub state: CsaState,
    pub sigma_multiplier: f64,
}

/// Path update with the whitened mean shift `C^{-1/2}⟨y⟩`, then
/// `σ ← σ exp((c_σ/d_σ)(‖p_σ‖/χ̂_n − 1))`.
pub fn csa_update(
    state: &CsaState,
    mean_step: &DVector<f64>,
    inv_sqrt: &DMatrix<f64>,
    mu_w: f64,
    csa: &CsaParams,
) -> CsaUpdate {
    let c = csa.c_sigma;
    let coeff = (c * (2.0 - c) * mu_w).sqrt();
    let p_sigma = &state.p_sigma * (1.0 - c) + inv_sqrt * mean_step * coeff;
    let sigma_multiplier = ((c / csa.d_sigma) * (p_sigma.norm() / csa.chi_n - 1.0)).exp();
    CsaUpdate {
        state: CsaState { p_sigma },
        sigma_multiplier,
    }
}
