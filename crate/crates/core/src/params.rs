//! Strategy constants: population size, recombination weights, learning
//! rates and the two-point adaptation constants.

use std::fmt;

use thiserror::Error;

/// Errors raised while deriving or validating strategy constants.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("population size must be at least 2, got {0}")]
    PopulationTooSmall(usize),
    #[error("parent number must be at least 1 (lambda = {lambda}, mu' = {mu_prime})")]
    NoParents { lambda: usize, mu_prime: f64 },
    #[error("recombination weight {index} is not positive (mu' = {mu_prime}, mu = {mu})")]
    NonPositiveWeight {
        index: usize,
        mu_prime: f64,
        mu: usize,
    },
    #[error("weights must not be empty")]
    EmptyWeights,
    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("c_1 + c_mu = {0} exceeds 1")]
    LearningRatesTooLarge(f64),
}

/// How μ′ is derived from λ.
///
/// The boxed defaults use `λ/2`; the parameter discussion mentions `(λ−1)/2`.
/// Both are available, `Half` is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MuPrimeRule {
    #[default]
    Half,
    HalfMinusOne,
}

impl MuPrimeRule {
    pub fn mu_prime(self, lambda: usize) -> f64 {
        match self {
            MuPrimeRule::Half => lambda as f64 / 2.0,
            MuPrimeRule::HalfMinusOne => (lambda as f64 - 1.0) / 2.0,
        }
    }
}

impl fmt::Display for MuPrimeRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MuPrimeRule::Half => f.write_str("half"),
            MuPrimeRule::HalfMinusOne => f.write_str("half_minus"),
        }
    }
}

/// Optional replacements for any derived constant.
///
/// Overrides are validated, never clamped.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamOverrides {
    pub lambda: Option<usize>,
    pub mu_prime_rule: MuPrimeRule,
    pub c_c: Option<f64>,
    pub mu_cov: Option<f64>,
    pub c_1: Option<f64>,
    pub c_mu: Option<f64>,
    pub alpha_test: Option<f64>,
    pub alpha_change: Option<f64>,
    pub beta_bias: Option<f64>,
    pub c_alpha: Option<f64>,
}

/// All constants of one run. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyParams {
    pub n: usize,
    pub lambda: usize,
    pub mu_prime: f64,
    pub mu: usize,
    pub weights: Vec<f64>,
    pub mu_w: f64,
    /// Cumulation constant of the covariance evolution path.
    pub c_c: f64,
    pub mu_cov: f64,
    /// Rank-one learning rate.
    pub c_1: f64,
    /// Rank-μ learning rate.
    pub c_mu: f64,
    /// Test width α′ of the two-point evaluations.
    pub alpha_test: f64,
    /// Change factor α.
    pub alpha_change: f64,
    /// Update bias β, subtracted from the decrease branch.
    pub beta_bias: f64,
    /// Smoothing constant c_α.
    pub c_alpha: f64,
}

/// Default population size `4 + ⌊3 ln n⌋`.
pub fn default_lambda(n: usize) -> usize {
    4 + (3.0 * (n as f64).ln()).floor() as usize
}

/// Nearest integer to `mu_prime`, ties going to the smaller value.
fn round_half_down(mu_prime: f64) -> usize {
    let r = (mu_prime - 0.5).ceil();
    if r <= 0.0 {
        0
    } else {
        r as usize
    }
}

/// Log-linear recombination weights, normalized to sum to one.
pub fn compute_weights(mu_prime: f64, mu: usize) -> Result<Vec<f64>, ParamError> {
    if mu == 0 {
        return Err(ParamError::EmptyWeights);
    }
    let top = (mu_prime + 0.5).ln();
    let raw: Vec<f64> = (1..=mu).map(|i| top - (i as f64).ln()).collect();
    if let Some(index) = raw.iter().position(|&w| !(w > 0.0)) {
        return Err(ParamError::NonPositiveWeight {
            index: index + 1,
            mu_prime,
            mu,
        });
    }
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / total).collect())
}

/// Variance effective selection mass `(Σw)² / Σw²`.
pub fn variance_effective_mass(weights: &[f64]) -> Result<f64, ParamError> {
    if weights.is_empty() {
        return Err(ParamError::EmptyWeights);
    }
    let sum: f64 = weights.iter().sum();
    let sum_sq: f64 = weights.iter().map(|w| w * w).sum();
    Ok(sum * sum / sum_sq)
}

/// Rank-one learning rate for dimension `n` and mixing number `mu_cov`.
pub fn rank_one_rate(n: usize, mu_cov: f64) -> f64 {
    let n = n as f64;
    2.0 / ((n + 1.3).powi(2) + mu_cov)
}

/// Rank-μ learning rate, capped at `1 − c_1`.
pub fn rank_mu_rate(n: usize, mu_cov: f64, c_1: f64) -> f64 {
    let nf = n as f64;
    let raw = 2.0 * (mu_cov - 2.0 + 1.0 / mu_cov) / ((nf + 2.0).powi(2) + mu_cov);
    raw.min(1.0 - c_1)
}

fn check(name: &'static str, value: f64, ok: bool, range: &'static str) -> Result<(), ParamError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(ParamError::OutOfRange { name, value, range })
    }
}

impl StrategyParams {
    /// Defaults for dimension `n`, optionally with a fixed population size.
    pub fn default_for(n: usize, lambda: Option<usize>) -> Result<Self, ParamError> {
        Self::with_overrides(
            n,
            &ParamOverrides {
                lambda,
                ..ParamOverrides::default()
            },
        )
    }

    pub fn with_overrides(n: usize, ov: &ParamOverrides) -> Result<Self, ParamError> {
        if n == 0 {
            return Err(ParamError::ZeroDimension);
        }
        let lambda = ov.lambda.unwrap_or_else(|| default_lambda(n));
        if lambda < 2 {
            return Err(ParamError::PopulationTooSmall(lambda));
        }
        let mu_prime = ov.mu_prime_rule.mu_prime(lambda);
        let mut mu = round_half_down(mu_prime);
        while mu > 0 && (mu_prime + 0.5).ln() - (mu as f64).ln() <= 0.0 {
            mu -= 1;
        }
        if mu == 0 {
            return Err(ParamError::NoParents { lambda, mu_prime });
        }
        let weights = compute_weights(mu_prime, mu)?;
        let mu_w = variance_effective_mass(&weights)?;
        let mu_cov = ov.mu_cov.unwrap_or(mu_w);
        let c_1 = ov.c_1.unwrap_or_else(|| rank_one_rate(n, mu_cov));
        let c_mu = ov.c_mu.unwrap_or_else(|| rank_mu_rate(n, mu_cov, c_1));
        let params = StrategyParams {
            n,
            lambda,
            mu_prime,
            mu,
            weights,
            mu_w,
            c_c: ov.c_c.unwrap_or(4.0 / (n as f64 + 4.0)),
            mu_cov,
            c_1,
            c_mu,
            alpha_test: ov.alpha_test.unwrap_or(0.5),
            alpha_change: ov.alpha_change.unwrap_or(0.5),
            beta_bias: ov.beta_bias.unwrap_or(0.0),
            c_alpha: ov.c_alpha.unwrap_or(0.3),
        };
        params.validate()?;
        Ok(params)
    }

    /// Checks every range constraint on the constants.
    pub fn validate(&self) -> Result<(), ParamError> {
        if self.n == 0 {
            return Err(ParamError::ZeroDimension);
        }
        if self.lambda < 2 {
            return Err(ParamError::PopulationTooSmall(self.lambda));
        }
        if self.mu == 0 || self.mu > self.lambda || self.weights.len() != self.mu {
            return Err(ParamError::NoParents {
                lambda: self.lambda,
                mu_prime: self.mu_prime,
            });
        }
        check("c_c", self.c_c, self.c_c > 0.0 && self.c_c <= 1.0, "(0, 1]")?;
        check("mu_cov", self.mu_cov, self.mu_cov >= 1.0, "[1, inf)")?;
        check("c_1", self.c_1, (0.0..1.0).contains(&self.c_1), "[0, 1)")?;
        check("c_mu", self.c_mu, (0.0..1.0).contains(&self.c_mu), "[0, 1)")?;
        if self.c_1 + self.c_mu > 1.0 {
            return Err(ParamError::LearningRatesTooLarge(self.c_1 + self.c_mu));
        }
        check("alpha_test", self.alpha_test, self.alpha_test > 0.0, "(0, inf)")?;
        // Zero is allowed and freezes the step-size.
        check("alpha_change", self.alpha_change, self.alpha_change >= 0.0, "[0, inf)")?;
        check("beta_bias", self.beta_bias, self.beta_bias >= 0.0, "[0, inf)")?;
        check("c_alpha", self.c_alpha, self.c_alpha > 0.0 && self.c_alpha <= 1.0, "(0, 1]")?;
        Ok(())
    }

    /// One `key=value` pair per constant, used in run headers.
    pub fn describe(&self) -> Vec<(&'static str, String)> {
        vec![
            ("n", self.n.to_string()),
            ("lambda", self.lambda.to_string()),
            ("mu_prime", self.mu_prime.to_string()),
            ("mu", self.mu.to_string()),
            ("mu_w", self.mu_w.to_string()),
            ("c_c", self.c_c.to_string()),
            ("mu_cov", self.mu_cov.to_string()),
            ("c_1", self.c_1.to_string()),
            ("c_mu", self.c_mu.to_string()),
            ("alpha_test", self.alpha_test.to_string()),
            ("alpha_change", self.alpha_change.to_string()),
            ("beta_bias", self.beta_bias.to_string()),
            ("c_alpha", self.c_alpha.to_string()),
        ]
    }
}
