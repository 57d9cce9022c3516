//! Constraint value, estimation variance, mean estimate and its 95% interval.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kriging::KrigingSolution;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.96;

/// Why a confidence interval could not be formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiIssue {
    NegativeVarianceTerm,
    NegativeSigma2Hat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub m_hat: f64,
    pub sigma2_hat: f64,
    pub variance: f64,
    /// `None` when `ci_issue` is set.
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub ci_issue: Option<CiIssue>,
    pub constraint_g: f64,
    pub t: Option<u64>,
    pub j: u64,
}

impl MeanEstimate {
    pub fn ci_valid(&self) -> bool {
        self.ci_issue.is_none()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_len(sol: &KrigingSolution, other: usize, what: &str) -> Result<()> {
    if sol.weights.len() != other {
        return Err(Error::InvalidArgument(format!(
            "{} weights but {other} {what}",
            sol.weights.len()
        )));
    }
    Ok(())
}

/// `g = Σ_i ω_i ρ_ij + μ`.
pub fn constraint_value(sol: &KrigingSolution, target_rho: &[f64]) -> f64 {
    dot(&sol.weights, target_rho) + sol.mu
}

/// `-σ² (Σ_i ω_i ρ_ij - μ)`. May be negative away from the constraint root.
pub fn estimation_variance(sol: &KrigingSolution, target_rho: &[f64], sigma2: f64) -> f64 {
    -sigma2 * (dot(&sol.weights, target_rho) - sol.mu)
}

/// `m̂ = Σ ω_i v_i` with `σ̂² = Σ ω_i v_i² - m̂²` and the interval
/// `m̂ ± 1.96 √variance`. A negative variance term or a negative `σ̂²`
/// leaves `m̂` intact and marks the interval invalid.
pub fn mean_estimate(
    sol: &KrigingSolution,
    values: &[f64],
    target_rho: &[f64],
) -> Result<MeanEstimate> {
    check_len(sol, values.len(), "values")?;
    check_len(sol, target_rho.len(), "target entries")?;

    let m_hat = dot(&sol.weights, values);
    let second: f64 = sol.weights.iter().zip(values).map(|(w, v)| w * v * v).sum();
    let sigma2_hat = second - m_hat * m_hat;
    let variance = estimation_variance(sol, target_rho, sigma2_hat);

    let ci_issue = if sigma2_hat < 0.0 {
        Some(CiIssue::NegativeSigma2Hat)
    } else if variance < 0.0 || !variance.is_finite() {
        Some(CiIssue::NegativeVarianceTerm)
    } else {
        None
    };
    let (ci_low, ci_high) = match ci_issue {
        None => {
            let half = Z_95 * variance.max(0.0).sqrt();
            (Some(m_hat - half), Some(m_hat + half))
        }
        Some(_) => (None, None),
    };

    Ok(MeanEstimate {
        m_hat,
        sigma2_hat,
        variance,
        ci_low,
        ci_high,
        ci_issue,
        constraint_g: constraint_value(sol, target_rho),
        t: sol.t,
        j: sol.j,
    })
}
