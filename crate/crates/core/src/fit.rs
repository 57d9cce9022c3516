//! One-parameter fit of the correlogram model
//! `|ρ(h)| = n^(-Θ (h/n)²) = exp(-Θ (h/n)² ln n)`.
//!
//! The fit itself is a Levenberg–Marquardt iteration in the linear domain.
//! [`log_domain_theta`] is the closed-form least-squares answer after taking
//! logarithms; on noise-free model data the two coincide.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::empirical::Correlogram;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub init_theta: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            init_theta: 1.0,
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub theta: f64,
    pub iterations: usize,
    pub final_sse: f64,
    pub converged: bool,
}

/// How the two experimental correlograms are combined into fit points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    /// Every `(h, r)` of both correlograms enters the fit.
    #[default]
    Pooled,
    /// One point per lag, the mean of the two correlograms where both exist.
    Averaged,
    /// The variogram-based correlogram only.
    First,
    /// The covariance-based correlogram only.
    Second,
}

impl FromStr for Pooling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pooled" => Ok(Pooling::Pooled),
            "averaged" => Ok(Pooling::Averaged),
            "first" | "c1" => Ok(Pooling::First),
            "second" | "c2" => Ok(Pooling::Second),
            other => Err(Error::InvalidArgument(format!("unknown pooling mode {other:?}"))),
        }
    }
}

/// Assemble `(h, |ρ̂(h)|)` fit points for `h = 1..=d` from the two
/// correlograms.
pub fn fit_points(c1: &Correlogram, c2: &Correlogram, pooling: Pooling) -> Vec<(usize, f64)> {
    match pooling {
        Pooling::Pooled => c1.fit_points().chain(c2.fit_points()).collect(),
        Pooling::First => c1.fit_points().collect(),
        Pooling::Second => c2.fit_points().collect(),
        Pooling::Averaged => {
            let max_h = c1.cutoff.max(c2.cutoff);
            (1..=max_h)
                .filter_map(|h| match (c1.rho_abs.get(h), c2.rho_abs.get(h)) {
                    (Some(a), Some(b)) => Some((h, 0.5 * (a + b))),
                    (Some(a), None) | (None, Some(a)) => Some((h, *a)),
                    (None, None) => None,
                })
                .collect()
        }
    }
}

/// Model value `exp(-Θ (h/n)² ln n)`.
#[inline]
pub fn model_abs_rho(h: usize, n: usize, theta: f64) -> f64 {
    (-theta * lag_weight(h, n)).exp()
}

/// `(h/n)² ln n`, the coefficient of `Θ` in the exponent.
#[inline]
fn lag_weight(h: usize, n: usize) -> f64 {
    let x = h as f64 / n as f64;
    x * x * (n as f64).ln()
}

fn sse(points: &[(usize, f64)], n: usize, theta: f64) -> f64 {
    points
        .iter()
        .map(|&(h, r)| {
            let e = r - model_abs_rho(h, n, theta);
            e * e
        })
        .sum()
}

fn informative(points: &[(usize, f64)]) -> Result<Vec<(usize, f64)>> {
    let pts: Vec<_> = points.iter().copied().filter(|&(h, _)| h >= 1).collect();
    if pts.is_empty() {
        return Err(Error::NoInformativePoints);
    }
    if pts.iter().any(|(_, r)| !r.is_finite()) {
        return Err(Error::NonFiniteResidual);
    }
    Ok(pts)
}

/// Least-squares fit of `Θ` by Levenberg–Marquardt.
///
/// Points at `h = 0` are dropped (the model is 1 there for every `Θ`).
/// Damping starts at `1e-3` and moves by a factor of ten on each rejected or
/// accepted step. A step that would make `Θ` non-positive is rejected.
/// `converged` is set once a proposed step is shorter than `tol`.
pub fn lm_fit_theta(points: &[(usize, f64)], n: usize, opts: &FitOptions) -> Result<FitResult> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("n = {n} is below 3")));
    }
    if !(opts.init_theta > 0.0) || !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(
            "init_theta and tol must be positive".into(),
        ));
    }
    let pts = informative(points)?;
    let weights: Vec<f64> = pts.iter().map(|&(h, _)| lag_weight(h, n)).collect();

    let mut theta = opts.init_theta;
    let mut cost = sse(&pts, n, theta);
    if !cost.is_finite() {
        return Err(Error::NonFiniteResidual);
    }
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        // J_k = ∂f/∂Θ = -w_k f_k; normal equations reduce to scalars.
        let (mut jtj, mut jtr) = (0.0, 0.0);
        for (&(_, r), &w) in pts.iter().zip(&weights) {
            let f = (-theta * w).exp();
            let jac = -w * f;
            jtj += jac * jac;
            jtr += jac * (r - f);
        }
        if !jtj.is_finite() || !jtr.is_finite() {
            return Err(Error::NonFiniteResidual);
        }
        if jtj == 0.0 {
            // Model saturated at zero; no direction left to move in.
            break;
        }

        let mut accepted = false;
        while lambda < 1e300 {
            let step = jtr / (jtj * (1.0 + lambda));
            if step.abs() < opts.tol {
                converged = true;
                break;
            }
            let candidate = theta + step;
            let candidate_cost = if candidate > 0.0 {
                sse(&pts, n, candidate)
            } else {
                f64::INFINITY
            };
            if candidate_cost <= cost {
                theta = candidate;
                cost = candidate_cost;
                lambda = (lambda / 10.0).max(1e-300);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            break;
        }
    }

    if !theta.is_finite() || !cost.is_finite() {
        return Err(Error::NonFiniteResidual);
    }
    Ok(FitResult {
        theta,
        iterations,
        final_sse: cost,
        converged,
    })
}

/// Closed-form least squares of `-ln r_k = Θ w_k` with `w_k = (h_k/n)² ln n`:
/// `Θ = Σ w_k (-ln r_k) / Σ w_k²`. Points with `r <= 0` or `h = 0` are
/// dropped.
pub fn log_domain_theta(points: &[(usize, f64)], n: usize) -> Result<f64> {
    let (num, den) = points
        .iter()
        .filter(|&&(h, r)| h >= 1 && r > 0.0 && r.is_finite())
        .map(|&(h, r)| (lag_weight(h, n), r))
        .fold((0.0, 0.0), |(num, den), (w, r)| (num - w * r.ln(), den + w * w));
    if den == 0.0 {
        return Err(Error::NoInformativePoints);
    }
    Ok(num / den)
}
