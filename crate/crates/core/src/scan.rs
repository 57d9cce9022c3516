//! Search over the time parameter `t` and the target index `j` for the pair
//! at which the constraint `Σ ω_i ρ_ij + μ = 0` holds numerically.
//!
//! Order is `t = n+1..=n+s_max` outer, `j = n+1..=j_max` inner, both
//! ascending; the first pair that passes the acceptance predicate wins. Rows
//! for several `t` may be evaluated concurrently but acceptance is always
//! resolved in that canonical order, so the result does not depend on the
//! thread count.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{constraint_value, mean_estimate, MeanEstimate};
use crate::ingest::TimeSeries;
use crate::kriging::{KrigingSolution, LuFactors, DEFAULT_PIVOT_TOL};
use crate::model::{bordered_matrix, target_vector, CorrelationModel};

pub const DEFAULT_S_MAX: u64 = 150;
/// Default `j_max - n`.
pub const DEFAULT_J_SPAN: u64 = 350;
pub const DEFAULT_EPSILON: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub s_max: u64,
    /// Largest target index, absolute.
    pub j_max: u64,
    pub epsilon: f64,
    pub require_nonneg_variance: bool,
    /// Accept the smaller-|g| endpoint of a sign change between consecutive
    /// `j` when neither endpoint is within `epsilon`.
    pub sign_change_fallback: bool,
    pub pivot_tol: f64,
}

impl ScanConfig {
    pub fn with_defaults(n: usize) -> Self {
        ScanConfig {
            s_max: DEFAULT_S_MAX,
            j_max: n as u64 + DEFAULT_J_SPAN,
            epsilon: DEFAULT_EPSILON,
            require_nonneg_variance: true,
            sign_change_fallback: false,
            pivot_tol: DEFAULT_PIVOT_TOL,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.s_max < 1 {
            return Err(Error::InvalidArgument("s_max must be at least 1".into()));
        }
        if self.j_max <= n as u64 {
            return Err(Error::InvalidArgument(format!(
                "j_max = {} must exceed n = {n}",
                self.j_max
            )));
        }
        // epsilon = 0 is allowed and simply never accepts.
        if !(self.epsilon >= 0.0) {
            return Err(Error::InvalidArgument("epsilon must be non-negative".into()));
        }
        Ok(())
    }

    /// Acceptance predicate applied to a single `(t, j)` estimate.
    pub fn accepts(&self, e: &MeanEstimate) -> bool {
        e.constraint_g.abs() <= self.epsilon && self.variance_ok(e)
    }

    fn variance_ok(&self, e: &MeanEstimate) -> bool {
        !self.require_nonneg_variance || (e.variance >= 0.0 && e.sigma2_hat >= 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: u64,
    pub j: u64,
    pub g: f64,
    pub m_hat: f64,
    pub sigma2_hat: f64,
    pub variance: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

impl TraceRecord {
    fn from_estimate(t: u64, e: &MeanEstimate) -> Self {
        TraceRecord {
            t,
            j: e.j,
            g: e.constraint_g,
            m_hat: e.m_hat,
            sigma2_hat: e.sigma2_hat,
            variance: e.variance,
            ci_low: e.ci_low,
            ci_high: e.ci_high,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Accepted {
    pub t: u64,
    pub j: u64,
    pub estimate: MeanEstimate,
    /// Accepted through the sign-change fallback rather than the threshold.
    pub via_sign_change: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub n: usize,
    pub theta: f64,
    pub config: ScanConfig,
    pub accepted: Option<Accepted>,
    /// Every visited `(t, j)` in canonical order, ending at the acceptance
    /// point (or covering the full rectangle when nothing was accepted).
    pub trace: Vec<TraceRecord>,
    /// The accepted `m̂`, i.e. the asymptote drawn across all `j`.
    pub classic_value: Option<f64>,
    /// All `j = n+1..=j_max` at the accepted `t`, or at the last `t` visited
    /// when nothing was accepted.
    pub final_row: Vec<TraceRecord>,
}

/// Factored system for one `t`, reusable across target indices.
pub struct ConstraintSolver {
    n: usize,
    model: CorrelationModel,
    lu: LuFactors,
}

impl ConstraintSolver {
    pub fn new(n: usize, theta: f64, t: u64, pivot_tol: f64) -> Result<Self> {
        let model = CorrelationModel::new(theta, t)?;
        let lu = LuFactors::factor(&bordered_matrix(n, &model), n + 1, pivot_tol)
            .map_err(|e| e.at_t(t))?;
        Ok(ConstraintSolver { n, model, lu })
    }

    pub fn model(&self) -> &CorrelationModel {
        &self.model
    }

    /// Solution and `ρ_ij` (without the trailing 1) for target index `j`.
    pub fn solve(&self, j: u64) -> Result<(KrigingSolution, Vec<f64>)> {
        let mut target = target_vector(self.n, j, &self.model);
        let x = self.lu.solve(&target);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem {
                pivot_index: self.n,
                t: Some(self.model.t()),
            });
        }
        target.pop();
        Ok((KrigingSolution::from_vector(x, j, Some(self.model.t())), target))
    }
}

/// `(j, g)` over `j_range` at fixed `t`. Depends only on `n`, `Θ` and `t`.
pub fn g_profile(
    n: usize,
    theta: f64,
    t: u64,
    j_range: RangeInclusive<u64>,
) -> Result<Vec<(u64, f64)>> {
    let solver = ConstraintSolver::new(n, theta, t, DEFAULT_PIVOT_TOL)?;
    j_range
        .map(|j| {
            let (sol, rho) = solver.solve(j)?;
            Ok((j, constraint_value(&sol, &rho)))
        })
        .collect()
}

fn evaluate_row(ts: &TimeSeries, theta: f64, t: u64, cfg: &ScanConfig) -> Result<Vec<MeanEstimate>> {
    let n = ts.len();
    let solver = ConstraintSolver::new(n, theta, t, cfg.pivot_tol)?;
    (n as u64 + 1..=cfg.j_max)
        .map(|j| {
            let (sol, rho) = solver.solve(j)?;
            mean_estimate(&sol, ts.values(), &rho)
        })
        .collect()
}

/// First acceptable index in a row, with the index up to which the row was
/// inspected.
fn find_in_row(row: &[MeanEstimate], cfg: &ScanConfig) -> Option<(usize, usize, bool)> {
    for (idx, e) in row.iter().enumerate() {
        if cfg.accepts(e) {
            return Some((idx, idx, false));
        }
        if cfg.sign_change_fallback && idx > 0 {
            let prev = &row[idx - 1];
            if prev.constraint_g * e.constraint_g < 0.0 {
                let mut ends = [idx - 1, idx];
                if row[idx].constraint_g.abs() < row[idx - 1].constraint_g.abs() {
                    ends.swap(0, 1);
                }
                if let Some(&k) = ends.iter().find(|&&k| cfg.variance_ok(&row[k])) {
                    return Some((k, idx, true));
                }
            }
        }
    }
    None
}

pub fn scan(ts: &TimeSeries, theta: f64, cfg: &ScanConfig) -> Result<ScanResult> {
    let n = ts.len();
    cfg.validate(n)?;
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "theta must be positive and finite, got {theta}"
        )));
    }

    let ts_all: Vec<u64> = (n as u64 + 1..=n as u64 + cfg.s_max).collect();
    let batch = rayon::current_num_threads().max(1);
    let mut trace = Vec::new();
    let mut last_row: Vec<MeanEstimate> = Vec::new();
    let mut last_t = 0;

    for chunk in ts_all.chunks(batch) {
        let rows: Vec<Result<Vec<MeanEstimate>>> = chunk
            .par_iter()
            .map(|&t| evaluate_row(ts, theta, t, cfg))
            .collect();
        for (&t, row) in chunk.iter().zip(rows) {
            let row = row?;
            if let Some((hit, end, via_sign_change)) = find_in_row(&row, cfg) {
                trace.extend(row[..=end].iter().map(|e| TraceRecord::from_estimate(t, e)));
                let estimate = row[hit].clone();
                let final_row = row.iter().map(|e| TraceRecord::from_estimate(t, e)).collect();
                return Ok(ScanResult {
                    n,
                    theta,
                    config: *cfg,
                    classic_value: Some(estimate.m_hat),
                    accepted: Some(Accepted {
                        t,
                        j: estimate.j,
                        estimate,
                        via_sign_change,
                    }),
                    trace,
                    final_row,
                });
            }
            trace.extend(row.iter().map(|e| TraceRecord::from_estimate(t, e)));
            last_row = row;
            last_t = t;
        }
    }

    Ok(ScanResult {
        n,
        theta,
        config: *cfg,
        accepted: None,
        trace,
        classic_value: None,
        final_row: last_row
            .iter()
            .map(|e| TraceRecord::from_estimate(last_t, e))
            .collect(),
    })
}
