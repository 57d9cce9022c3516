//! Synthetic stationary Gaussian series and a coverage harness for the
//! estimator.
//!
//! The generator uses a valid positive-definite correlation (Gaussian decay
//! or white noise). The negative correlation function used by the kriging
//! system is not positive semidefinite and cannot drive a Gaussian field, so
//! the harness exercises the estimator on fields it was not derived from.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::TimeSeries;
use crate::pipeline::{self, PipelineConfig};

/// Diagonal jitter, relative to `sigma2`, added before factoring the
/// Gaussian-decay covariance. Its eigenvalues decay faster than double
/// precision can resolve.
pub const JITTER: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorrModel {
    /// `exp(-(h/a)²)`.
    GaussianDecay { a: f64 },
    WhiteNoise,
}

impl CorrModel {
    pub fn correlation(&self, lag: usize) -> f64 {
        match *self {
            CorrModel::GaussianDecay { a } => {
                let x = lag as f64 / a;
                (-x * x).exp()
            }
            CorrModel::WhiteNoise => {
                if lag == 0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub mean: f64,
    pub sigma2: f64,
    pub corr_model: CorrModel,
    pub seed: u64,
}

fn validate(spec: &SyntheticSpec) -> Result<()> {
    if spec.n < crate::ingest::MIN_LEN {
        return Err(Error::TooShort { n: spec.n });
    }
    if !(spec.sigma2 > 0.0) || !spec.mean.is_finite() {
        return Err(Error::InvalidArgument(
            "sigma2 must be positive and mean finite".into(),
        ));
    }
    if let CorrModel::GaussianDecay { a } = spec.corr_model {
        if !(a > 0.0) {
            return Err(Error::InvalidArgument("decay length must be positive".into()));
        }
    }
    Ok(())
}

fn draw(spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> Result<TimeSeries> {
    let n = spec.n;
    let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    let values = match spec.corr_model {
        CorrModel::WhiteNoise => {
            let sd = spec.sigma2.sqrt();
            z.iter().map(|zi| spec.mean + sd * zi).collect()
        }
        model @ CorrModel::GaussianDecay { .. } => {
            let cov = DMatrix::from_fn(n, n, |i, k| {
                let c = spec.sigma2 * model.correlation(i.abs_diff(k));
                if i == k {
                    c + JITTER * spec.sigma2
                } else {
                    c
                }
            });
            let chol = cov.cholesky().ok_or(Error::NotPositiveDefinite)?;
            let x = chol.l() * nalgebra::DVector::from_vec(z);
            x.iter().map(|xi| spec.mean + xi).collect()
        }
    };
    TimeSeries::new(values)
}

/// One draw with the given mean and covariance, reproducible from the seed.
pub fn generate_series(spec: &SyntheticSpec) -> Result<TimeSeries> {
    validate(spec)?;
    draw(spec, &mut ChaCha8Rng::seed_from_u64(spec.seed))
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64 + 1);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub sample_mean: f64,
    pub theta: Option<f64>,
    pub t: Option<u64>,
    pub j: Option<u64>,
    pub m_hat: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub trials: usize,
    pub accepted_trials: usize,
    pub no_root_trials: usize,
    pub failed_trials: usize,
    /// Mean of `m̂ - mean` over accepted trials.
    pub bias: Option<f64>,
    pub rmse: Option<f64>,
    pub ci_valid_trials: usize,
    pub ci_coverage_fraction: Option<f64>,
    /// The plain sample average over all trials, for comparison.
    pub baseline_bias: f64,
    pub baseline_rmse: f64,
}

fn run_trial(spec: &SyntheticSpec, cfg: &PipelineConfig, trial: usize) -> TrialOutcome {
    let mut outcome = TrialOutcome {
        trial,
        sample_mean: f64::NAN,
        theta: None,
        t: None,
        j: None,
        m_hat: None,
        ci_low: None,
        ci_high: None,
        error: None,
    };
    let ts = match draw(spec, &mut trial_rng(spec.seed, trial)) {
        Ok(ts) => ts,
        Err(e) => {
            outcome.error = Some(e.to_string());
            return outcome;
        }
    };
    outcome.sample_mean = ts.values().iter().sum::<f64>() / ts.len() as f64;
    match pipeline::run(&ts, cfg) {
        Ok(out) => {
            outcome.theta = Some(out.fit.theta);
            if let Some(acc) = out.scan.accepted {
                outcome.t = Some(acc.t);
                outcome.j = Some(acc.j);
                outcome.m_hat = Some(acc.estimate.m_hat);
                outcome.ci_low = acc.estimate.ci_low;
                outcome.ci_high = acc.estimate.ci_high;
            }
        }
        Err(e) => outcome.error = Some(e.to_string()),
    }
    outcome
}

/// Run the pipeline on `trials` independent draws. Per-trial streams are
/// derived from `spec.seed`, so the outcomes do not depend on scheduling.
pub fn run_trials(
    spec: &SyntheticSpec,
    trials: usize,
    cfg: &PipelineConfig,
) -> Result<Vec<TrialOutcome>> {
    validate(spec)?;
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    Ok((0..trials)
        .into_par_iter()
        .map(|i| run_trial(spec, cfg, i))
        .collect())
}

pub fn summarize(spec: &SyntheticSpec, outcomes: &[TrialOutcome]) -> CoverageReport {
    let mean = spec.mean;
    let failed = outcomes.iter().filter(|o| o.error.is_some()).count();
    let errs: Vec<f64> = outcomes
        .iter()
        .filter_map(|o| o.m_hat)
        .map(|m| m - mean)
        .collect();
    let accepted = errs.len();
    let (bias, rmse) = if accepted > 0 {
        let k = accepted as f64;
        (
            Some(errs.iter().sum::<f64>() / k),
            Some((errs.iter().map(|e| e * e).sum::<f64>() / k).sqrt()),
        )
    } else {
        (None, None)
    };

    let cis: Vec<(f64, f64)> = outcomes
        .iter()
        .filter_map(|o| Some((o.ci_low?, o.ci_high?)))
        .collect();
    let covered = cis.iter().filter(|(lo, hi)| *lo <= mean && mean <= *hi).count();
    let coverage = (!cis.is_empty()).then(|| covered as f64 / cis.len() as f64);

    let base: Vec<f64> = outcomes
        .iter()
        .filter(|o| o.sample_mean.is_finite())
        .map(|o| o.sample_mean - mean)
        .collect();
    let kb = base.len().max(1) as f64;

    CoverageReport {
        trials: outcomes.len(),
        accepted_trials: accepted,
        no_root_trials: outcomes.len() - accepted - failed,
        failed_trials: failed,
        bias,
        rmse,
        ci_valid_trials: cis.len(),
        ci_coverage_fraction: coverage,
        baseline_bias: base.iter().sum::<f64>() / kb,
        baseline_rmse: (base.iter().map(|e| e * e).sum::<f64>() / kb).sqrt(),
    }
}

pub const MIN_TRIALS: usize = 100;

/// Bias, RMSE and interval coverage of the full pipeline over `trials`
/// fresh draws. Requires at least [`MIN_TRIALS`] trials.
pub fn coverage_experiment(
    spec: &SyntheticSpec,
    trials: usize,
    cfg: &PipelineConfig,
) -> Result<CoverageReport> {
    if trials < MIN_TRIALS {
        return Err(Error::InvalidArgument(format!(
            "trials = {trials}, at least {MIN_TRIALS} are required"
        )));
    }
    let outcomes = run_trials(spec, trials, cfg)?;
    Ok(summarize(spec, &outcomes))
}
