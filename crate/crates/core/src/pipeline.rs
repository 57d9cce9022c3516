//! End-to-end run: variogram, cutoff, both correlograms, fit of `Θ`, scan.

use serde::{Deserialize, Serialize};

use crate::empirical::{
    correlogram_c1, correlogram_c2, monotone_cutoff, semivariogram, Correlogram,
    EmpiricalVariogram,
};
use crate::error::Result;
use crate::fit::{fit_points, lm_fit_theta, FitOptions, FitResult, Pooling};
use crate::ingest::TimeSeries;
use crate::scan::{scan, ScanConfig, ScanResult};

#[derive(Debug, Clone)]
pub struct Variography {
    pub variogram: EmpiricalVariogram,
    pub cutoff: usize,
    pub c1: Correlogram,
    pub c2: Correlogram,
}

/// Variogram, cutoff `d` and both correlograms. The covariance-based
/// correlogram uses `min(d, n-2)`.
pub fn variography(ts: &TimeSeries) -> Result<Variography> {
    let variogram = semivariogram(ts);
    let cutoff = monotone_cutoff(&variogram)?;
    let c1 = correlogram_c1(&variogram, cutoff)?;
    let c2 = correlogram_c2(ts, cutoff.min(ts.len() - 2))?;
    Ok(Variography {
        variogram,
        cutoff,
        c1,
        c2,
    })
}

pub fn fit_theta(v: &Variography, n: usize, pooling: Pooling, opts: &FitOptions) -> Result<FitResult> {
    let points = fit_points(&v.c1, &v.c2, pooling);
    lm_fit_theta(&points, n, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub pooling: Pooling,
    pub fit: FitOptions,
    /// `j_max` is absolute and must exceed the series length.
    pub scan: ScanConfig,
}

impl PipelineConfig {
    pub fn with_defaults(n: usize) -> Self {
        PipelineConfig {
            pooling: Pooling::default(),
            fit: FitOptions::default(),
            scan: ScanConfig::with_defaults(n),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub variography: Variography,
    pub fit: FitResult,
    pub scan: ScanResult,
}

pub fn run(ts: &TimeSeries, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    let variography = variography(ts)?;
    let fit = fit_theta(&variography, ts.len(), cfg.pooling, &cfg.fit)?;
    let scan = scan(ts, fit.theta, &cfg.scan)?;
    Ok(PipelineOutput {
        variography,
        fit,
        scan,
    })
}
