//! Experimental semivariogram, sample covariance and the two experimental
//! correlograms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::TimeSeries;

/// `γ̂(h)` for `h = 0..n-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalVariogram {
    gamma: Vec<f64>,
}

impl EmpiricalVariogram {
    /// Wrap precomputed values. `gamma[0]` must be zero and all entries
    /// non-negative and finite.
    pub fn from_values(gamma: Vec<f64>) -> Result<Self> {
        if gamma.len() < 2 {
            return Err(Error::InvalidArgument(
                "a variogram needs at least lags 0 and 1".into(),
            ));
        }
        if gamma[0] != 0.0 {
            return Err(Error::InvalidArgument("gamma(0) must be 0".into()));
        }
        if gamma.iter().any(|g| !g.is_finite() || *g < 0.0) {
            return Err(Error::InvalidArgument(
                "gamma values must be finite and non-negative".into(),
            ));
        }
        Ok(EmpiricalVariogram { gamma })
    }

    pub fn values(&self) -> &[f64] {
        &self.gamma
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorrelogramKind {
    /// `1 - γ̂(h)/σ̂²` with `σ̂² = γ̂(d)`.
    C1,
    /// `Ĉ(h)/Ĉ(0)`.
    C2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlogram {
    pub kind: CorrelogramKind,
    /// `|ρ̂(h)|` for `h = 0..=cutoff`.
    pub rho_abs: Vec<f64>,
    pub cutoff: usize,
    /// `γ̂(d)`; only meaningful for [`CorrelogramKind::C1`].
    pub sigma2_hat: Option<f64>,
}

impl Correlogram {
    /// `(h, |ρ̂(h)|)` for `h = 1..=cutoff`.
    pub fn fit_points(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.rho_abs.iter().copied().enumerate().skip(1)
    }
}

/// `γ̂(h) = 1/(2(n-h)) Σ_{j=1}^{n-h} (v_j - v_{j+h})²`.
pub fn semivariogram(ts: &TimeSeries) -> EmpiricalVariogram {
    let v = ts.values();
    let n = v.len();
    let mut gamma = Vec::with_capacity(n);
    gamma.push(0.0);
    for h in 1..n {
        let sum: f64 = v.iter().zip(&v[h..]).map(|(a, b)| (a - b) * (a - b)).sum();
        gamma.push(0.5 * sum / (n - h) as f64);
    }
    EmpiricalVariogram { gamma }
}

/// Largest `d` such that `γ̂(0..=d)` is non-decreasing; ties continue the
/// run.
pub fn monotone_cutoff(vg: &EmpiricalVariogram) -> Result<usize> {
    let g = vg.values();
    if g.len() < 2 || g[1] <= 0.0 {
        return Err(Error::DegenerateVariogram("gamma(1) is zero"));
    }
    let descent = g.windows(2).skip(1).position(|w| w[1] < w[0]);
    Ok(match descent {
        Some(k) => k + 1,
        None => g.len() - 1,
    })
}

pub fn correlogram_c1(vg: &EmpiricalVariogram, d: usize) -> Result<Correlogram> {
    let g = vg.values();
    if d == 0 || d >= g.len() {
        return Err(Error::LagOutOfRange {
            lag: d,
            max: g.len().saturating_sub(1),
        });
    }
    let sigma2 = g[d];
    if sigma2 <= 0.0 {
        return Err(Error::DegenerateVariogram("gamma(d) is zero"));
    }
    let mut rho_abs: Vec<f64> = g[..=d].iter().map(|gh| 1.0 - gh / sigma2).collect();
    // Pin the endpoints against rounding.
    rho_abs[0] = 1.0;
    rho_abs[d] = 0.0;
    Ok(Correlogram {
        kind: CorrelogramKind::C1,
        rho_abs,
        cutoff: d,
        sigma2_hat: Some(sigma2),
    })
}

/// `Ĉ(h) = 1/(n-h) Σ v_j v_{j+h} - 1/(n-h)² (Σ v_j)(Σ v_{j+h})` over the
/// `n-h` overlapping pairs. Defined for `0 <= h <= n-2`.
pub fn covariance_hat(ts: &TimeSeries, h: usize) -> Result<f64> {
    let v = ts.values();
    let n = v.len();
    if h + 2 > n {
        return Err(Error::LagOutOfRange {
            lag: h,
            max: n - 2,
        });
    }
    let m = (n - h) as f64;
    let head = &v[..n - h];
    let tail = &v[h..];
    let cross: f64 = head.iter().zip(tail).map(|(a, b)| a * b).sum();
    let sum_head: f64 = head.iter().sum();
    let sum_tail: f64 = tail.iter().sum();
    Ok(cross / m - sum_head * sum_tail / (m * m))
}

/// `Ĉ(h)/Ĉ(0)` for `h = 0..=d`. The caller clamps `d` to `n-2`.
pub fn correlogram_c2(ts: &TimeSeries, d: usize) -> Result<Correlogram> {
    let n = ts.len();
    if d + 2 > n {
        return Err(Error::LagOutOfRange {
            lag: d,
            max: n - 2,
        });
    }
    let c0 = covariance_hat(ts, 0)?;
    if !(c0 > 0.0) {
        return Err(Error::DegenerateVariogram("sample variance is zero"));
    }
    let mut rho_abs = Vec::with_capacity(d + 1);
    rho_abs.push(1.0);
    for h in 1..=d {
        rho_abs.push(covariance_hat(ts, h)? / c0);
    }
    Ok(Correlogram {
        kind: CorrelogramKind::C2,
        rho_abs,
        cutoff: d,
        sigma2_hat: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    #[test]
    fn semivariogram_hand_values() {
        let vg = semivariogram(&ts(&[1.0, 2.0, 4.0]));
        assert_eq!(vg.values(), &[0.0, 1.25, 4.5]);
        let flat = semivariogram(&ts(&[5.0; 4]));
        assert_eq!(flat.values(), &[0.0; 4]);
    }

    #[test]
    fn cutoff_cases() {
        let vg = EmpiricalVariogram::from_values(vec![0.0, 1.25, 4.5]).unwrap();
        assert_eq!(monotone_cutoff(&vg).unwrap(), 2);
        let vg = EmpiricalVariogram::from_values(vec![0.0, 1.0, 3.0, 2.0, 5.0]).unwrap();
        assert_eq!(monotone_cutoff(&vg).unwrap(), 2);
        let vg = EmpiricalVariogram::from_values(vec![0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            monotone_cutoff(&vg),
            Err(Error::DegenerateVariogram(_))
        ));
    }

    #[test]
    fn cutoff_tie_continues() {
        let vg = EmpiricalVariogram::from_values(vec![0.0, 1.0, 1.0, 2.0, 1.5]).unwrap();
        assert_eq!(monotone_cutoff(&vg).unwrap(), 3);
    }

    #[test]
    fn c1_hand_values() {
        let vg = EmpiricalVariogram::from_values(vec![0.0, 1.25, 4.5]).unwrap();
        let c = correlogram_c1(&vg, 2).unwrap();
        assert_eq!(c.kind, CorrelogramKind::C1);
        assert_eq!(c.rho_abs[0], 1.0);
        assert!((c.rho_abs[1] - (1.0 - 1.25 / 4.5)).abs() < 1e-15);
        assert_eq!(c.rho_abs[2], 0.0);
        assert_eq!(c.sigma2_hat, Some(4.5));
    }

    #[test]
    fn covariance_hand_values() {
        let s = ts(&[1.0, 2.0, 4.0]);
        assert!((covariance_hat(&s, 1).unwrap() - 0.5).abs() < 1e-12);
        assert!((covariance_hat(&s, 0).unwrap() - 14.0 / 9.0).abs() < 1e-12);
        assert!(matches!(
            covariance_hat(&s, 2),
            Err(Error::LagOutOfRange { lag: 2, max: 1 })
        ));
        let flat = ts(&[3.0; 6]);
        for h in 0..=4 {
            assert_eq!(covariance_hat(&flat, h).unwrap(), 0.0);
        }
    }

    #[test]
    fn c2_hand_values() {
        let c = correlogram_c2(&ts(&[1.0, 2.0, 4.0]), 1).unwrap();
        assert_eq!(c.rho_abs[0], 1.0);
        assert!((c.rho_abs[1] - 0.5 / (14.0 / 9.0)).abs() < 1e-12);
        assert!(matches!(
            correlogram_c2(&ts(&[1.0, 2.0, 4.0]), 2),
            Err(Error::LagOutOfRange { .. })
        ));
        assert!(matches!(
            correlogram_c2(&ts(&[2.0; 5]), 2),
            Err(Error::DegenerateVariogram(_))
        ));
    }

    #[test]
    fn c1_rejects_zero_sill() {
        let vg = EmpiricalVariogram::from_values(vec![0.0, 0.0, 0.0]).unwrap();
        assert!(correlogram_c1(&vg, 2).is_err());
        assert!(correlogram_c1(&vg, 3).is_err());
    }
}
