//! The negative correlation function with time parameter `t`, and assembly of
//! the bordered kriging system built from it.
//!
//! For lag `Δ = |i - j|`:
//!
//! ```text
//! ρ(Δ) = +1                      Δ = 0
//! ρ(Δ) = -t^(-Θ (Δ/t)²)          Δ > 0
//! ```
//!
//! The resulting matrix is not positive semidefinite and is used as is.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationModel {
    theta: f64,
    t: u64,
    ln_t: f64,
}

impl CorrelationModel {
    pub fn new(theta: f64, t: u64) -> Result<Self> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "theta must be positive and finite, got {theta}"
            )));
        }
        if t < 2 {
            return Err(Error::InvalidArgument(format!("t must be at least 2, got {t}")));
        }
        Ok(CorrelationModel {
            theta,
            t,
            ln_t: (t as f64).ln(),
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    #[inline]
    pub fn rho(&self, delta: u64) -> f64 {
        if delta == 0 {
            return 1.0;
        }
        let x = delta as f64 / self.t as f64;
        -(-self.theta * x * x * self.ln_t).exp()
    }
}

pub fn rho(delta: u64, model: &CorrelationModel) -> f64 {
    model.rho(delta)
}

/// Bordered system
///
/// ```text
/// | ρ_11 .. ρ_1n 1 |   | ω_1 |   | ρ_1j |
/// |  :        :  : | · |  :  | = |  :   |
/// | ρ_n1 .. ρ_nn 1 |   | ω_n |   | ρ_nj |
/// |  1   ..  1   0 |   |  μ  |   |  1   |
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct KrigingSystem {
    n: usize,
    j: u64,
    /// Row-major `(n+1) × (n+1)`.
    matrix: Vec<f64>,
    target: Vec<f64>,
}

impl KrigingSystem {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn j(&self) -> u64 {
        self.j
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.matrix[row * (self.n + 1) + col]
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    /// `ρ_ij` for `i = 1..n`, i.e. the target without its trailing 1.
    pub fn target_rho(&self) -> &[f64] {
        &self.target[..self.n]
    }

    /// Same matrix, different right-hand side. Used to pose the system for a
    /// target index that coincides with a sample position.
    pub fn with_target(&self, j: u64, target: Vec<f64>) -> Result<Self> {
        if target.len() != self.n + 1 {
            return Err(Error::InvalidArgument(format!(
                "target of length {} for a system of dimension {}",
                target.len(),
                self.n + 1
            )));
        }
        Ok(KrigingSystem {
            n: self.n,
            j,
            matrix: self.matrix.clone(),
            target,
        })
    }
}

/// The `(n+1) × (n+1)` bordered matrix alone, row-major.
pub fn bordered_matrix(n: usize, model: &CorrelationModel) -> Vec<f64> {
    let dim = n + 1;
    // Entries depend only on |i-k|; evaluate each lag once.
    let by_lag: Vec<f64> = (0..n as u64).map(|d| model.rho(d)).collect();
    let mut m = vec![0.0; dim * dim];
    for i in 0..n {
        for k in 0..n {
            m[i * dim + k] = by_lag[i.abs_diff(k)];
        }
        m[i * dim + n] = 1.0;
        m[n * dim + i] = 1.0;
    }
    m
}

/// `[ρ(|1-j|), .., ρ(|n-j|), 1]` for any target index `j >= 1`.
pub fn target_vector(n: usize, j: u64, model: &CorrelationModel) -> Vec<f64> {
    let mut b: Vec<f64> = (1..=n as u64).map(|i| model.rho(i.abs_diff(j))).collect();
    b.push(1.0);
    b
}

pub fn build_system(n: usize, j: u64, model: &CorrelationModel) -> Result<KrigingSystem> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if j <= n as u64 {
        return Err(Error::InvalidArgument(format!(
            "target index j = {j} must exceed n = {n}"
        )));
    }
    Ok(KrigingSystem {
        n,
        j,
        matrix: bordered_matrix(n, model),
        target: target_vector(n, j, model),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_values() {
        let m = CorrelationModel::new(1.0, 238).unwrap();
        assert_eq!(m.rho(0), 1.0);
        assert!((m.rho(238) - (-1.0 / 238.0)).abs() < 1e-15);
        assert!((m.rho(238) + 0.004_201_680_672_268_907).abs() < 1e-15);
        let m = CorrelationModel::new(1.0, 10).unwrap();
        let far = m.rho(100);
        assert!(far < 0.0 && far > -1e-99);
        assert!((far + 1e-100).abs() < 1e-110);
    }

    #[test]
    fn model_validation() {
        assert!(CorrelationModel::new(0.0, 10).is_err());
        assert!(CorrelationModel::new(1.0, 1).is_err());
        assert!(CorrelationModel::new(f64::NAN, 10).is_err());
    }

    #[test]
    fn one_point_system() {
        let m = CorrelationModel::new(0.8, 5).unwrap();
        let sys = build_system(1, 4, &m).unwrap();
        assert_eq!(sys.matrix(), &[1.0, 1.0, 1.0, 0.0]);
        assert_eq!(sys.target(), &[m.rho(3), 1.0]);
    }

    #[test]
    fn two_point_off_diagonal() {
        let m = CorrelationModel::new(1.0, 10).unwrap();
        let sys = build_system(2, 3, &m).unwrap();
        assert!((sys.get(0, 1) - (-0.977_237_220_955_810_7)).abs() < 1e-15);
        assert_eq!(sys.get(0, 0), 1.0);
        assert_eq!(sys.get(2, 2), 0.0);
    }

    #[test]
    fn target_index_must_exceed_n() {
        let m = CorrelationModel::new(1.0, 10).unwrap();
        assert!(build_system(3, 3, &m).is_err());
        assert!(build_system(3, 4, &m).is_ok());
    }

    #[test]
    fn structure() {
        let m = CorrelationModel::new(0.7, 40).unwrap();
        for n in 1..=20 {
            let sys = build_system(n, n as u64 + 7, &m).unwrap();
            for i in 0..=n {
                for k in 0..=n {
                    assert_eq!(sys.get(i, k), sys.get(k, i));
                }
            }
            for i in 0..n {
                assert_eq!(sys.get(i, i), 1.0);
                assert_eq!(sys.get(i, n), 1.0);
            }
            assert_eq!(sys.get(n, n), 0.0);
            assert_eq!(*sys.target().last().unwrap(), 1.0);
        }
    }
}
