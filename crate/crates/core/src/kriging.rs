//! Solution of the bordered kriging system by dense LU with partial pivoting.
//!
//! A scan visits many target indices for the same matrix, so the
//! factorization is exposed separately and reused for each right-hand side.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::KrigingSystem;

pub const DEFAULT_PIVOT_TOL: f64 = 1e-12;

/// `PA = LU`, stored packed: unit-lower `L` below the diagonal, `U` on and
/// above it.
#[derive(Debug, Clone)]
pub struct LuFactors {
    dim: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactors {
    /// Factor a row-major `dim × dim` matrix. Fails with `SingularSystem` at
    /// the first column whose largest remaining pivot is below `pivot_tol`.
    pub fn factor(matrix: &[f64], dim: usize, pivot_tol: f64) -> Result<Self> {
        if matrix.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "matrix of {} entries is not {dim}x{dim}",
                matrix.len()
            )));
        }
        let mut lu = matrix.to_vec();
        let mut perm: Vec<usize> = (0..dim).collect();

        for col in 0..dim {
            let (pivot_row, pivot_abs) = (col..dim)
                .map(|r| (r, lu[r * dim + col].abs()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pivot_abs >= pivot_tol) {
                return Err(Error::SingularSystem {
                    pivot_index: col,
                    t: None,
                });
            }
            if pivot_row != col {
                for c in 0..dim {
                    lu.swap(col * dim + c, pivot_row * dim + c);
                }
                perm.swap(col, pivot_row);
            }
            let pivot = lu[col * dim + col];
            for r in col + 1..dim {
                let factor = lu[r * dim + col] / pivot;
                lu[r * dim + col] = factor;
                if factor != 0.0 {
                    for c in col + 1..dim {
                        lu[r * dim + c] -= factor * lu[col * dim + c];
                    }
                }
            }
        }
        Ok(LuFactors { dim, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let dim = self.dim;
        assert_eq!(rhs.len(), dim, "right-hand side has wrong length");
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for r in 0..dim {
            let row = &self.lu[r * dim..r * dim + r];
            let s: f64 = row.iter().zip(&x[..r]).map(|(l, y)| l * y).sum();
            x[r] -= s;
        }
        for r in (0..dim).rev() {
            let row = &self.lu[r * dim..(r + 1) * dim];
            let s: f64 = row[r + 1..].iter().zip(&x[r + 1..]).map(|(u, y)| u * y).sum();
            x[r] = (x[r] - s) / row[r];
        }
        x
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrigingSolution {
    pub weights: Vec<f64>,
    pub mu: f64,
    pub j: u64,
    pub t: Option<u64>,
}

impl KrigingSolution {
    pub fn from_vector(mut x: Vec<f64>, j: u64, t: Option<u64>) -> Self {
        let mu = x.pop().expect("solution vector is never empty");
        KrigingSolution {
            weights: x,
            mu,
            j,
            t,
        }
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

pub fn solve(system: &KrigingSystem, pivot_tol: f64) -> Result<KrigingSolution> {
    let lu = LuFactors::factor(system.matrix(), system.dim(), pivot_tol)?;
    let x = lu.solve(system.target());
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem {
            pivot_index: system.n(),
            t: None,
        });
    }
    Ok(KrigingSolution::from_vector(x, system.j(), None))
}

/// `‖A x - b‖∞`.
pub fn residual_inf(system: &KrigingSystem, sol: &KrigingSolution) -> f64 {
    let dim = system.dim();
    let x: Vec<f64> = sol.weights.iter().copied().chain([sol.mu]).collect();
    (0..dim)
        .map(|r| {
            let ax: f64 = (0..dim).map(|c| system.get(r, c) * x[c]).sum();
            (ax - system.target()[r]).abs()
        })
        .fold(0.0, f64::max)
}
