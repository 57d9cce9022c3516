//! Independent oracles for the integration tests. Nothing here calls into the
//! solver, model or estimator code paths under test.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

/// Correlation via `powf`, not the `exp`/`ln` route used by the library.
pub fn rho_oracle(delta: u64, t: u64, theta: f64) -> f64 {
    if delta == 0 {
        1.0
    } else {
        let x = delta as f64 / t as f64;
        -(t as f64).powf(-theta * x * x)
    }
}

/// Determinant by permutation expansion (Leibniz). Only for tiny matrices.
pub fn det_leibniz(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = 0.0;
    permute(&mut perm, 0, a, &mut total);
    total
}

fn permute(perm: &mut Vec<usize>, k: usize, a: &[Vec<f64>], total: &mut f64) {
    let n = perm.len();
    if k == n {
        let mut inversions = 0;
        for i in 0..n {
            for j in i + 1..n {
                if perm[i] > perm[j] {
                    inversions += 1;
                }
            }
        }
        let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
        *total += sign * (0..n).map(|i| a[i][perm[i]]).product::<f64>();
        return;
    }
    for i in k..n {
        perm.swap(k, i);
        permute(perm, k + 1, a, total);
        perm.swap(k, i);
    }
}

/// Cramer's rule.
pub fn cramer_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let det = det_leibniz(a);
    (0..b.len())
        .map(|col| {
            let replaced: Vec<Vec<f64>> = a
                .iter()
                .zip(b)
                .map(|(row, &bi)| {
                    let mut r = row.clone();
                    r[col] = bi;
                    r
                })
                .collect();
            det_leibniz(&replaced) / det
        })
        .collect()
}

/// Bordered matrix and right-hand side for target index `j`, built from
/// [`rho_oracle`].
pub fn bordered_oracle(n: usize, theta: f64, t: u64, j: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut a = vec![vec![0.0; n + 1]; n + 1];
    for (i, row) in a.iter_mut().enumerate().take(n) {
        for (k, cell) in row.iter_mut().enumerate().take(n) {
            *cell = rho_oracle((i as u64).abs_diff(k as u64), t, theta);
        }
        row[n] = 1.0;
    }
    a[n][..n].fill(1.0);
    let mut b: Vec<f64> = (1..=n as u64).map(|i| rho_oracle(i.abs_diff(j), t, theta)).collect();
    b.push(1.0);
    (a, b)
}

/// Quantities the scan's acceptance predicate looks at.
#[derive(Debug, Clone, Copy)]
pub struct OraclePoint {
    pub g: f64,
    pub m_hat: f64,
    pub sigma2_hat: f64,
    pub variance: f64,
}

/// Solve with nalgebra's LU and evaluate the constraint and estimate
/// directly from their defining sums.
pub fn oracle_point(values: &[f64], theta: f64, t: u64, j: u64) -> OraclePoint {
    let n = values.len();
    let (a, b) = bordered_oracle(n, theta, t, j);
    let m = DMatrix::from_fn(n + 1, n + 1, |r, c| a[r][c]);
    let x = m
        .lu()
        .solve(&DVector::from_vec(b.clone()))
        .expect("oracle system solvable");
    let w = &x.as_slice()[..n];
    let mu = x[n];
    let wr: f64 = w.iter().zip(&b[..n]).map(|(a, b)| a * b).sum();
    let m_hat: f64 = w.iter().zip(values).map(|(a, v)| a * v).sum();
    let second: f64 = w.iter().zip(values).map(|(a, v)| a * v * v).sum();
    let sigma2_hat = second - m_hat * m_hat;
    OraclePoint {
        g: wr + mu,
        m_hat,
        sigma2_hat,
        variance: -sigma2_hat * (wr - mu),
    }
}

/// First `(t, j)` in ascending `t`-then-`j` order satisfying the default
/// acceptance predicate.
pub fn brute_force_first_root(
    values: &[f64],
    theta: f64,
    s_max: u64,
    j_max: u64,
    epsilon: f64,
) -> Option<(u64, u64, OraclePoint)> {
    let n = values.len() as u64;
    for t in n + 1..=n + s_max {
        for j in n + 1..=j_max {
            let p = oracle_point(values, theta, t, j);
            if p.g.abs() <= epsilon && p.variance >= 0.0 && p.sigma2_hat >= 0.0 {
                return Some((t, j, p));
            }
        }
    }
    None
}
