//! Dense LU with partial pivoting and a 1-norm condition estimator.

use crate::{Error, Result};
use nalgebra::DMatrix;

/// Relative pivot threshold: pivots below this times max |M_ij| are singular.
pub const PIVOT_TOL: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct DenseLu {
    lu: DMatrix<f64>,
    perm: Vec<usize>,
    norm1: f64,
}

impl DenseLu {
    pub fn factor(m: &DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if n != m.ncols() || n == 0 {
            return Err(Error::InvalidArgument(format!("LU needs a square matrix, got {}x{}", n, m.ncols())));
        }
        let scale = m.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let threshold = PIVOT_TOL * scale;
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (mut p, mut best) = (k, lu[(k, k)].abs());
            for i in k + 1..n {
                let v = lu[(i, k)].abs();
                if v > best {
                    p = i;
                    best = v;
                }
            }
            if !(best > threshold) {
                return Err(Error::SingularSystem { pivot: best, threshold });
            }
            if p != k {
                lu.swap_rows(p, k);
                perm.swap(p, k);
            }
            let piv = lu[(k, k)];
            for i in k + 1..n {
                lu[(i, k)] /= piv;
            }
            for j in k + 1..n {
                let u = lu[(k, j)];
                if u != 0.0 {
                    for i in k + 1..n {
                        let l = lu[(i, k)];
                        lu[(i, j)] -= l * u;
                    }
                }
            }
        }
        Ok(DenseLu { lu, perm, norm1: norm1(m) })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Solves M x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let lu = &self.lu;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for j in 0..n {
            let xj = x[j];
            if xj != 0.0 {
                for i in j + 1..n {
                    x[i] -= lu[(i, j)] * xj;
                }
            }
        }
        for j in (0..n).rev() {
            x[j] /= lu[(j, j)];
            let xj = x[j];
            for i in 0..j {
                x[i] -= lu[(i, j)] * xj;
            }
        }
        x
    }

    /// Solves M^T x = b.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let lu = &self.lu;
        let mut y = b.to_vec();
        // U^T y = b
        for i in 0..n {
            let mut acc = y[i];
            for k in 0..i {
                acc -= lu[(k, i)] * y[k];
            }
            y[i] = acc / lu[(i, i)];
        }
        // L^T z = y
        for i in (0..n).rev() {
            let mut acc = y[i];
            for k in i + 1..n {
                acc -= lu[(k, i)] * y[k];
            }
            y[i] = acc;
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }

    /// Estimate of ||M^-1||_1 (Hager's method with Higham's extra test vector).
    pub fn inverse_norm1_estimate(&self) -> f64 {
        let n = self.dim();
        if n == 1 {
            return 1.0 / self.lu[(0, 0)].abs();
        }
        let l1 = |v: &[f64]| v.iter().map(|a| a.abs()).sum::<f64>();
        let mut x = vec![1.0 / n as f64; n];
        let mut est = 0.0;
        let mut last_j = usize::MAX;
        for _ in 0..5 {
            let y = self.solve(&x);
            est = l1(&y);
            let xi: Vec<f64> = y.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect();
            let z = self.solve_transpose(&xi);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .fold((0, 0.0_f64), |(bj, bv), (i, v)| if v.abs() > bv { (i, v.abs()) } else { (bj, bv) });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if zmax <= ztx || j == last_j {
                break;
            }
            last_j = j;
            x = vec![0.0; n];
            x[j] = 1.0;
        }
        let alt: Vec<f64> = (0..n)
            .map(|i| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                sign * (1.0 + i as f64 / (n - 1) as f64)
            })
            .collect();
        let alt_est = 2.0 * l1(&self.solve(&alt)) / (3.0 * n as f64);
        est.max(alt_est)
    }

    /// 1-norm condition number estimate ||M||_1 ||M^-1||_1.
    pub fn condition_estimate(&self) -> f64 {
        self.norm1 * self.inverse_norm1_estimate()
    }
}

/// Maximum absolute column sum.
pub fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Maximum absolute row sum.
pub fn norm_inf(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn matvec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; m.nrows()];
    for (j, xj) in x.iter().enumerate() {
        if *xj != 0.0 {
            for (i, v) in m.column(j).iter().enumerate() {
                y[i] += v * xj;
            }
        }
    }
    y
}
