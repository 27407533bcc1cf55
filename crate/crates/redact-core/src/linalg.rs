//! Small dense square matrices with the handful of operations the chain
//! analysis needs: multiplication, a partial-pivot solve, and a Jacobi
//! eigensolve for symmetric matrices.

use alloc::vec;
use alloc::vec::Vec;

// Inherent float math is std-only; route through the trait in no_std builds.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

const PIVOT_TOLERANCE: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 64;

/// Dense square matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Matrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::RowLength {
                    row: i,
                    expected: n,
                    found: row.len(),
                });
            }
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        Ok(m)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        debug_assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn column_min(&self, j: usize) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..self.n {
            let v = self.get(i, j);
            if v < m {
                m = v;
            }
        }
        m
    }

    pub fn row_min(&self, i: usize) -> f64 {
        let mut m = f64::INFINITY;
        for j in 0..self.n {
            let v = self.get(i, j);
            if v < m {
                m = v;
            }
        }
        m
    }
}

/// Solve `a x = b` by Gaussian elimination with partial pivoting.
pub(crate) fn solve_linear(mut a: Matrix, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = a.n();
    debug_assert_eq!(b.len(), n);
    for col in 0..n {
        let mut pivot = col;
        for r in col + 1..n {
            if a.get(r, col).abs() > a.get(pivot, col).abs() {
                pivot = r;
            }
        }
        if a.get(pivot, col).abs() < PIVOT_TOLERANCE {
            return Err(Error::SingularSystem);
        }
        if pivot != col {
            for j in 0..n {
                let t = a.get(col, j);
                a.set(col, j, a.get(pivot, j));
                a.set(pivot, j, t);
            }
            b.swap(col, pivot);
        }
        let d = a.get(col, col);
        for r in col + 1..n {
            let factor = a.get(r, col) / d;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                let v = a.get(r, j) - factor * a.get(col, j);
                a.set(r, j, v);
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = b[i];
        for j in i + 1..n {
            acc -= a.get(i, j) * x[j];
        }
        x[i] = acc / a.get(i, i);
    }
    Ok(x)
}

/// Eigenvalues of a symmetric matrix via cyclic Jacobi rotations, sorted in
/// descending order.
pub(crate) fn symmetric_eigenvalues(mut s: Matrix) -> Result<Vec<f64>> {
    let n = s.n();
    if n == 1 {
        return Ok(vec![s.get(0, 0)]);
    }
    let scale: f64 = s.data.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = {
            let mut acc = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    acc += s.get(i, j) * s.get(i, j);
                }
            }
            acc.sqrt()
        };
        if off <= 1e-14 * scale {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = s.get(p, q);
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = s.get(p, p);
                let aqq = s.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = s.get(k, p);
                    let akq = s.get(k, q);
                    s.set(k, p, c * akp - sn * akq);
                    s.set(p, k, c * akp - sn * akq);
                    s.set(k, q, sn * akp + c * akq);
                    s.set(q, k, sn * akp + c * akq);
                }
                s.set(p, p, app - t * apq);
                s.set(q, q, aqq + t * apq);
                s.set(p, q, 0.0);
                s.set(q, p, 0.0);
            }
        }
    }
    if !converged {
        return Err(Error::EigenNonConvergence);
    }
    let mut ev: Vec<f64> = (0..n).map(|i| s.get(i, i)).collect();
    ev.sort_by(|a, b| b.partial_cmp(a).expect("eigenvalues are finite"));
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_two_by_two() {
        let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let x = solve_linear(a, vec![5.0, 10.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn solve_rejects_singular() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(solve_linear(a, vec![1.0, 1.0]), Err(Error::SingularSystem));
    }

    #[test]
    fn jacobi_recovers_known_spectrum() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1.
        let s = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let ev = symmetric_eigenvalues(s).unwrap();
        assert!((ev[0] - 3.0).abs() < 1e-12);
        assert!((ev[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_diagonal_is_identity_map() {
        let mut m = Matrix::zeros(4);
        for (i, v) in [0.3, -0.2, 0.9, 0.5].iter().enumerate() {
            m.set(i, i, *v);
        }
        let ev = symmetric_eigenvalues(m).unwrap();
        assert_eq!(ev, vec![0.9, 0.5, 0.3, -0.2]);
    }
}
