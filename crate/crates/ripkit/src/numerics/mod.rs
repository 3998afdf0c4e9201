//! Self-contained dense linear algebra and LP kernels.
//!
//! Everything operates on [`DenseMatrix`] (row-major `f64`) and plain
//! `Vec<f64>` vectors. Eigen/SVD use cyclic Jacobi sweeps, which are simple
//! and accurate at the desk scales this crate targets (dimensions in the
//! tens). All routines are pure functions of their inputs.

mod cholesky;
mod eig;
mod lp;
mod ortho;
mod svd;

pub use cholesky::{cholesky, spd_solve, CholeskyFactor};
pub use eig::sym_eig_extremes;
pub use lp::{simplex_lp, LpSolution, LpStatus};
pub use ortho::orthonormal_extend;
pub(crate) use svd::right_vectors_full;
pub use svd::{pseudo_inverse, svd, SvdFactors};

use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "entry count {} does not match {rows}x{cols}",
                entries.len()
            )));
        }
        if !entries.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        Ok(DenseMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            entries: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn diag(values: &[f64], rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (i, &v) in values.iter().enumerate().take(rows.min(cols)) {
            m.set(i, i, v);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidInput("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[f64]) {
        debug_assert_eq!(col.len(), self.rows);
        for (i, &v) in col.iter().enumerate() {
            self.set(i, j, v);
        }
    }

    /// Columns selected by `indices` (in the given order), as a new matrix.
    pub fn select_columns(&self, indices: &[usize]) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, indices.len());
        for (jj, &j) in indices.iter().enumerate() {
            for i in 0..self.rows {
                out.set(i, jj, self.get(i, j));
            }
        }
        out
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.entries[i * other.cols + j] += a * other.get(l, j);
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matvec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `A^T x` without materializing the transpose.
    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, x.len(), "tr_matvec dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for (j, out_j) in out.iter_mut().enumerate() {
                *out_j += self.get(i, j) * xi;
            }
        }
        out
    }

    /// Gram matrix `A^T A`.
    pub fn gram(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.cols);
        for j in 0..self.cols {
            for l in j..self.cols {
                let mut s = 0.0;
                for i in 0..self.rows {
                    s += self.get(i, j) * self.get(i, l);
                }
                out.set(j, l, s);
                out.set(l, j, s);
            }
        }
        out
    }

    pub fn scale(&self, c: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|x| c * x).collect(),
        }
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn frob_norm(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn inner(&self, other: &DenseMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        dot(&self.entries, &other.entries)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Max `|A_ij - A_ji|` over all pairs.
    pub fn asymmetry(&self) -> f64 {
        assert!(self.is_square());
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn symmetrized(&self) -> DenseMatrix {
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                out.set(i, j, v);
                out.set(j, i, v);
            }
        }
        out
    }

    /// Column-major vectorization (stacked columns).
    pub fn vec_col_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rows * self.cols);
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self.get(i, j));
            }
        }
        out
    }

    /// Inverse of [`Self::vec_col_major`].
    pub fn from_vec_col_major(rows: usize, cols: usize, v: &[f64]) -> DenseMatrix {
        assert_eq!(v.len(), rows * cols);
        let mut out = DenseMatrix::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                out.set(i, j, v[j * rows + i]);
            }
        }
        out
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn l1_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub fn l2_norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn linf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn sub_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale_vec(a: &[f64], c: f64) -> Vec<f64> {
    a.iter().map(|x| c * x).collect()
}

/// Compensated (Neumaier) summation.
pub fn stable_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_and_transpose() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[vec![7.0, 8.0], vec![9.0, 10.0]]).unwrap();
        let c = a.matmul(&b);
        assert_eq!(c.row(0), &[25.0, 28.0]);
        assert_eq!(c.row(2), &[89.0, 100.0]);
        let at = a.transpose();
        assert_eq!(at.rows(), 2);
        assert_eq!(at.get(0, 2), 5.0);
    }

    #[test]
    fn gram_matches_explicit_product() {
        let a = DenseMatrix::from_rows(&[vec![1.0, -2.0, 0.5], vec![0.0, 3.0, 1.0]]).unwrap();
        let g = a.gram();
        let explicit = a.transpose().matmul(&a);
        assert!(g.sub(&explicit).max_abs() < 1e-14);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(DenseMatrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(DenseMatrix::new(2, 2, vec![1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn col_major_round_trip() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        let v = a.vec_col_major();
        assert_eq!(v, vec![1.0, 4.0, 2.0, 5.0, 3.0, 6.0]);
        let back = DenseMatrix::from_vec_col_major(2, 3, &v);
        assert_eq!(back, a);
    }

    #[test]
    fn tr_matvec_matches_transpose() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let x = vec![1.0, -1.0, 2.0];
        let direct = a.tr_matvec(&x);
        let explicit = a.transpose().matvec(&x);
        assert_eq!(direct, explicit);
    }
}
