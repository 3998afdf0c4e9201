//! Cholesky factorization and SPD solves.

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

/// Lower-triangular Cholesky factor, reusable across solves.
#[derive(Clone, Debug)]
pub struct CholeskyFactor {
    lower: DenseMatrix,
}

impl CholeskyFactor {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.lower.rows();
        assert_eq!(rhs.len(), n, "rhs length mismatch");
        // Forward substitution L y = rhs.
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = rhs[i];
            for j in 0..i {
                s -= self.lower.get(i, j) * y[j];
            }
            y[i] = s / self.lower.get(i, i);
        }
        // Back substitution L^T x = y.
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.lower.get(j, i) * x[j];
            }
            x[i] = s / self.lower.get(i, i);
        }
        x
    }
}

/// Cholesky factorization of a symmetric positive-definite matrix.
pub fn cholesky(s: &DenseMatrix) -> Result<CholeskyFactor> {
    if !s.is_square() || s.rows() == 0 {
        return Err(Error::InvalidInput("need a nonempty square matrix".into()));
    }
    if !s.entries().iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    let n = s.rows();
    let mut l = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = 0.5 * (s.get(i, j) + s.get(j, i));
            for k in 0..j {
                sum -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return Err(Error::NotPositiveDefinite);
                }
                l.set(i, i, sum.sqrt());
            } else {
                l.set(i, j, sum / l.get(j, j));
            }
        }
    }
    Ok(CholeskyFactor { lower: l })
}

/// Solves `S x = rhs` for symmetric positive-definite `S`.
pub fn spd_solve(s: &DenseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    Ok(cholesky(s)?.solve(rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{l2_norm, sub_vec};
    use crate::rng::SplitMix64;

    #[test]
    fn identity_solve() {
        let s = DenseMatrix::identity(3);
        let b = vec![1.0, -2.0, 0.5];
        assert_eq!(spd_solve(&s, &b).unwrap(), b);
    }

    #[test]
    fn scalar_diagonal() {
        let s = DenseMatrix::diag(&[4.0], 1, 1);
        let x = spd_solve(&s, &[8.0]).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn random_spd_residual() {
        let mut rng = SplitMix64::new(13);
        let n = 10;
        let mut g = DenseMatrix::zeros(n + 4, n);
        for i in 0..n + 4 {
            for j in 0..n {
                g.set(i, j, rng.next_normal());
            }
        }
        let s = g.gram(); // G^T G is SPD with probability 1
        let rhs = rng.normal_vec(n);
        let x = spd_solve(&s, &rhs).unwrap();
        let residual = l2_norm(&sub_vec(&s.matvec(&x), &rhs));
        assert!(residual <= 1e-10 * l2_norm(&rhs), "residual {residual}");
    }

    #[test]
    fn rejects_indefinite() {
        let s = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(cholesky(&s), Err(Error::NotPositiveDefinite)));
    }
}
