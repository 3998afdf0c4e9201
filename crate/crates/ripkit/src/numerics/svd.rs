//! Singular value decomposition via one-sided Jacobi.
//!
//! The core sweep orthogonalizes pairs of columns of `B = A V` while
//! accumulating the rotations in `V`. At convergence the column norms of `B`
//! are the singular values and `V` is a full orthogonal basis of the domain,
//! which also hands us numerical null spaces for free.

use crate::error::{Error, Result};
use crate::numerics::{dot, DenseMatrix};
use crate::tol::RANK_TOL;

const MAX_SWEEPS: usize = 64;
const PAIR_TOL: f64 = 1e-15;

/// Thin SVD `A = left * diag(singular) * right^T` with `min(m, n)` singular
/// values sorted nonincreasing; `left` and `right` have orthonormal columns.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    pub left: DenseMatrix,
    pub singular: Vec<f64>,
    pub right: DenseMatrix,
}

impl SvdFactors {
    /// Number of singular values above `RANK_TOL * sigma_max`.
    pub fn rank(&self) -> usize {
        let cutoff = self.singular.first().copied().unwrap_or(0.0) * RANK_TOL;
        self.singular.iter().filter(|&&s| s > cutoff).count()
    }

    pub fn nuclear_norm(&self) -> f64 {
        self.singular.iter().sum()
    }

    /// `left * diag(singular) * right^T`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut scaled = self.left.clone();
        for (j, &s) in self.singular.iter().enumerate() {
            for i in 0..scaled.rows() {
                scaled.set(i, j, scaled.get(i, j) * s);
            }
        }
        scaled.matmul(&self.right.transpose())
    }
}

/// One-sided Jacobi: returns `(B, V)` with `B = A V`, `V` square orthogonal,
/// and the columns of `B` mutually orthogonal.
fn jacobi_columns(a: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let n = a.cols();
    let mut b = a.clone();
    let mut v = DenseMatrix::identity(n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let bp = b.column(p);
                let bq = b.column(q);
                let app = dot(&bp, &bp);
                let aqq = dot(&bq, &bq);
                let apq = dot(&bp, &bq);
                if apq.abs() <= PAIR_TOL * (app * aqq).sqrt() || apq == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (aqq - app) / (2.0 * apq);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    1.0 / (zeta - (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..b.rows() {
                    let bip = b.get(i, p);
                    let biq = b.get(i, q);
                    b.set(i, p, c * bip - s * biq);
                    b.set(i, q, s * bip + c * biq);
                }
                for i in 0..n {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, c * vip - s * viq);
                    v.set(i, q, s * vip + c * viq);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (b, v)
}

/// Column norms of `A V` and the full orthogonal `V` (cols x cols), sorted so
/// the norms are nonincreasing. Trailing near-zero norms expose the
/// numerical null space of `A` as the corresponding columns of `V`.
pub(crate) fn right_vectors_full(a: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    let (b, v) = jacobi_columns(a);
    let n = a.cols();
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n)
        .map(|j| crate::numerics::l2_norm(&b.column(j)))
        .collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap().then(i.cmp(&j)));
    let sorted_norms: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let sorted_v = v.select_columns(&order);
    (sorted_norms, sorted_v)
}

fn validate(a: &DenseMatrix) -> Result<()> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    if !a.entries().iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    Ok(())
}

/// Full-accuracy SVD; see [`SvdFactors`] for the contract.
pub fn svd(a: &DenseMatrix) -> Result<SvdFactors> {
    validate(a)?;
    if a.rows() >= a.cols() {
        svd_tall(a)
    } else {
        let t = svd_tall(&a.transpose())?;
        Ok(SvdFactors {
            left: t.right,
            singular: t.singular,
            right: t.left,
        })
    }
}

fn svd_tall(a: &DenseMatrix) -> Result<SvdFactors> {
    let (m, n) = (a.rows(), a.cols());
    debug_assert!(m >= n);
    let (b, v) = jacobi_columns(a);
    let norms: Vec<f64> = (0..n)
        .map(|j| crate::numerics::l2_norm(&b.column(j)))
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap().then(i.cmp(&j)));

    let singular: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let right = v.select_columns(&order);
    let sigma_max = singular.first().copied().unwrap_or(0.0);
    let zero_cut = sigma_max * 1e-14;

    let mut left = DenseMatrix::zeros(m, n);
    let mut placed = 0usize;
    for (jj, &j) in order.iter().enumerate() {
        if singular[jj] > zero_cut && singular[jj] > 0.0 {
            let col: Vec<f64> = b.column(j).iter().map(|x| x / singular[jj]).collect();
            left.set_column(jj, &col);
            placed = jj + 1;
        }
    }
    // Columns paired with (numerically) zero singular values: fill with any
    // orthonormal completion so left^T left = I still holds.
    if placed < n {
        complete_columns(&mut left, placed);
    }
    Ok(SvdFactors {
        left,
        singular,
        right,
    })
}

/// Fills columns `from..cols` with unit vectors orthogonal to the columns
/// before them. Each slot takes the standard basis vector with the largest
/// residual after double Gram-Schmidt; by pigeonhole that residual squared
/// is at least `(rows - placed) / rows`, so the completion never stalls.
fn complete_columns(u: &mut DenseMatrix, from: usize) {
    let m = u.rows();
    let n = u.cols();
    for next in from..n {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for cand in 0..m {
            let mut w = vec![0.0; m];
            w[cand] = 1.0;
            for _ in 0..2 {
                for j in 0..next {
                    let col = u.column(j);
                    let proj = dot(&w, &col);
                    for i in 0..m {
                        w[i] -= proj * col[i];
                    }
                }
            }
            let norm = crate::numerics::l2_norm(&w);
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, w));
            }
        }
        let (norm, w) = best.expect("rows >= 1");
        debug_assert!(norm > 0.0, "orthonormal completion stalled");
        let unit: Vec<f64> = w.iter().map(|x| x / norm).collect();
        u.set_column(next, &unit);
    }
}

/// Moore-Penrose pseudoinverse with singular values at or below
/// `RANK_TOL * sigma_max` treated as zero.
pub fn pseudo_inverse(a: &DenseMatrix) -> Result<DenseMatrix> {
    let f = svd(a)?;
    let cutoff = f.singular.first().copied().unwrap_or(0.0) * RANK_TOL;
    let inv: Vec<f64> = f
        .singular
        .iter()
        .map(|&s| if s > cutoff { 1.0 / s } else { 0.0 })
        .collect();
    let mut scaled = f.right.clone();
    for (j, &w) in inv.iter().enumerate() {
        for i in 0..scaled.rows() {
            scaled.set(i, j, scaled.get(i, j) * w);
        }
    }
    Ok(scaled.matmul(&f.left.transpose()))
}
