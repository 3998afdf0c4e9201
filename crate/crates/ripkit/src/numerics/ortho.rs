//! Orthonormal basis construction from a single unit vector.

use crate::error::{Error, Result};
use crate::numerics::{dot, l2_norm, DenseMatrix};

/// Orthogonal matrix whose first column is the given unit vector.
///
/// Built from a single Householder reflector, so `Q^T Q = I` to machine
/// precision regardless of the dimension.
pub fn orthonormal_extend(v: &[f64]) -> Result<DenseMatrix> {
    let d = v.len();
    if d == 0 {
        return Err(Error::InvalidInput("empty vector".into()));
    }
    if !v.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidInput("non-finite entry".into()));
    }
    let norm = l2_norm(v);
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput(format!(
            "vector norm {norm} is not 1 within 1e-10"
        )));
    }

    // w = v - alpha e1 with alpha = -sign(v1) keeps ||w|| away from zero;
    // then H = I - 2 w w^T / ||w||^2 satisfies H(alpha e1) = v, so alpha*H
    // is orthogonal with first column exactly v.
    let alpha = if v[0] >= 0.0 { -1.0 } else { 1.0 };
    let mut w = v.to_vec();
    w[0] -= alpha;
    let ww = dot(&w, &w);
    let mut q = DenseMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let h = if i == j { 1.0 } else { 0.0 } - 2.0 * w[i] * w[j] / ww;
            q.set(i, j, alpha * h);
        }
    }
    Ok(q)
}
