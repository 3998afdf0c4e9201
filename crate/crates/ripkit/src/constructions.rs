//! Explicit operators witnessing that the 1/3 threshold is sharp, plus the
//! order-1 identifiability gap examples.
//!
//! The sharp construction pins a unit anchor `b1` (flat on its first 2k
//! coordinates, or the flat rank-2r diagonal for maps) and kills exactly
//! that direction while inflating the rest by `sqrt(4/3)`. Every k-sparse
//! vector has at most half its energy along the anchor, so the squared
//! ratio stays in `[2/3, 4/3]`; flat and alternating-sign probes attain
//! both ends, and the anchor splits into two order-k pieces that collide
//! under the operator.

use crate::error::{Error, Result};
use crate::numerics::{l2_norm, orthonormal_extend, sub_vec, DenseMatrix};
use crate::recovery::LinearMap;

/// Operator of a counterexample kit.
#[derive(Clone, Debug)]
pub enum KitOperator {
    Signal(DenseMatrix),
    Map(LinearMap),
}

impl KitOperator {
    pub fn apply(&self, element: &KitElement) -> Vec<f64> {
        match (self, element) {
            (KitOperator::Signal(a), KitElement::Vector(v)) => a.matvec(v),
            (KitOperator::Map(m), KitElement::Matrix(x)) => m.apply(x),
            _ => panic!("operator/element kind mismatch"),
        }
    }
}

/// Anchor or colliding element: a vector for signal kits, a matrix for map
/// kits.
#[derive(Clone, Debug)]
pub enum KitElement {
    Vector(Vec<f64>),
    Matrix(DenseMatrix),
}

impl KitElement {
    pub fn norm(&self) -> f64 {
        match self {
            KitElement::Vector(v) => l2_norm(v),
            KitElement::Matrix(x) => x.frob_norm(),
        }
    }

    fn distance(&self, other: &KitElement) -> f64 {
        match (self, other) {
            (KitElement::Vector(a), KitElement::Vector(b)) => l2_norm(&sub_vec(a, b)),
            (KitElement::Matrix(a), KitElement::Matrix(b)) => a.sub(b).frob_norm(),
            _ => panic!("element kind mismatch"),
        }
    }

    fn sparsity_or_rank(&self) -> Result<usize> {
        match self {
            KitElement::Vector(v) => Ok(v.iter().filter(|x| x.abs() > 1e-12).count()),
            KitElement::Matrix(x) => Ok(crate::numerics::svd(x)?.rank()),
        }
    }
}

/// A constructed operator together with the algebra that certifies it: a
/// unit anchor spanning (part of) the null space, and two order-bounded
/// elements with identical images.
#[derive(Clone, Debug)]
pub struct CounterexampleKit {
    pub operator: KitOperator,
    pub order: usize,
    pub anchor: KitElement,
    pub colliding_pair: (KitElement, KitElement),
    pub claimed_ric: f64,
}

impl CounterexampleKit {
    /// Fails fast if any of the defining identities is broken.
    pub fn verify(&self) -> Result<()> {
        if (self.anchor.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidWitness("anchor is not unit norm".into()));
        }
        let anchor_image = l2_norm(&self.operator.apply(&self.anchor));
        if anchor_image > 1e-10 {
            return Err(Error::InvalidWitness(format!(
                "anchor not annihilated: {anchor_image}"
            )));
        }
        let (first, second) = &self.colliding_pair;
        let gap = l2_norm(&sub_vec(
            &self.operator.apply(first),
            &self.operator.apply(second),
        ));
        if gap > 1e-10 {
            return Err(Error::InvalidWitness(format!("images differ by {gap}")));
        }
        if first.sparsity_or_rank()? > self.order || second.sparsity_or_rank()? > self.order {
            return Err(Error::InvalidWitness(
                "colliding element exceeds the order".into(),
            ));
        }
        if first.distance(second) < 1.0 {
            return Err(Error::InvalidWitness("colliding pair not distinct".into()));
        }
        Ok(())
    }
}

/// Sensing matrix with RIC of order k exactly 1/3 and two colliding
/// k-sparse signals, for `2 <= k <= p/2`.
///
/// The anchor is `b1 = (1, ..., 1, 0, ..., 0) / sqrt(2k)` (2k ones) and the
/// operator the closed form `sqrt(4/3) (I - b1 b1^T)`, which agrees with
/// expanding in any orthonormal basis extending `b1` and dropping the first
/// coefficient. The colliding signals are the k leading ones against minus
/// the next k.
pub fn sharp_counterexample_signal(p: usize, k: usize) -> Result<CounterexampleKit> {
    if k < 2 || 2 * k > p {
        return Err(Error::InvalidInput(format!(
            "need 2 <= k <= p/2, got p={p}, k={k}"
        )));
    }
    let amp = 1.0 / ((2 * k) as f64).sqrt();
    let mut anchor = vec![0.0; p];
    for a in anchor.iter_mut().take(2 * k) {
        *a = amp;
    }
    let scale = (4.0f64 / 3.0).sqrt();
    let mut a = DenseMatrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            let v = if i == j { 1.0 } else { 0.0 } - anchor[i] * anchor[j];
            a.set(i, j, scale * v);
        }
    }
    let mut gamma = vec![0.0; p];
    let mut eta = vec![0.0; p];
    for i in 0..k {
        gamma[i] = 1.0;
        eta[k + i] = -1.0;
    }
    let kit = CounterexampleKit {
        operator: KitOperator::Signal(a),
        order: k,
        anchor: KitElement::Vector(anchor),
        colliding_pair: (KitElement::Vector(gamma), KitElement::Vector(eta)),
        claimed_ric: 1.0 / 3.0,
    };
    kit.verify()?;
    Ok(kit)
}

/// Linear map with rank-r RIC exactly 1/3 and two colliding rank-r
/// matrices, for `2 <= r <= min(m, n)/2`.
///
/// The anchor is the flat rank-2r diagonal `X1`; the map keeps the
/// coefficients of an orthonormal basis extending `vec(X1)` except the
/// first, scaled by `sqrt(4/3)`, so its output dimension is `m n - 1`.
pub fn sharp_counterexample_matrix(m: usize, n: usize, r: usize) -> Result<CounterexampleKit> {
    if r < 2 || 2 * r > m.min(n) {
        return Err(Error::InvalidInput(format!(
            "need 2 <= r <= min(m,n)/2, got m={m}, n={n}, r={r}"
        )));
    }
    let d = m * n;
    let amp = 1.0 / ((2 * r) as f64).sqrt();
    let anchor = DenseMatrix::diag(&vec![amp; 2 * r], m, n);
    let basis = orthonormal_extend(&anchor.vec_col_major())?;
    let scale = (4.0f64 / 3.0).sqrt();
    // Rows are the basis coefficients 2..mn, scaled.
    let mut rep = DenseMatrix::zeros(d - 1, d);
    for row in 0..d - 1 {
        for col in 0..d {
            rep.set(row, col, scale * basis.get(col, row + 1));
        }
    }
    let map = LinearMap::new(m, n, rep)?;
    let x = DenseMatrix::diag(&vec![1.0; r], m, n);
    let mut y_diag = vec![0.0; 2 * r];
    for v in y_diag.iter_mut().skip(r) {
        *v = -1.0;
    }
    let y = DenseMatrix::diag(&y_diag, m, n);
    let kit = CounterexampleKit {
        operator: KitOperator::Map(map),
        order: r,
        anchor: KitElement::Matrix(anchor),
        colliding_pair: (KitElement::Matrix(x), KitElement::Matrix(y)),
        claimed_ric: 1.0 / 3.0,
    };
    kit.verify()?;
    Ok(kit)
}

/// Whether `|<B, X>| <= ||B||_F * sqrt(sum of the top-r squared singular
/// values of X)` (within 1e-10). `B` must have rank at most `r`.
pub fn rank_r_inner_bound_check(b: &DenseMatrix, x: &DenseMatrix, r: usize) -> Result<bool> {
    if (b.rows(), b.cols()) != (x.rows(), x.cols()) {
        return Err(Error::InvalidInput("shape mismatch".into()));
    }
    let fb = crate::numerics::svd(b)?;
    if fb.rank() > r {
        return Err(Error::InvalidInput(format!(
            "rank {} exceeds the bound order {r}",
            fb.rank()
        )));
    }
    let fx = crate::numerics::svd(x)?;
    let top: f64 = fx.singular.iter().take(r).map(|s| s * s).sum();
    Ok(b.inner(x).abs() <= b.frob_norm() * top.sqrt() + 1e-10)
}

/// Dimensions for [`identifiability_gap_example`].
#[derive(Clone, Copy, Debug)]
pub enum GapKind {
    Signal { p: usize },
    Matrix { m: usize, n: usize },
}

/// Order-1 operators with RIC zero that still cannot distinguish two
/// 1-sparse (rank-1) inputs, showing no RIC condition can certify order-1
/// recovery.
///
/// Signal: `b -> (b_1 - b_2, b_3, ..., b_p)` collides `e_1` with `-e_2`.
/// Matrix: `X -> (x_11 - x_22, x_12 + x_21, rest)` collides `diag(1, 0, ...)`
/// with `diag(0, -1, 0, ...)`; both are isometries on their order-1 cones.
pub fn identifiability_gap_example(kind: GapKind) -> Result<CounterexampleKit> {
    match kind {
        GapKind::Signal { p } => {
            if p < 2 {
                return Err(Error::InvalidInput("need p >= 2".into()));
            }
            let mut a = DenseMatrix::zeros(p - 1, p);
            a.set(0, 0, 1.0);
            a.set(0, 1, -1.0);
            for i in 2..p {
                a.set(i - 1, i, 1.0);
            }
            // Isometry on every 1-sparse vector: ||A e_j|| = 1 for all j.
            for j in 0..p {
                let mut e = vec![0.0; p];
                e[j] = 1.0;
                let img = l2_norm(&a.matvec(&e));
                if (img - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidWitness(format!("||A e_{j}|| = {img}")));
                }
            }
            let mut gamma = vec![0.0; p];
            gamma[0] = 1.0;
            let mut eta = vec![0.0; p];
            eta[1] = -1.0;
            let mut anchor = vec![0.0; p];
            anchor[0] = 1.0 / 2f64.sqrt();
            anchor[1] = 1.0 / 2f64.sqrt();
            let kit = CounterexampleKit {
                operator: KitOperator::Signal(a),
                order: 1,
                anchor: KitElement::Vector(anchor),
                colliding_pair: (KitElement::Vector(gamma), KitElement::Vector(eta)),
                claimed_ric: 0.0,
            };
            kit.verify()?;
            Ok(kit)
        }
        GapKind::Matrix { m, n } => {
            if m < 2 || n < 2 {
                return Err(Error::InvalidInput("need m, n >= 2".into()));
            }
            let d = m * n;
            // Column-major index of entry (i, j).
            let at = |i: usize, j: usize| j * m + i;
            let mut rep = DenseMatrix::zeros(d - 2, d);
            rep.set(0, at(0, 0), 1.0);
            rep.set(0, at(1, 1), -1.0);
            rep.set(1, at(0, 1), 1.0);
            rep.set(1, at(1, 0), 1.0);
            let mut row = 2;
            for j in 0..n {
                for i in 0..m {
                    if (i, j) == (0, 0) || (i, j) == (1, 1) || (i, j) == (0, 1) || (i, j) == (1, 0)
                    {
                        continue;
                    }
                    rep.set(row, at(i, j), 1.0);
                    row += 1;
                }
            }
            debug_assert_eq!(row, d - 2);
            let map = LinearMap::new(m, n, rep)?;
            let x = DenseMatrix::diag(&[1.0], m, n);
            let y = DenseMatrix::diag(&[0.0, -1.0], m, n);
            let mut anchor = DenseMatrix::zeros(m, n);
            anchor.set(0, 0, 1.0 / 2f64.sqrt());
            anchor.set(1, 1, 1.0 / 2f64.sqrt());
            let kit = CounterexampleKit {
                operator: KitOperator::Map(map),
                order: 1,
                anchor: KitElement::Matrix(anchor),
                colliding_pair: (KitElement::Matrix(x), KitElement::Matrix(y)),
                claimed_ric: 0.0,
            };
            kit.verify()?;
            Ok(kit)
        }
    }
}
