//! Null-space-property certification.
//!
//! A sensing matrix admits uniform k-sparse recovery by l1 minimization
//! exactly when every nonzero null vector carries strictly less than half of
//! its l1 mass on its k largest entries. [`nsp_certify_signal`] settles this
//! by maximizing `sum_{i in S} s_i b_i` over the null space intersected with
//! the l1 ball, one LP per support/sign pair; the sharp constructions sit
//! exactly at 1/2, so verdicts are three-way with a dead band.
//!
//! The matrix-side condition (nuclear mass of the top r singular values vs
//! the rest, over the null space of the map) has no known polynomial
//! certificate; [`nsp_falsify_matrix`] only searches for violations.

use crate::error::{Error, Result};
use crate::numerics::{l1_norm, l2_norm, simplex_lp, DenseMatrix, LpStatus};
use crate::recovery::{best_s_term_vector, LinearMap};
use crate::rip::binomial;
use crate::rng::SplitMix64;
use crate::tol::{DEFAULT_ENUM_BUDGET, NSP_DEADBAND, RANK_TOL};
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NspStatus {
    /// Worst head fraction at most `1/2 - deadband`: uniform recovery holds.
    Holds,
    /// Within the dead band of 1/2: the boundary case, reported as such.
    Boundary,
    /// Worst head fraction at least `1/2 + deadband`: recovery fails.
    Fails,
}

/// Outcome of the exact signal-side certification.
#[derive(Clone, Debug)]
pub struct NspCertificate {
    pub order: usize,
    pub status: NspStatus,
    /// Max over unit-l1 null vectors of the l1 mass on k coordinates.
    pub worst_value: f64,
    pub worst_support: Vec<usize>,
    pub worst_signs: Vec<i8>,
    /// Unit-l1 null vector attaining `worst_value`; absent when the null
    /// space is trivial.
    pub worst_vector: Option<Vec<f64>>,
}

/// Orthonormal basis of the numerical null space (singular values at or
/// below `RANK_TOL * sigma_max` count as zero). Columns may be empty.
pub fn null_space_basis(a: &DenseMatrix) -> Result<DenseMatrix> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    if !a.entries().iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    let (sigmas, v) = crate::numerics::right_vectors_full(a);
    let cutoff = sigmas.first().copied().unwrap_or(0.0) * RANK_TOL;
    let null_cols: Vec<usize> = (0..sigmas.len()).filter(|&j| sigmas[j] <= cutoff).collect();
    Ok(v.select_columns(&null_cols))
}

/// Shared constraint data for the certification LPs: only the objective
/// changes across support/sign pairs.
struct NullSpaceLp {
    p: usize,
    eq: DenseMatrix,
    eq_rhs: Vec<f64>,
    ones: DenseMatrix,
    nonneg: Vec<bool>,
}

impl NullSpaceLp {
    fn build(a: &DenseMatrix) -> Result<Self> {
        let p = a.cols();
        let mut eq = DenseMatrix::zeros(a.rows(), 2 * p);
        for i in 0..a.rows() {
            for j in 0..p {
                eq.set(i, j, a.get(i, j));
                eq.set(i, p + j, -a.get(i, j));
            }
        }
        Ok(NullSpaceLp {
            p,
            eq,
            eq_rhs: vec![0.0; a.rows()],
            ones: DenseMatrix::new(1, 2 * p, vec![1.0; 2 * p])?,
            nonneg: vec![true; 2 * p],
        })
    }

    /// Maximize `sum_{i in S} signs_i * b_i` over `{A b = 0, ||b||_1 <= 1}`,
    /// split as `b = u - v` with `u, v >= 0`.
    fn worst_mass(&self, support: &[usize], signs: &[i8]) -> Result<(f64, Vec<f64>)> {
        let p = self.p;
        let mut cost = vec![0.0; 2 * p];
        for (&i, &s) in support.iter().zip(signs) {
            cost[i] = -(s as f64);
            cost[p + i] = s as f64;
        }
        let sol = simplex_lp(
            &cost,
            &self.eq,
            &self.eq_rhs,
            &self.ones,
            &[1.0],
            &self.nonneg,
        )?;
        match sol.status {
            LpStatus::Optimal => {
                let split = sol.point.expect("optimal point");
                let beta: Vec<f64> = (0..p).map(|j| split[j] - split[p + j]).collect();
                Ok((-sol.objective.expect("optimal objective"), beta))
            }
            // b = 0 is always feasible, and the feasible set is bounded.
            _ => Err(Error::InvalidInput("null-space LP must be solvable".into())),
        }
    }
}

pub fn nsp_certify_signal(a: &DenseMatrix, k: usize) -> Result<NspCertificate> {
    nsp_certify_signal_with_budget(a, k, DEFAULT_ENUM_BUDGET)
}

pub fn nsp_certify_signal_with_budget(
    a: &DenseMatrix,
    k: usize,
    budget: u64,
) -> Result<NspCertificate> {
    let p = a.cols();
    if k == 0 || k > p {
        return Err(Error::InvalidInput(format!(
            "order k={k} out of range for p={p}"
        )));
    }
    if k >= 64 {
        return Err(Error::InvalidInput(
            "sign enumeration limited to k < 64".into(),
        ));
    }
    let lp_count = binomial(p, k).saturating_mul(1u128 << k);
    if lp_count > budget as u128 {
        return Err(Error::BudgetExceeded {
            required: lp_count,
            budget,
        });
    }

    // Trivial null space: nothing to certify.
    if null_space_basis(a)?.cols() == 0 {
        return Ok(NspCertificate {
            order: k,
            status: NspStatus::Holds,
            worst_value: 0.0,
            worst_support: Vec::new(),
            worst_signs: Vec::new(),
            worst_vector: None,
        });
    }

    let lp = NullSpaceLp::build(a)?;
    // Antipodal patterns have equal optima (b -> -b), so the first sign is
    // pinned to +1; the reported witness represents both.
    let mut tasks: Vec<(Vec<usize>, u64)> = Vec::new();
    crate::rip::for_each_support(p, k, |support| {
        for pattern in 0u64..(1u64 << (k - 1)) {
            tasks.push((support.to_vec(), pattern));
        }
    });

    #[derive(Clone)]
    struct Worst {
        value: f64,
        rank: usize,
        support: Vec<usize>,
        signs: Vec<i8>,
        vector: Vec<f64>,
    }
    let empty = || Worst {
        value: f64::NEG_INFINITY,
        rank: usize::MAX,
        support: Vec::new(),
        signs: Vec::new(),
        vector: Vec::new(),
    };
    // One LP per (support, sign) pair, data-parallel with an
    // order-independent max-reduction keyed on (value, enumeration rank).
    let worst = tasks
        .par_iter()
        .enumerate()
        .map(|(rank, (support, pattern))| -> Result<Worst> {
            let signs: Vec<i8> = (0..k)
                .map(|j| {
                    if j == 0 || (pattern >> (j - 1)) & 1 == 0 {
                        1
                    } else {
                        -1
                    }
                })
                .collect();
            let (value, beta) = lp.worst_mass(support, &signs)?;
            Ok(Worst {
                value,
                rank,
                support: support.clone(),
                signs,
                vector: beta,
            })
        })
        .try_reduce(empty, |a, b| {
            Ok(
                if b.value > a.value || (b.value == a.value && b.rank < a.rank) {
                    b
                } else {
                    a
                },
            )
        })?;
    let worst_support = worst.support;
    let worst_signs = worst.signs;
    let worst_vector = worst.vector;

    // Normalize the witness onto the unit l1 sphere and recompute the value
    // there so the certificate is internally consistent.
    let norm = l1_norm(&worst_vector);
    let (worst_value, worst_vector) = if norm > 1e-12 {
        let beta: Vec<f64> = worst_vector.iter().map(|x| x / norm).collect();
        let value: f64 = worst_support
            .iter()
            .zip(&worst_signs)
            .map(|(&i, &s)| s as f64 * beta[i])
            .sum();
        (value, Some(beta))
    } else {
        (0.0, None)
    };

    let status = if worst_value <= 0.5 - NSP_DEADBAND {
        NspStatus::Holds
    } else if worst_value >= 0.5 + NSP_DEADBAND {
        NspStatus::Fails
    } else {
        NspStatus::Boundary
    };
    Ok(NspCertificate {
        order: k,
        status,
        worst_value,
        worst_support,
        worst_signs,
        worst_vector,
    })
}

/// A null-space element of the map whose top-r nuclear mass reaches 1/2.
#[derive(Clone, Debug)]
pub struct MatrixNspWitness {
    /// Unit-Frobenius matrix in the null space.
    pub matrix: DenseMatrix,
    /// `||X_max(r)||_* / ||X||_*` at the witness.
    pub ratio: f64,
    /// Whether the ratio lies within the dead band of 1/2.
    pub boundary: bool,
}

/// Searches the null space of the map for a violation of the rank-r
/// null-space property, maximizing the head-to-total nuclear ratio by
/// subgradient ascent over null-space coefficients from random starts.
/// `budget` caps the total number of objective evaluations. Returning
/// `None` is not a proof that the property holds.
pub fn nsp_falsify_matrix(
    map: &LinearMap,
    r: usize,
    budget: usize,
    seed: u64,
) -> Result<Option<MatrixNspWitness>> {
    let (m, n) = (map.m(), map.n());
    if r == 0 || r > m.min(n) {
        return Err(Error::InvalidInput(format!(
            "rank order r={r} out of range"
        )));
    }
    let basis = null_space_basis(map.rep())?;
    let dim = basis.cols();
    if dim == 0 {
        return Ok(None);
    }

    let reshape =
        |c: &[f64]| -> DenseMatrix { DenseMatrix::from_vec_col_major(m, n, &basis.matvec(c)) };
    let head_ratio = |x: &DenseMatrix| -> Result<(f64, DenseMatrix)> {
        let f = crate::numerics::svd(x)?;
        let total: f64 = f.singular.iter().sum();
        let head: f64 = f.singular.iter().take(r).sum();
        // Subgradient of head/total via U_r V_r^T and U V^T.
        let mut head_grad = DenseMatrix::zeros(m, n);
        let mut total_grad = DenseMatrix::zeros(m, n);
        let kmax = f.singular.len();
        for t in 0..kmax {
            for i in 0..m {
                for j in 0..n {
                    let outer = f.left.get(i, t) * f.right.get(j, t);
                    total_grad.set(i, j, total_grad.get(i, j) + outer);
                    if t < r {
                        head_grad.set(i, j, head_grad.get(i, j) + outer);
                    }
                }
            }
        }
        let ratio = if total > 0.0 { head / total } else { 0.0 };
        let grad = if total > 0.0 {
            head_grad
                .scale(1.0 / total)
                .sub(&total_grad.scale(head / (total * total)))
        } else {
            total_grad
        };
        Ok((ratio, grad))
    };

    let mut rng = SplitMix64::new(seed);
    let iters_per_start = 100usize;
    let starts = (budget / iters_per_start).max(1);
    let step = 0.2;
    let mut best_ratio = f64::NEG_INFINITY;
    let mut best_c = vec![0.0; dim];
    for start in 0..starts {
        let mut c: Vec<f64> = if start == 0 {
            let mut e = vec![0.0; dim];
            e[0] = 1.0;
            e
        } else {
            let g = rng.normal_vec(dim);
            let norm = l2_norm(&g);
            g.iter().map(|x| x / norm).collect()
        };
        for _ in 0..iters_per_start {
            let x = reshape(&c);
            let (ratio, grad_x) = head_ratio(&x)?;
            if ratio > best_ratio {
                best_ratio = ratio;
                best_c = c.clone();
            }
            // Pull the gradient back to coefficient space and renormalize.
            let grad_c = basis.tr_matvec(&grad_x.vec_col_major());
            let mut next: Vec<f64> = c
                .iter()
                .zip(&grad_c)
                .map(|(ci, gi)| ci + step * gi)
                .collect();
            let norm = l2_norm(&next);
            if norm == 0.0 {
                break;
            }
            for v in next.iter_mut() {
                *v /= norm;
            }
            c = next;
        }
    }

    if best_ratio < 0.5 - NSP_DEADBAND {
        return Ok(None);
    }
    let x = reshape(&best_c);
    let norm = x.frob_norm();
    let x = x.scale(1.0 / norm);
    // Re-verify before reporting.
    let image_norm = l2_norm(&map.apply(&x));
    if image_norm > 1e-8 {
        return Err(Error::InvalidWitness(format!(
            "search left the null space: ||M(X)|| = {image_norm}"
        )));
    }
    let f = crate::numerics::svd(&x)?;
    let total: f64 = f.singular.iter().sum();
    let head: f64 = f.singular.iter().take(r).sum();
    let ratio = head / total;
    Ok(Some(MatrixNspWitness {
        matrix: x,
        ratio,
        boundary: (ratio - 0.5).abs() <= NSP_DEADBAND,
    }))
}

/// Builds the colliding pair certified by a violating null vector: `gamma`
/// is the k-term head of `beta` and `eta` the negated tail, so
/// `A gamma = A eta` with `||eta||_1 <= ||gamma||_1`, i.e. `gamma` is not
/// the unique l1 minimizer for its own measurements.
pub fn failing_pair_from_witness(
    a: &DenseMatrix,
    beta: &[f64],
    k: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if beta.len() != a.cols() {
        return Err(Error::InvalidWitness("witness length mismatch".into()));
    }
    let image = l2_norm(&a.matvec(beta));
    if image > 1e-8 {
        return Err(Error::InvalidWitness(format!(
            "||A beta|| = {image} exceeds 1e-8"
        )));
    }
    let split = best_s_term_vector(beta, k);
    let head_mass = l1_norm(&split.head);
    if head_mass < split.tail_norm - 1e-12 {
        return Err(Error::InvalidWitness(format!(
            "head mass {head_mass} below tail mass {}",
            split.tail_norm
        )));
    }
    let eta: Vec<f64> = split.tail.iter().map(|x| -x).collect();
    Ok((split.head, eta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::sub_vec;
    use crate::rng::SplitMix64;

    fn gaussian(rows: usize, cols: usize, rng: &mut SplitMix64, scale: f64) -> DenseMatrix {
        let mut a = DenseMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                a.set(i, j, rng.next_normal() * scale);
            }
        }
        a
    }

    #[test]
    fn null_basis_trivial() {
        assert_eq!(
            null_space_basis(&DenseMatrix::identity(2)).unwrap().cols(),
            0
        );
    }

    #[test]
    fn null_basis_of_row_sums() {
        let a = DenseMatrix::new(1, 2, vec![1.0, 1.0]).unwrap();
        let basis = null_space_basis(&a).unwrap();
        assert_eq!(basis.cols(), 1);
        let col = basis.column(0);
        let s = 1.0 / 2f64.sqrt();
        assert!((col[0].abs() - s).abs() < 1e-12);
        assert!((col[0] + col[1]).abs() < 1e-12);
    }

    #[test]
    fn null_basis_dimensions_and_quality() {
        let mut rng = SplitMix64::new(81);
        let a = gaussian(4, 9, &mut rng, 1.0);
        let basis = null_space_basis(&a).unwrap();
        assert_eq!(basis.cols(), 5);
        let gram = basis.transpose().matmul(&basis);
        assert!(gram.sub(&DenseMatrix::identity(5)).max_abs() < 1e-12);
        let a_norm = crate::recovery::spectral_norm(&a);
        for j in 0..basis.cols() {
            let img = a.matvec(&basis.column(j));
            assert!(l2_norm(&img) <= 1e-10 * a_norm);
        }
    }

    #[test]
    fn null_basis_of_sharp_construction_is_the_anchor() {
        let kit = crate::constructions::sharp_counterexample_signal(8, 2).unwrap();
        let crate::constructions::KitOperator::Signal(a) = &kit.operator else {
            panic!()
        };
        let crate::constructions::KitElement::Vector(anchor) = &kit.anchor else {
            panic!()
        };
        let basis = null_space_basis(a).unwrap();
        assert_eq!(basis.cols(), 1);
        let col = basis.column(0);
        let aligned: f64 = col.iter().zip(anchor).map(|(c, b)| c * b).sum();
        assert!(
            (aligned.abs() - 1.0).abs() < 1e-10,
            "inner product {aligned}"
        );
    }

    #[test]
    fn invertible_matrix_holds_trivially() {
        let cert = nsp_certify_signal(&DenseMatrix::identity(4), 2).unwrap();
        assert_eq!(cert.status, NspStatus::Holds);
        assert_eq!(cert.worst_value, 0.0);
        assert!(cert.worst_vector.is_none());
    }

    #[test]
    fn single_null_direction_worst_value() {
        // Null space = span{(1, -1)}: for k = 1 the worst unit-l1 mass on
        // one coordinate is exactly 1/2 -> boundary.
        let a = DenseMatrix::new(1, 2, vec![1.0, 1.0]).unwrap();
        let cert = nsp_certify_signal(&a, 1).unwrap();
        assert_eq!(cert.status, NspStatus::Boundary);
        assert!((cert.worst_value - 0.5).abs() < 1e-9);
        let beta = cert.worst_vector.unwrap();
        assert!((l1_norm(&beta) - 1.0).abs() < 1e-10);
        assert!(l2_norm(&a.matvec(&beta)) < 1e-8);
    }

    #[test]
    fn heavy_null_vector_fails() {
        // Null space contains (1, 0.2): head fraction 1/1.2 > 1/2 at k = 1.
        let a = DenseMatrix::new(1, 2, vec![0.2, -1.0]).unwrap();
        let cert = nsp_certify_signal(&a, 1).unwrap();
        assert_eq!(cert.status, NspStatus::Fails);
        assert!((cert.worst_value - 1.0 / 1.2).abs() < 1e-8);
        // The witness converts into a colliding pair.
        let beta = cert.worst_vector.unwrap();
        let (gamma, eta) = failing_pair_from_witness(&a, &beta, 1).unwrap();
        let lhs = a.matvec(&gamma);
        let rhs = a.matvec(&eta);
        assert!(l2_norm(&sub_vec(&lhs, &rhs)) < 1e-8);
        assert!(l1_norm(&eta) <= l1_norm(&gamma) + 1e-12);
    }

    #[test]
    fn budget_enforced() {
        let a = DenseMatrix::identity(40);
        assert!(matches!(
            nsp_certify_signal_with_budget(&a, 10, 1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn negation_and_permutation_symmetry() {
        let mut rng = SplitMix64::new(83);
        let a = gaussian(5, 8, &mut rng, 0.5);
        let cert = nsp_certify_signal(&a, 2).unwrap();
        let negated = nsp_certify_signal(&a.scale(-1.0), 2).unwrap();
        assert!((cert.worst_value - negated.worst_value).abs() < 1e-8);
        // Swap two columns; the worst value is unchanged.
        let perm: Vec<usize> = {
            let mut v: Vec<usize> = (0..8).collect();
            v.swap(0, 5);
            v
        };
        let permuted = a.select_columns(&perm);
        let cert_p = nsp_certify_signal(&permuted, 2).unwrap();
        assert!((cert.worst_value - cert_p.worst_value).abs() < 1e-8);
    }

    #[test]
    fn falsify_trivial_null_space_returns_none() {
        let map = LinearMap::vectorization(2, 2);
        assert!(nsp_falsify_matrix(&map, 1, 500, 1).unwrap().is_none());
    }

    #[test]
    fn falsify_witness_is_reverified() {
        // q = mn - 4 leaves a 4-dimensional null space; any witness the
        // search returns must actually certify the claimed ratio.
        let mut rng = SplitMix64::new(85);
        let (m, n) = (3, 3);
        let rep = gaussian(m * n - 4, m * n, &mut rng, 1.0);
        let map = LinearMap::new(m, n, rep).unwrap();
        if let Some(w) = nsp_falsify_matrix(&map, 1, 2000, 7).unwrap() {
            assert!(l2_norm(&map.apply(&w.matrix)) < 1e-8);
            let f = crate::numerics::svd(&w.matrix).unwrap();
            let total: f64 = f.singular.iter().sum();
            let head = f.singular[0];
            assert!((head / total - w.ratio).abs() < 1e-10);
            assert!(w.ratio >= 0.5 - NSP_DEADBAND);
        }
    }

    #[test]
    fn failing_pair_validates_preconditions() {
        let a = DenseMatrix::identity(3);
        // Not a null vector.
        assert!(matches!(
            failing_pair_from_witness(&a, &[1.0, 0.0, 0.0], 1),
            Err(Error::InvalidWitness(_))
        ));
        // Exactly k-sparse null vector: eta = 0 and gamma unrecoverable
        // from y = 0.
        let zero_map = DenseMatrix::zeros(1, 3);
        let (gamma, eta) = failing_pair_from_witness(&zero_map, &[0.0, 2.0, 0.0], 1).unwrap();
        assert_eq!(gamma, vec![0.0, 2.0, 0.0]);
        assert!(eta.iter().all(|&x| x == 0.0));
    }
}
