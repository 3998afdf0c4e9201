//! ADMM backends for the three constraint sets.
//!
//! Splittings, with scaled duals throughout:
//!
//! * equality — `min ||z||_1 + I{Ax=y}(x)` s.t. `x = z`; the x-update is the
//!   affine projection built from a precomputed pseudoinverse of `A`.
//! * l2 ball — consensus copies `z` (l1 prox) and `w = Ax - y` (ball
//!   projection); the x-update solves `(I + A^T A) x = rhs` with a cached
//!   Cholesky factor.
//! * Dantzig — consensus copy `c = A^T(Ax - y)` clamped to `[-eta, eta]`
//!   (singular values clamped to `eta` in the matrix case); the x-update
//!   solves `(I + G^2) x = rhs` with `G = A^T A`.
//!
//! The penalty starts at 1 and is rebalanced by factors of 2 whenever one
//! residual exceeds the other tenfold.

use crate::error::{Error, Result};
use crate::numerics::{
    add_vec, cholesky, dot, l1_norm, l2_norm, pseudo_inverse, scale_vec, sub_vec, svd,
    CholeskyFactor, DenseMatrix,
};
use crate::recovery::{
    soft_threshold_vec, Constraint, MatrixInstance, SignalInstance, SolveReport,
};
use crate::tol::{ADMM_MAX_ITERS, ADMM_TOL};

/// Residual balancing applied sparsely; adapting every iteration makes the
/// penalty oscillate and stalls convergence.
const REBALANCE_PERIOD: usize = 50;

struct Penalty {
    rho: f64,
}

impl Penalty {
    fn new() -> Self {
        Penalty { rho: 1.0 }
    }

    /// Residual balancing; rescales the scaled duals in place.
    fn rebalance(&mut self, primal: f64, dual: f64, duals: &mut [&mut Vec<f64>]) {
        if primal > 10.0 * dual && self.rho < 1e6 {
            self.rho *= 2.0;
            for u in duals.iter_mut() {
                for v in u.iter_mut() {
                    *v *= 0.5;
                }
            }
        } else if dual > 10.0 * primal && self.rho > 1e-6 {
            self.rho *= 0.5;
            for u in duals.iter_mut() {
                for v in u.iter_mut() {
                    *v *= 2.0;
                }
            }
        }
    }
}

fn project_l2_ball(v: &[f64], radius: f64) -> Vec<f64> {
    let norm = l2_norm(v);
    if norm <= radius || norm == 0.0 {
        v.to_vec()
    } else {
        scale_vec(v, radius / norm)
    }
}

fn clamp_vec(v: &[f64], bound: f64) -> Vec<f64> {
    v.iter().map(|&x| x.clamp(-bound, bound)).collect()
}

/// Distance from `y` to the range of the operator, given its pseudoinverse.
fn range_gap(apply: impl Fn(&[f64]) -> Vec<f64>, pinv: &DenseMatrix, y: &[f64]) -> f64 {
    let projected = apply(&pinv.matvec(y));
    l2_norm(&sub_vec(&projected, y))
}

pub fn solve_signal_admm(inst: &SignalInstance) -> Result<(Vec<f64>, SolveReport)> {
    let a = &inst.a;
    let p = a.cols();
    let y = &inst.y;
    match inst.constraint {
        Constraint::Equality => {
            let pinv = pseudo_inverse(a)?;
            if range_gap(|v| a.matvec(v), &pinv, y) > 1e-8 * (1.0 + l2_norm(y)) {
                return Err(Error::Infeasible("y is not in the range of A".into()));
            }
            let pinv_y = pinv.matvec(y);
            let step = |v: &[f64]| -> Vec<f64> {
                // Projection onto {x : Ax = y}: v + A+(y - Av).
                let correction = pinv.matvec(&a.matvec(v));
                (0..v.len())
                    .map(|i| v[i] + pinv_y[i] - correction[i])
                    .collect()
            };
            let mut z = vec![0.0; p];
            let mut u = vec![0.0; p];
            let mut pen = Penalty::new();
            let mut x = vec![0.0; p];
            let mut report = SolveReport {
                objective: 0.0,
                iterations: 0,
                converged: false,
                primal_residual: f64::INFINITY,
                dual_residual: f64::INFINITY,
            };
            for it in 1..=ADMM_MAX_ITERS {
                x = step(&sub_vec(&z, &u));
                let z_old = z;
                z = soft_threshold_vec(&add_vec(&x, &u), 1.0 / pen.rho);
                let r = sub_vec(&x, &z);
                u = add_vec(&u, &r);
                let primal = l2_norm(&r);
                let dual = pen.rho * l2_norm(&sub_vec(&z, &z_old));
                report.iterations = it;
                report.primal_residual = primal;
                report.dual_residual = dual;
                if primal < ADMM_TOL && dual < ADMM_TOL {
                    report.converged = true;
                    break;
                }
                if it % REBALANCE_PERIOD == 0 {
                    pen.rebalance(primal, dual, &mut [&mut u]);
                }
            }
            report.objective = l1_norm(&x);
            Ok((x, report))
        }
        Constraint::L2Ball => {
            let pinv = pseudo_inverse(a)?;
            if range_gap(|v| a.matvec(v), &pinv, y) > inst.eta + 1e-8 * (1.0 + l2_norm(y)) {
                return Err(Error::Infeasible("no point satisfies the l2 ball".into()));
            }
            let mut normal = a.gram();
            for i in 0..p {
                normal.set(i, i, normal.get(i, i) + 1.0);
            }
            let factor = cholesky(&normal)?;
            let out = consensus_loop(
                p,
                y.len(),
                |v| a.matvec(v),
                |v| a.tr_matvec(v),
                &factor,
                y,
                |v| project_l2_ball(v, inst.eta),
            );
            Ok(out)
        }
        Constraint::Dantzig => {
            let gram = a.gram();
            let g = a.tr_matvec(y);
            let mut normal = gram.matmul(&gram);
            for i in 0..p {
                normal.set(i, i, normal.get(i, i) + 1.0);
            }
            let factor = cholesky(&normal)?;
            let out = consensus_loop(
                p,
                p,
                |v| gram.matvec(v),
                |v| gram.matvec(v), // G is symmetric
                &factor,
                &g,
                |v| clamp_vec(v, inst.eta),
            );
            Ok(out)
        }
    }
}

/// Three-block consensus ADMM shared by the l2 and Dantzig variants:
/// `min ||z||_1 + I_B(w)` s.t. `x = z`, `Op x - target = w`.
#[allow(clippy::too_many_arguments)]
fn consensus_loop(
    p: usize,
    rdim: usize,
    op: impl Fn(&[f64]) -> Vec<f64>,
    op_t: impl Fn(&[f64]) -> Vec<f64>,
    factor: &CholeskyFactor,
    target: &[f64],
    project: impl Fn(&[f64]) -> Vec<f64>,
) -> (Vec<f64>, SolveReport) {
    let mut z = vec![0.0; p];
    let mut w = vec![0.0; rdim];
    let mut u1 = vec![0.0; p];
    let mut u2 = vec![0.0; rdim];
    let mut pen = Penalty::new();
    let mut x = vec![0.0; p];
    let mut report = SolveReport {
        objective: 0.0,
        iterations: 0,
        converged: false,
        primal_residual: f64::INFINITY,
        dual_residual: f64::INFINITY,
    };
    for it in 1..=ADMM_MAX_ITERS {
        // x-update: (I + Op^T Op) x = (z - u1) + Op^T(target + w - u2)
        let mut rhs = sub_vec(&z, &u1);
        let opt_arg: Vec<f64> = (0..rdim).map(|i| target[i] + w[i] - u2[i]).collect();
        let correction = op_t(&opt_arg);
        for i in 0..p {
            rhs[i] += correction[i];
        }
        x = factor.solve(&rhs);

        let z_old = z;
        z = soft_threshold_vec(&add_vec(&x, &u1), 1.0 / pen.rho);
        let ox = op(&x);
        let w_old = w;
        let w_arg: Vec<f64> = (0..rdim).map(|i| ox[i] - target[i] + u2[i]).collect();
        w = project(&w_arg);

        let r1 = sub_vec(&x, &z);
        let r2: Vec<f64> = (0..rdim).map(|i| ox[i] - target[i] - w[i]).collect();
        u1 = add_vec(&u1, &r1);
        u2 = add_vec(&u2, &r2);

        let primal = (dot(&r1, &r1) + dot(&r2, &r2)).sqrt();
        // Stacked dual residual rho * ||dz + Op^T dw|| for constraints
        // (x - z, Op x - target - w).
        let s_vec = add_vec(&sub_vec(&z, &z_old), &op_t(&sub_vec(&w, &w_old)));
        let dual = pen.rho * l2_norm(&s_vec);
        report.iterations = it;
        report.primal_residual = primal;
        report.dual_residual = dual;
        if primal < ADMM_TOL && dual < ADMM_TOL {
            report.converged = true;
            break;
        }
        if it % REBALANCE_PERIOD == 0 {
            pen.rebalance(primal, dual, &mut [&mut u1, &mut u2]);
        }
    }
    report.objective = l1_norm(&x);
    (x, report)
}

/// Nuclear-norm minimization over the three constraint sets, by ADMM in the
/// vectorized domain with singular-value thresholding as the prox step.
pub fn solve_matrix(inst: &MatrixInstance) -> Result<(DenseMatrix, SolveReport)> {
    let map = &inst.map;
    let (m, n) = (map.m(), map.n());
    let d = m * n;
    let b = &inst.b;
    let svt_unit = |v: &[f64], tau: f64| -> Result<Vec<f64>> {
        let x = DenseMatrix::from_vec_col_major(m, n, v);
        Ok(crate::recovery::singular_value_threshold(&x, tau)?.vec_col_major())
    };
    let spectral_clamp = |v: &[f64], bound: f64| -> Result<Vec<f64>> {
        let x = DenseMatrix::from_vec_col_major(m, n, v);
        let mut f = svd(&x)?;
        for s in f.singular.iter_mut() {
            *s = s.min(bound);
        }
        Ok(f.reconstruct().vec_col_major())
    };

    let (xvec, mut report) = match inst.constraint {
        Constraint::Equality => {
            let pinv = pseudo_inverse(map.rep())?;
            if range_gap(|v| map.apply_vec(v), &pinv, b) > 1e-8 * (1.0 + l2_norm(b)) {
                return Err(Error::Infeasible("b is not in the range of the map".into()));
            }
            let pinv_b = pinv.matvec(b);
            let mut z = vec![0.0; d];
            let mut u = vec![0.0; d];
            let mut pen = Penalty::new();
            let mut x = vec![0.0; d];
            let mut report = SolveReport {
                objective: 0.0,
                iterations: 0,
                converged: false,
                primal_residual: f64::INFINITY,
                dual_residual: f64::INFINITY,
            };
            for it in 1..=ADMM_MAX_ITERS {
                let v = sub_vec(&z, &u);
                let correction = pinv.matvec(&map.apply_vec(&v));
                x = (0..d).map(|i| v[i] + pinv_b[i] - correction[i]).collect();
                let z_old = z;
                z = svt_unit(&add_vec(&x, &u), 1.0 / pen.rho)?;
                let r = sub_vec(&x, &z);
                u = add_vec(&u, &r);
                let primal = l2_norm(&r);
                let dual = pen.rho * l2_norm(&sub_vec(&z, &z_old));
                report.iterations = it;
                report.primal_residual = primal;
                report.dual_residual = dual;
                if primal < ADMM_TOL && dual < ADMM_TOL {
                    report.converged = true;
                    break;
                }
                if it % REBALANCE_PERIOD == 0 {
                    pen.rebalance(primal, dual, &mut [&mut u]);
                }
            }
            (x, report)
        }
        Constraint::L2Ball => {
            let pinv = pseudo_inverse(map.rep())?;
            if range_gap(|v| map.apply_vec(v), &pinv, b) > inst.eta + 1e-8 * (1.0 + l2_norm(b)) {
                return Err(Error::Infeasible("no point satisfies the l2 ball".into()));
            }
            let mut normal = map.rep().gram();
            for i in 0..d {
                normal.set(i, i, normal.get(i, i) + 1.0);
            }
            let factor = cholesky(&normal)?;
            matrix_consensus_loop(
                d,
                map.q(),
                |v| map.apply_vec(v),
                |v| map.rep().tr_matvec(v),
                &factor,
                b,
                &svt_unit,
                |v| Ok(project_l2_ball(v, inst.eta)),
            )?
        }
        Constraint::Dantzig => {
            let gram = map.rep().gram();
            let g = map.rep().tr_matvec(b);
            let mut normal = gram.matmul(&gram);
            for i in 0..d {
                normal.set(i, i, normal.get(i, i) + 1.0);
            }
            let factor = cholesky(&normal)?;
            matrix_consensus_loop(
                d,
                d,
                |v| gram.matvec(v),
                |v| gram.matvec(v),
                &factor,
                &g,
                &svt_unit,
                |v| spectral_clamp(v, inst.eta),
            )?
        }
    };
    let xhat = DenseMatrix::from_vec_col_major(m, n, &xvec);
    report.objective = crate::recovery::nuclear_norm(&xhat);
    Ok((xhat, report))
}

#[allow(clippy::too_many_arguments)]
fn matrix_consensus_loop(
    d: usize,
    rdim: usize,
    op: impl Fn(&[f64]) -> Vec<f64>,
    op_t: impl Fn(&[f64]) -> Vec<f64>,
    factor: &CholeskyFactor,
    target: &[f64],
    svt: &impl Fn(&[f64], f64) -> Result<Vec<f64>>,
    project: impl Fn(&[f64]) -> Result<Vec<f64>>,
) -> Result<(Vec<f64>, SolveReport)> {
    let mut z = vec![0.0; d];
    let mut w = vec![0.0; rdim];
    let mut u1 = vec![0.0; d];
    let mut u2 = vec![0.0; rdim];
    let mut pen = Penalty::new();
    let mut x = vec![0.0; d];
    let mut report = SolveReport {
        objective: 0.0,
        iterations: 0,
        converged: false,
        primal_residual: f64::INFINITY,
        dual_residual: f64::INFINITY,
    };
    for it in 1..=ADMM_MAX_ITERS {
        let mut rhs = sub_vec(&z, &u1);
        let opt_arg: Vec<f64> = (0..rdim).map(|i| target[i] + w[i] - u2[i]).collect();
        let correction = op_t(&opt_arg);
        for i in 0..d {
            rhs[i] += correction[i];
        }
        x = factor.solve(&rhs);

        let z_old = z;
        z = svt(&add_vec(&x, &u1), 1.0 / pen.rho)?;
        let ox = op(&x);
        let w_old = w;
        let w_arg: Vec<f64> = (0..rdim).map(|i| ox[i] - target[i] + u2[i]).collect();
        w = project(&w_arg)?;

        let r1 = sub_vec(&x, &z);
        let r2: Vec<f64> = (0..rdim).map(|i| ox[i] - target[i] - w[i]).collect();
        u1 = add_vec(&u1, &r1);
        u2 = add_vec(&u2, &r2);

        let primal = (dot(&r1, &r1) + dot(&r2, &r2)).sqrt();
        let s_vec = add_vec(&sub_vec(&z, &z_old), &op_t(&sub_vec(&w, &w_old)));
        let dual = pen.rho * l2_norm(&s_vec);
        report.iterations = it;
        report.primal_residual = primal;
        report.dual_residual = dual;
        if primal < ADMM_TOL && dual < ADMM_TOL {
            report.converged = true;
            break;
        }
        if it % REBALANCE_PERIOD == 0 {
            pen.rebalance(primal, dual, &mut [&mut u1, &mut u2]);
        }
    }
    Ok((x, report))
}
