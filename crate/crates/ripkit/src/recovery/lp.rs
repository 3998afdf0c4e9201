//! Exact LP formulations of the equality and Dantzig signal programs.

use crate::error::{Error, Result};
use crate::numerics::{l1_norm, simplex_lp, DenseMatrix, LpStatus};
use crate::recovery::{Constraint, SignalInstance, SolveReport};

/// Minimizes `||b||_1` by splitting `b = u - v` with `u, v >= 0` and solving
/// the resulting LP with the simplex method. Valid for the equality and
/// Dantzig constraints (both polyhedral).
pub fn solve_signal_lp(inst: &SignalInstance) -> Result<(Vec<f64>, SolveReport)> {
    let p = inst.a.cols();
    let cost = vec![1.0; 2 * p];
    let nonneg = vec![true; 2 * p];

    let solution = match inst.constraint {
        Constraint::Equality => {
            // [A | -A] [u; v] = y
            let mut eq = DenseMatrix::zeros(inst.a.rows(), 2 * p);
            for i in 0..inst.a.rows() {
                for j in 0..p {
                    eq.set(i, j, inst.a.get(i, j));
                    eq.set(i, p + j, -inst.a.get(i, j));
                }
            }
            simplex_lp(
                &cost,
                &eq,
                &inst.y,
                &DenseMatrix::zeros(0, 2 * p),
                &[],
                &nonneg,
            )?
        }
        Constraint::Dantzig => {
            // |G(u - v) - g| <= eta componentwise, G = A^T A, g = A^T y.
            let gram = inst.a.gram();
            let g = inst.a.tr_matvec(&inst.y);
            let mut ub = DenseMatrix::zeros(2 * p, 2 * p);
            let mut rhs = vec![0.0; 2 * p];
            for i in 0..p {
                for j in 0..p {
                    ub.set(i, j, gram.get(i, j));
                    ub.set(i, p + j, -gram.get(i, j));
                    ub.set(p + i, j, -gram.get(i, j));
                    ub.set(p + i, p + j, gram.get(i, j));
                }
                rhs[i] = g[i] + inst.eta;
                rhs[p + i] = inst.eta - g[i];
            }
            simplex_lp(
                &cost,
                &DenseMatrix::zeros(0, 2 * p),
                &[],
                &ub,
                &rhs,
                &nonneg,
            )?
        }
        Constraint::L2Ball => {
            return Err(Error::InvalidInput("l2 ball has no LP formulation".into()))
        }
    };

    match solution.status {
        LpStatus::Optimal => {
            let split = solution.point.expect("optimal LP carries a point");
            let beta: Vec<f64> = (0..p).map(|j| split[j] - split[p + j]).collect();
            let report = SolveReport {
                objective: l1_norm(&beta),
                iterations: solution.pivots,
                converged: true,
                primal_residual: crate::recovery::signal_feasibility_gap(inst, &beta),
                dual_residual: 0.0,
            };
            Ok((beta, report))
        }
        LpStatus::Infeasible => Err(Error::Infeasible("empty constraint set".into())),
        LpStatus::Unbounded => Err(Error::InvalidInput(
            "l1 objective cannot be unbounded below".into(),
        )),
    }
}
