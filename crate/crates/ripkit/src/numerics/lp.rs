//! Two-phase primal simplex on a dense tableau.
//!
//! Pivoting uses Bland's rule throughout (lowest eligible index for both the
//! entering and leaving variable), which prevents cycling on the degenerate
//! vertices that l1 reformulations produce and makes every solve
//! deterministic.

use crate::error::{Error, Result};
use crate::numerics::{dot, DenseMatrix};
use crate::tol::LP_PIVOT_TOL;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Outcome of [`simplex_lp`]. `point` and `objective` are present only when
/// `status == Optimal`.
#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub point: Option<Vec<f64>>,
    pub objective: Option<f64>,
    pub pivots: usize,
}

impl LpSolution {
    fn non_optimal(status: LpStatus, pivots: usize) -> Self {
        LpSolution {
            status,
            point: None,
            objective: None,
            pivots,
        }
    }
}

/// Minimizes `cost . x` subject to `eq_lhs x = eq_rhs`, `ub_lhs x <= ub_rhs`,
/// and `x[j] >= 0` wherever `nonneg[j]` is set (free otherwise).
///
/// Infeasibility and unboundedness are reported through the status, never as
/// errors; only malformed inputs error.
pub fn simplex_lp(
    cost: &[f64],
    eq_lhs: &DenseMatrix,
    eq_rhs: &[f64],
    ub_lhs: &DenseMatrix,
    ub_rhs: &[f64],
    nonneg: &[bool],
) -> Result<LpSolution> {
    let n = cost.len();
    if eq_lhs.cols() != n && eq_lhs.rows() > 0 {
        return Err(Error::InvalidInput("eq_lhs column count mismatch".into()));
    }
    if ub_lhs.cols() != n && ub_lhs.rows() > 0 {
        return Err(Error::InvalidInput("ub_lhs column count mismatch".into()));
    }
    if eq_lhs.rows() != eq_rhs.len() || ub_lhs.rows() != ub_rhs.len() || nonneg.len() != n {
        return Err(Error::InvalidInput("LP dimension mismatch".into()));
    }
    let finite = cost.iter().all(|x| x.is_finite())
        && eq_rhs.iter().all(|x| x.is_finite())
        && ub_rhs.iter().all(|x| x.is_finite())
        && eq_lhs.entries().iter().all(|x| x.is_finite())
        && ub_lhs.entries().iter().all(|x| x.is_finite());
    if !finite {
        return Err(Error::InvalidInput("non-finite LP data".into()));
    }

    // Expanded variables: x_j itself when nonneg, else x_j = pos - neg.
    // col_of[j] is the first expanded column of original variable j.
    let mut col_of = Vec::with_capacity(n);
    let mut n_exp = 0usize;
    for &nn in nonneg {
        col_of.push(n_exp);
        n_exp += if nn { 1 } else { 2 };
    }
    let m_rows = eq_lhs.rows() + ub_lhs.rows();
    let n_slack = ub_lhs.rows();
    let n_struct = n_exp + n_slack; // structural + slack, before artificials
    let n_total = n_struct + m_rows; // one artificial per row

    // Standard-form rows: [expanded | slack | artificial | rhs], rhs >= 0.
    let width = n_total + 1;
    let mut tab = vec![0.0; (m_rows + 1) * width];
    let idx = |r: usize, c: usize| r * width + c;

    let expand_row = |dst: &mut [f64], src: &dyn Fn(usize) -> f64| {
        for j in 0..n {
            let a = src(j);
            dst[col_of[j]] = a;
            if !nonneg[j] {
                dst[col_of[j] + 1] = -a;
            }
        }
    };

    for r in 0..eq_lhs.rows() {
        let row = &mut tab[idx(r, 0)..idx(r, 0) + width];
        expand_row(row, &|j| eq_lhs.get(r, j));
        row[n_total] = eq_rhs[r];
    }
    for r in 0..ub_lhs.rows() {
        let rr = eq_lhs.rows() + r;
        let row = &mut tab[idx(rr, 0)..idx(rr, 0) + width];
        expand_row(row, &|j| ub_lhs.get(r, j));
        row[n_exp + r] = 1.0; // slack
        row[n_total] = ub_rhs[r];
    }
    // Flip rows to nonnegative rhs, then install the artificial basis.
    for r in 0..m_rows {
        if tab[idx(r, n_total)] < 0.0 {
            for c in 0..width {
                tab[idx(r, c)] = -tab[idx(r, c)];
            }
        }
        tab[idx(r, n_struct + r)] = 1.0;
    }
    let mut basis: Vec<usize> = (0..m_rows).map(|r| n_struct + r).collect();

    // Phase 1: minimize the artificial sum.
    let phase1_cost: Vec<f64> = (0..n_total)
        .map(|c| if c >= n_struct { 1.0 } else { 0.0 })
        .collect();
    set_objective_row(&mut tab, width, m_rows, &basis, &phase1_cost);
    let mut pivots = 0usize;
    match run_simplex(&mut tab, width, m_rows, n_total, &mut basis, &mut pivots)? {
        SimplexOutcome::Optimal => {}
        SimplexOutcome::Unbounded => {
            // Phase 1 objective is bounded below by zero; cannot happen.
            return Err(Error::InvalidInput("phase-1 unbounded".into()));
        }
    }
    let rhs_scale = 1.0
        + eq_rhs
            .iter()
            .chain(ub_rhs.iter())
            .fold(0.0f64, |m, x| m.max(x.abs()));
    let phase1_objective = -tab[idx(m_rows, n_total)];
    if phase1_objective > 1e-8 * rhs_scale {
        return Ok(LpSolution::non_optimal(LpStatus::Infeasible, pivots));
    }

    // Drive remaining basic artificials out; rows that cannot pivot are
    // redundant (all-zero over structural columns) and are blanked.
    for r in 0..m_rows {
        if basis[r] < n_struct {
            continue;
        }
        let mut entering = None;
        for c in 0..n_struct {
            if tab[idx(r, c)].abs() > LP_PIVOT_TOL {
                entering = Some(c);
                break;
            }
        }
        if let Some(c) = entering {
            pivot(&mut tab, width, m_rows, r, c);
            basis[r] = c;
            pivots += 1;
        } else {
            for c in 0..width {
                tab[idx(r, c)] = 0.0;
            }
            tab[idx(r, n_struct + r)] = 1.0; // keep the artificial basic at level 0
        }
    }

    // Phase 2 over structural columns only.
    let mut phase2_cost = vec![0.0; n_total];
    for j in 0..n {
        phase2_cost[col_of[j]] = cost[j];
        if !nonneg[j] {
            phase2_cost[col_of[j] + 1] = -cost[j];
        }
    }
    set_objective_row(&mut tab, width, m_rows, &basis, &phase2_cost);
    match run_simplex(&mut tab, width, m_rows, n_struct, &mut basis, &mut pivots)? {
        SimplexOutcome::Unbounded => {
            return Ok(LpSolution::non_optimal(LpStatus::Unbounded, pivots))
        }
        SimplexOutcome::Optimal => {}
    }

    let mut x_exp = vec![0.0; n_total];
    for (r, &b) in basis.iter().enumerate() {
        x_exp[b] = tab[idx(r, n_total)];
    }
    let mut point = vec![0.0; n];
    for j in 0..n {
        point[j] = if nonneg[j] {
            x_exp[col_of[j]]
        } else {
            x_exp[col_of[j]] - x_exp[col_of[j] + 1]
        };
    }
    let objective = dot(cost, &point);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        point: Some(point),
        objective: Some(objective),
        pivots,
    })
}

enum SimplexOutcome {
    Optimal,
    Unbounded,
}

/// Rebuilds the objective row for the given costs: reduced costs
/// `c_j - c_B B^-1 a_j` and objective value `c_B B^-1 b` (negated in place).
fn set_objective_row(tab: &mut [f64], width: usize, m_rows: usize, basis: &[usize], costs: &[f64]) {
    let idx = |r: usize, c: usize| r * width + c;
    for c in 0..width {
        let mut v = if c < costs.len() { costs[c] } else { 0.0 };
        for r in 0..m_rows {
            let cb = costs[basis[r]];
            if cb != 0.0 {
                v -= cb * tab[idx(r, c)];
            }
        }
        tab[idx(m_rows, c)] = v;
    }
    // The rhs cell holds -objective and stays consistent under pivoting.
}

fn run_simplex(
    tab: &mut [f64],
    width: usize,
    m_rows: usize,
    allowed_cols: usize,
    basis: &mut [usize],
    pivots: &mut usize,
) -> Result<SimplexOutcome> {
    let idx = |r: usize, c: usize| r * width + c;
    let iter_cap = 50_000 + 200 * (width + m_rows);
    for _ in 0..iter_cap {
        // Bland: entering column = lowest index with negative reduced cost.
        let mut entering = None;
        for c in 0..allowed_cols {
            if tab[idx(m_rows, c)] < -LP_PIVOT_TOL {
                entering = Some(c);
                break;
            }
        }
        let Some(col) = entering else {
            return Ok(SimplexOutcome::Optimal);
        };
        // Ratio test; ties resolved by the lowest basic variable index.
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..m_rows {
            let a = tab[idx(r, col)];
            if a > LP_PIVOT_TOL {
                let ratio = tab[idx(r, width - 1)] / a;
                match leave {
                    None => leave = Some((r, ratio)),
                    Some((br, bratio)) => {
                        let tie = (ratio - bratio).abs() <= 1e-12 * (1.0 + bratio.abs());
                        if ratio < bratio - 1e-12 * (1.0 + bratio.abs())
                            || (tie && basis[r] < basis[br])
                        {
                            leave = Some((r, ratio));
                        }
                    }
                }
            }
        }
        let Some((row, _)) = leave else {
            return Ok(SimplexOutcome::Unbounded);
        };
        pivot(tab, width, m_rows, row, col);
        basis[row] = col;
        *pivots += 1;
    }
    Err(Error::InvalidInput("simplex iteration cap exceeded".into()))
}

fn pivot(tab: &mut [f64], width: usize, m_rows: usize, row: usize, col: usize) {
    let idx = |r: usize, c: usize| r * width + c;
    let p = tab[idx(row, col)];
    for c in 0..width {
        tab[idx(row, c)] /= p;
    }
    tab[idx(row, col)] = 1.0;
    for r in 0..=m_rows {
        if r == row {
            continue;
        }
        let f = tab[idx(r, col)];
        if f == 0.0 {
            continue;
        }
        for c in 0..width {
            tab[idx(r, c)] -= f * tab[idx(row, c)];
        }
        tab[idx(r, col)] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::l1_norm;

    fn no_rows(n: usize) -> DenseMatrix {
        DenseMatrix::zeros(0, n)
    }

    #[test]
    fn bounded_maximization() {
        // min -x s.t. x <= 1, x >= 0  ->  x = 1, objective -1
        let ub = DenseMatrix::from_rows(&[vec![1.0]]).unwrap();
        let sol = simplex_lp(&[-1.0], &no_rows(1), &[], &ub, &[1.0], &[true]).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.point.unwrap()[0] - 1.0).abs() < 1e-12);
        assert!((sol.objective.unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_equality() {
        // min x s.t. x = -1, x >= 0
        let eq = DenseMatrix::from_rows(&[vec![1.0]]).unwrap();
        let sol = simplex_lp(&[1.0], &eq, &[-1.0], &no_rows(1), &[], &[true]).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_below() {
        // min -x s.t. x >= 0 only
        let sol = simplex_lp(&[-1.0], &no_rows(1), &[], &no_rows(1), &[], &[true]).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn free_variable_split() {
        // min |shift|-style: minimize x with x free, x >= -3 via -x <= 3.
        let ub = DenseMatrix::from_rows(&[vec![-1.0]]).unwrap();
        let sol = simplex_lp(&[1.0], &no_rows(1), &[], &ub, &[3.0], &[false]).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.point.unwrap()[0] + 3.0).abs() < 1e-12);
    }

    /// l1 projection onto a null space: min ||b - b0||_1 over {A b = 0},
    /// encoded with t-splitting, cross-checked by brute-force vertex
    /// enumeration of the standard-form polytope.
    #[test]
    fn l1_projection_matches_vertex_enumeration() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 1.0, 0.0, -1.0], vec![0.0, 1.0, -1.0, 2.0]])
            .unwrap();
        let b0 = [1.0, -2.0, 0.5, 0.0];
        let p = 4;
        // Variables: beta (free, p) then t (nonneg, p).
        // min sum t  s.t. A beta = 0,  beta - t <= b0,  -beta - t <= -b0.
        let mut cost = vec![0.0; 2 * p];
        for t in cost.iter_mut().skip(p) {
            *t = 1.0;
        }
        let mut eq = DenseMatrix::zeros(2, 2 * p);
        for r in 0..2 {
            for j in 0..p {
                eq.set(r, j, a.get(r, j));
            }
        }
        let mut ub = DenseMatrix::zeros(2 * p, 2 * p);
        let mut ub_rhs = vec![0.0; 2 * p];
        for j in 0..p {
            ub.set(j, j, 1.0);
            ub.set(j, p + j, -1.0);
            ub_rhs[j] = b0[j];
            ub.set(p + j, j, -1.0);
            ub.set(p + j, p + j, -1.0);
            ub_rhs[p + j] = -b0[j];
        }
        let mut nonneg = vec![false; p];
        nonneg.extend(vec![true; p]);
        let sol = simplex_lp(&cost, &eq, &[0.0, 0.0], &ub, &ub_rhs, &nonneg).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        let beta = &sol.point.as_ref().unwrap()[..p];
        // Feasibility of the returned point.
        for r in 0..2 {
            let resid: f64 = (0..p).map(|j| a.get(r, j) * beta[j]).sum();
            assert!(resid.abs() < 1e-8);
        }
        let obj = sol.objective.unwrap();
        let direct: f64 = (0..p).map(|j| (beta[j] - b0[j]).abs()).sum();
        assert!((obj - direct).abs() < 1e-8);

        // Oracle: the null space of A is 2-dimensional; parameterize and
        // scan the l1 objective over basic sign patterns by brute force on a
        // fine grid of the two coefficients around the optimum.
        let n1 = [1.0, -1.0, -1.0, 0.0f64];
        let n2 = [3.0, -2.0, 0.0, 1.0f64]; // A n2 = 0 as well
        for r in 0..2 {
            let chk1: f64 = (0..p).map(|j| a.get(r, j) * n1[j]).sum();
            let chk2: f64 = (0..p).map(|j| a.get(r, j) * n2[j]).sum();
            assert!(chk1.abs() < 1e-12 && chk2.abs() < 1e-12);
        }
        let mut best = f64::INFINITY;
        let steps = 140;
        for i in 0..=steps {
            for j in 0..=steps {
                let s = -3.5 + 7.0 * i as f64 / steps as f64;
                let t = -3.5 + 7.0 * j as f64 / steps as f64;
                let val: f64 = (0..p).map(|x| (s * n1[x] + t * n2[x] - b0[x]).abs()).sum();
                best = best.min(val);
            }
        }
        assert!(obj <= best + 1e-6, "simplex {obj} vs grid {best}");
    }

    /// Weak-duality style certification on small random LPs: the simplex
    /// objective equals the best objective over all basic feasible points
    /// found by enumerating every column subset.
    #[test]
    fn certified_by_basic_solution_enumeration() {
        use crate::rng::SplitMix64;
        let mut rng = SplitMix64::new(41);
        for trial in 0..25 {
            let n = 6;
            let m = 3;
            let mut eq = DenseMatrix::zeros(m, n);
            for i in 0..m {
                for j in 0..n {
                    eq.set(i, j, rng.next_normal());
                }
            }
            let x_feas: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
            let rhs = eq.matvec(&x_feas); // guarantees feasibility
            let cost: Vec<f64> = (0..n).map(|_| rng.next_normal()).collect();
            let ub = DenseMatrix::identity(n); // x <= 2 keeps it bounded
            let ub_rhs = vec![2.0; n];
            let sol = simplex_lp(&cost, &eq, &rhs, &ub, &ub_rhs, &vec![true; n]).unwrap();
            assert_eq!(sol.status, LpStatus::Optimal, "trial {trial}");
            let obj = sol.objective.unwrap();
            let point = sol.point.unwrap();
            // Feasibility of the returned vertex.
            let resid = crate::numerics::sub_vec(&eq.matvec(&point), &rhs);
            assert!(l1_norm(&resid) < 1e-7);
            assert!(point.iter().all(|&x| x >= -1e-9 && x <= 2.0 + 1e-9));

            let best = brute_force_best(&cost, &eq, &rhs, 2.0);
            assert!(
                (obj - best).abs() <= 1e-7 * (1.0 + best.abs()),
                "trial {trial}: simplex {obj} vs enumeration {best}"
            );
        }
    }

    /// Minimum objective over all basic solutions of
    /// `{eq x = rhs, 0 <= x <= cap}` (standard form with slacks), by trying
    /// every basis. Exponential; fine for n <= 8.
    fn brute_force_best(cost: &[f64], eq: &DenseMatrix, rhs: &[f64], cap: f64) -> f64 {
        let n = cost.len();
        let m = eq.rows();
        // Standard form: [eq 0; I I] [x; s] = [rhs; cap]
        let total = 2 * n;
        let rows = m + n;
        let mut a = DenseMatrix::zeros(rows, total);
        let mut b = vec![0.0; rows];
        for i in 0..m {
            for j in 0..n {
                a.set(i, j, eq.get(i, j));
            }
            b[i] = rhs[i];
        }
        for j in 0..n {
            a.set(m + j, j, 1.0);
            a.set(m + j, n + j, 1.0);
            b[m + j] = cap;
        }
        let mut best = f64::INFINITY;
        let mut combo: Vec<usize> = (0..rows).collect();
        loop {
            if let Ok(x) = solve_square_subset(&a, &b, &combo) {
                let feasible = x.iter().all(|&v| v >= -1e-9);
                if feasible {
                    let mut full = vec![0.0; total];
                    for (pos, &c) in combo.iter().enumerate() {
                        full[c] = x[pos];
                    }
                    let obj: f64 = (0..n).map(|j| cost[j] * full[j]).sum();
                    best = best.min(obj);
                }
            }
            // Next combination of size `rows` from `total`.
            let mut i = rows;
            loop {
                if i == 0 {
                    return best;
                }
                i -= 1;
                if combo[i] != i + total - rows {
                    combo[i] += 1;
                    for l in i + 1..rows {
                        combo[l] = combo[l - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    fn solve_square_subset(
        a: &DenseMatrix,
        b: &[f64],
        cols: &[usize],
    ) -> std::result::Result<Vec<f64>, ()> {
        let n = cols.len();
        let mut m = vec![0.0; n * (n + 1)];
        for i in 0..n {
            for (jj, &c) in cols.iter().enumerate() {
                m[i * (n + 1) + jj] = a.get(i, c);
            }
            m[i * (n + 1) + n] = b[i];
        }
        // Gaussian elimination with partial pivoting.
        for col in 0..n {
            let mut piv = col;
            for r in col + 1..n {
                if m[r * (n + 1) + col].abs() > m[piv * (n + 1) + col].abs() {
                    piv = r;
                }
            }
            if m[piv * (n + 1) + col].abs() < 1e-10 {
                return Err(());
            }
            if piv != col {
                for c in 0..=n {
                    m.swap(col * (n + 1) + c, piv * (n + 1) + c);
                }
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = m[r * (n + 1) + col] / m[col * (n + 1) + col];
                for c in col..=n {
                    m[r * (n + 1) + c] -= f * m[col * (n + 1) + c];
                }
            }
        }
        Ok((0..n)
            .map(|i| m[i * (n + 1) + n] / m[i * (n + 1) + i])
            .collect())
    }
}
