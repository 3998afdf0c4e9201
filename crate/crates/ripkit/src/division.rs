//! Constructive division of a non-increasing sequence.
//!
//! Given `a_1 >= ... >= a_m >= 0` whose head (first `r` terms, plus an
//! optional slack) carries at least as much mass as its tail, [`divide`]
//! allocates every entry `a_j` with `j > 2r` across `r` rows so that row `i`
//! stays below the capped budget `(sum(head) + slack)/r - a_{r+i}`. The
//! allocation is the certificate behind the power-tail inequality checked by
//! [`tail_power_check`].

use crate::error::{Error, Result};
use crate::numerics::stable_sum;
use crate::tol::DIVISION_TOL;

/// Allocation `s[i][j]` of the tail entries `a_{2r+1..m}` over `r` rows.
#[derive(Clone, Debug)]
pub struct DivisionTableau {
    pub r: usize,
    pub m: usize,
    pub a: Vec<f64>,
    pub slack: f64,
    /// Row-major `r x (m - 2r)`; column `jj` corresponds to `a[2r + jj]`.
    pub s: Vec<f64>,
}

impl DivisionTableau {
    pub fn allocation(&self, row: usize, col: usize) -> f64 {
        self.s[row * (self.m - 2 * self.r) + col]
    }

    /// Sum of allocations in one row.
    pub fn row_load(&self, row: usize) -> f64 {
        let w = self.m - 2 * self.r;
        stable_sum(self.s[row * w..(row + 1) * w].iter().copied())
    }

    /// Verifies the two defining constraints:
    /// column sums reproduce the tail entries, and every row plus its
    /// `a_{r+i}` stays within the head average plus slack.
    pub fn check(&self) -> Result<()> {
        let r = self.r;
        let w = self.m - 2 * r;
        if self.s.len() != r * w || self.a.len() != self.m {
            return Err(Error::InvalidInput("tableau shape mismatch".into()));
        }
        for j in 0..w {
            let col_sum = stable_sum((0..r).map(|i| self.allocation(i, j)));
            if (col_sum - self.a[2 * r + j]).abs() > DIVISION_TOL {
                return Err(Error::InfeasibleDivision(format!(
                    "column {j}: sum {col_sum} != a {}",
                    self.a[2 * r + j]
                )));
            }
        }
        if self.s.iter().any(|&v| v < -DIVISION_TOL) {
            return Err(Error::InfeasibleDivision("negative allocation".into()));
        }
        let head_avg = (stable_sum(self.a[..r].iter().copied()) + self.slack) / r as f64;
        for i in 0..r {
            let load = self.a[r + i] + self.row_load(i);
            if head_avg < load - DIVISION_TOL {
                return Err(Error::InfeasibleDivision(format!(
                    "row {i}: cap {head_avg} < load {load}"
                )));
            }
        }
        Ok(())
    }
}

fn validate_sequence(a: &[f64], r: usize, slack: f64) -> Result<()> {
    let m = a.len();
    if r == 0 || m < 2 * r {
        return Err(Error::InvalidInput(format!(
            "need m >= 2r >= 2, got m={m}, r={r}"
        )));
    }
    if !slack.is_finite() || slack < 0.0 {
        return Err(Error::InvalidInput(
            "slack must be a nonnegative real".into(),
        ));
    }
    if !a.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidInput("non-finite sequence entry".into()));
    }
    if a.iter().any(|&x| x < -DIVISION_TOL) {
        return Err(Error::InvalidInput(
            "sequence entries must be nonnegative".into(),
        ));
    }
    for w in a.windows(2) {
        if w[1] > w[0] + DIVISION_TOL {
            return Err(Error::InvalidInput(
                "sequence must be non-increasing".into(),
            ));
        }
    }
    let head = stable_sum(a[..r].iter().copied());
    let tail = stable_sum(a[r..].iter().copied());
    if head + slack < tail - DIVISION_TOL {
        return Err(Error::InfeasibleDivision(format!(
            "head {head} + slack {slack} < tail {tail}"
        )));
    }
    Ok(())
}

/// Greedy capacity fill: row capacities `(sum(head) + slack)/r - a_{r+i}` are
/// consumed in increasing row order while columns `2r+1..m` are poured in
/// left to right. Any tableau satisfying the constraints is acceptable; this
/// one is deterministic and O(r m).
pub fn divide(a: &[f64], r: usize, slack: f64) -> Result<DivisionTableau> {
    validate_sequence(a, r, slack)?;
    let m = a.len();
    let w = m - 2 * r;
    let head_avg = (stable_sum(a[..r].iter().copied()) + slack) / r as f64;
    // a_{r+i} <= a_r <= head average, so caps are nonnegative up to rounding.
    let mut cap: Vec<f64> = (0..r).map(|i| (head_avg - a[r + i]).max(0.0)).collect();
    let mut s = vec![0.0; r * w];
    for j in 0..w {
        let mut remaining = a[2 * r + j];
        for i in 0..r {
            if remaining <= 0.0 {
                break;
            }
            let take = remaining.min(cap[i]);
            if take > 0.0 {
                s[i * w + j] = take;
                cap[i] -= take;
                remaining -= take;
            }
        }
        if remaining > 0.0 {
            // Rounding residue (provably at most a few ulps of the total
            // mass): absorb it in the row with the most room.
            let (best, _) = cap
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.partial_cmp(y.1).unwrap())
                .expect("r >= 1");
            s[best * w + j] += remaining;
            cap[best] = (cap[best] - remaining).max(0.0);
        }
    }
    let tableau = DivisionTableau {
        r,
        m,
        a: a.to_vec(),
        slack,
        s,
    };
    tableau.check()?;
    Ok(tableau)
}

/// Whether `sum_{j>r} a_j^alpha <= r * ((sum_{i<=r} a_i^alpha / r)^(1/alpha)
/// + slack/r)^alpha` holds (within `1e-12`). Requires `alpha >= 1` and the
/// same feasibility precondition as [`divide`].
pub fn tail_power_check(a: &[f64], r: usize, slack: f64, alpha: f64) -> Result<bool> {
    if !(alpha >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "alpha must be >= 1, got {alpha}"
        )));
    }
    validate_sequence(a, r, slack)?;
    let lhs = stable_sum(a[r..].iter().map(|&x| x.powf(alpha)));
    let head_mean_pow = stable_sum(a[..r].iter().map(|&x| x.powf(alpha))) / r as f64;
    let rhs = r as f64 * (head_mean_pow.powf(1.0 / alpha) + slack / r as f64).powf(alpha);
    Ok(lhs <= rhs + DIVISION_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    #[test]
    fn no_columns_when_m_equals_2r() {
        let t = divide(&[3.0, 2.0], 1, 0.0).unwrap();
        assert!(t.s.is_empty());
        t.check().unwrap();
    }

    #[test]
    fn single_row_single_column() {
        let t = divide(&[5.0, 3.0, 2.0], 1, 0.0).unwrap();
        assert_eq!(t.s.len(), 1);
        assert!((t.allocation(0, 0) - 2.0).abs() < 1e-15);
        // Cap: 5 >= 3 + 2.
        assert!(5.0 + 1e-12 >= 3.0 + t.row_load(0) + t.a[1] - 3.0);
        t.check().unwrap();
    }

    #[test]
    fn greedy_fills_first_row_first() {
        // a = (4,4,3,2,1), r = 2: caps are (4 - 3, 4 - 2) = (1, 2); the single
        // column a_5 = 1 fits entirely in row 0.
        let t = divide(&[4.0, 4.0, 3.0, 2.0, 1.0], 2, 0.0).unwrap();
        assert!((t.allocation(0, 0) - 1.0).abs() < 1e-15);
        assert!(t.allocation(1, 0).abs() < 1e-15);
        t.check().unwrap();
    }

    #[test]
    fn rejects_infeasible_head() {
        assert!(matches!(
            divide(&[1.0, 1.0, 1.0, 1.0], 1, 0.0),
            Err(Error::InfeasibleDivision(_))
        ));
        // Slack repairs it.
        divide(&[1.0, 1.0, 1.0, 1.0], 1, 2.0)
            .unwrap()
            .check()
            .unwrap();
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(divide(&[1.0], 1, 0.0).is_err()); // m < 2r
        assert!(divide(&[1.0, 2.0], 1, 0.0).is_err()); // increasing
        assert!(divide(&[1.0, 1.0], 0, 0.0).is_err()); // r = 0
        assert!(divide(&[1.0, -1.0], 1, 0.0).is_err()); // negative
        assert!(divide(&[1.0, 1.0], 1, -0.5).is_err()); // negative slack
        assert!(tail_power_check(&[1.0, 1.0], 1, 0.0, 0.5).is_err()); // alpha < 1
    }

    #[test]
    fn exact_boundary_is_accepted() {
        // head == tail exactly
        let t = divide(&[2.0, 1.0, 1.0], 1, 0.0).unwrap();
        t.check().unwrap();
        assert!(tail_power_check(&[2.0, 1.0, 1.0], 1, 0.0, 1.0).unwrap());
    }

    #[test]
    fn tail_power_arithmetic_cases() {
        // 3^2 + 2^2 = 13 <= 25
        assert!(tail_power_check(&[5.0, 3.0, 2.0], 1, 0.0, 2.0).unwrap());
        // boundary at alpha = 1: 5 <= 5
        assert!(tail_power_check(&[5.0, 3.0, 2.0], 1, 0.0, 1.0).unwrap());
        // symmetric boundary: 1 <= 1
        assert!(tail_power_check(&[1.0, 1.0], 1, 0.0, 3.0).unwrap());
    }

    fn random_feasible(rng: &mut SplitMix64) -> (Vec<f64>, usize, f64) {
        let r = 1 + rng.next_index(5);
        let m = 2 * r + rng.next_index(9);
        let mut a: Vec<f64> = (0..m).map(|_| 10.0 * rng.next_f64()).collect();
        a.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let head: f64 = a[..r].iter().sum();
        let tail: f64 = a[r..].iter().sum();
        let deficit = (tail - head).max(0.0);
        // A third of the draws lean on slack (sometimes exactly on the
        // boundary); the rest inflate the head to stay feasible at slack 0.
        match rng.next_index(3) {
            0 => (a, r, deficit + rng.next_f64()),
            1 => (a, r, deficit),
            _ => {
                if head > 0.0 && deficit > 0.0 {
                    let factor = tail / head;
                    for x in a[..r].iter_mut() {
                        *x *= factor;
                    }
                }
                (a, r, 0.0)
            }
        }
    }

    #[test]
    fn random_tableaux_satisfy_both_constraints() {
        let mut rng = SplitMix64::new(2024);
        for _ in 0..10_000 {
            let (a, r, slack) = random_feasible(&mut rng);
            let t = divide(&a, r, slack).expect("feasible by construction");
            t.check().unwrap();
            for &alpha in &[1.0, 2.0, 3.0] {
                assert!(
                    tail_power_check(&a, r, slack, alpha).unwrap(),
                    "alpha={alpha} a={a:?} r={r} slack={slack}"
                );
            }
        }
    }

    // Permuting the fill order changes s but never feasibility: pour columns
    // right-to-left into rows in decreasing order and re-check.
    #[test]
    fn alternative_fill_order_is_also_feasible() {
        let mut rng = SplitMix64::new(7);
        for _ in 0..500 {
            let (a, r, slack) = random_feasible(&mut rng);
            let m = a.len();
            let w = m - 2 * r;
            let head: f64 = a[..r].iter().sum();
            let head_avg = (head + slack) / r as f64;
            let mut cap: Vec<f64> = (0..r).map(|i| (head_avg - a[r + i]).max(0.0)).collect();
            let mut s = vec![0.0; r * w];
            for j in (0..w).rev() {
                let mut remaining = a[2 * r + j];
                for i in (0..r).rev() {
                    let take = remaining.min(cap[i]);
                    s[i * w + j] = take;
                    cap[i] -= take;
                    remaining -= take;
                }
                if remaining > 1e-9 {
                    panic!("reverse fill failed: residue {remaining}");
                }
                if remaining > 0.0 {
                    s[(r - 1) * w + j] += remaining;
                }
            }
            let t = DivisionTableau { r, m, a, slack, s };
            t.check().unwrap();
        }
    }
}
