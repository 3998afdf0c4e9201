//! Centralized numeric tolerances. Every module pulls its thresholds from
//! here; no ad-hoc magic constants at call sites.

/// Relative accuracy of extreme eigenvalues and singular values.
pub const EIG_TOL: f64 = 1e-10;

/// Max allowed `|Q^T Q - I|` entry for orthonormal factors.
pub const ORTHO_TOL: f64 = 1e-12;

/// Simplex pivot threshold: entries smaller in magnitude are treated as zero.
pub const LP_PIVOT_TOL: f64 = 1e-9;

/// Relative Frobenius error allowed when reconstructing a matrix from its SVD.
pub const SVD_RECONSTRUCT_TOL: f64 = 1e-10;

/// Singular values at or below `RANK_TOL * sigma_max` count as zero rank.
pub const RANK_TOL: f64 = 1e-10;

/// Feasibility slack granted to solver outputs (`||A b - y|| <= eta + FEAS_TOL`).
pub const FEAS_TOL: f64 = 1e-8;

/// ADMM stops when both primal and dual residuals drop below this.
pub const ADMM_TOL: f64 = 1e-8;

/// ADMM iteration cap; hitting it returns the best iterate with `converged = false`.
pub const ADMM_MAX_ITERS: usize = 100_000;

/// Absolute tolerance on the division tableau constraints.
pub const DIVISION_TOL: f64 = 1e-12;

/// Dead band around 1/2 for the three-way null-space-property verdict.
pub const NSP_DEADBAND: f64 = 1e-9;

/// Tolerance when re-evaluating RIC values at their witnesses.
pub const WITNESS_TOL: f64 = 1e-8;

/// Default cap on support/sign enumerations.
pub const DEFAULT_ENUM_BUDGET: u64 = 1_000_000;

/// Objective slack allowed over a known feasible reference point.
pub const OBJECTIVE_TOL: f64 = 1e-6;
