//! Toolkit for sparse-signal and low-rank-matrix recovery built around
//! restricted isometry constants (RIC).
//!
//! The crate provides:
//!
//! * [`numerics`] — self-contained dense linear algebra (Jacobi eigen/SVD,
//!   Cholesky, Householder bases) and a primal simplex LP solver.
//! * [`division`] — a constructive division of a non-increasing sequence into
//!   row allocations with per-row caps, plus the power-tail inequality it
//!   implies.
//! * [`rip`] — exact RIC computation for sensing matrices by support
//!   enumeration and certified lower bounds for linear maps on low-rank
//!   matrices, with the `delta_sk <= (2s-1) delta_k` scaling check.
//! * [`nsp`] — null-space-property certification for matrices (exact, via
//!   LPs over sign patterns) and randomized falsification for linear maps.
//! * [`recovery`] — constrained l1 / nuclear-norm programs (equality, l2
//!   ball, Dantzig-selector constraints) solved by LP or ADMM, and the
//!   closed-form error bounds they satisfy when the RIC is below 1/3.
//! * [`constructions`] — explicit operators with RIC exactly 1/3 that admit
//!   colliding sparse/low-rank pairs, and the order-1 identifiability gap
//!   examples.
//! * [`harness`] — instance generators, experiment drivers, the Dantzig
//!   oracle-inequality Monte Carlo, and CSV/JSON file I/O behind the
//!   `ripkit` CLI.

pub mod constructions;
pub mod division;
pub mod error;
pub mod harness;
pub mod nsp;
pub mod numerics;
pub mod recovery;
pub mod rip;
pub mod rng;
pub mod tol;

pub use error::{Error, Result};
pub use numerics::DenseMatrix;
