//! Constrained l1 / nuclear-norm recovery programs and their error bounds.
//!
//! `solve_signal` minimizes `||b||_1` over `{A b - y in B}` and
//! `solve_matrix` minimizes `||X||_*` over `{M(X) - b in B}`, where `B` is
//! one of three constraint sets: `{0}`, an l2 ball of radius `eta`, or the
//! Dantzig set (`||A^T z||_inf <= eta`, spectral norm for maps). Equality
//! and Dantzig signal programs also have exact LP formulations.

mod admm;
mod lp;

pub use admm::{solve_matrix, solve_signal_admm};
pub use lp::solve_signal_lp;

use crate::error::{Error, Result};
use crate::numerics::{l2_norm, svd, DenseMatrix};
use serde::{Deserialize, Serialize};

/// Feasible set for the residual of a recovery program.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// `A b = y` exactly.
    Equality,
    /// `||A b - y||_2 <= eta`.
    L2Ball,
    /// `||A^T (A b - y)||_inf <= eta` (signal) or `||M*(M(X) - b)|| <= eta`
    /// in spectral norm (matrix).
    Dantzig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Lp,
    Admm,
}

/// Linear map `R^{m x n} -> R^q` stored as its `q x (m n)` matrix acting on
/// column-major vectorized inputs.
#[derive(Clone, Debug)]
pub struct LinearMap {
    q: usize,
    m: usize,
    n: usize,
    rep: DenseMatrix,
}

impl LinearMap {
    pub fn new(m: usize, n: usize, rep: DenseMatrix) -> Result<Self> {
        if rep.cols() != m * n || m == 0 || n == 0 || rep.rows() == 0 {
            return Err(Error::InvalidInput(format!(
                "representation {}x{} does not act on {m}x{n} matrices",
                rep.rows(),
                rep.cols()
            )));
        }
        Ok(LinearMap {
            q: rep.rows(),
            m,
            n,
            rep,
        })
    }

    /// The identity on vectorized matrices (`q = m n`).
    pub fn vectorization(m: usize, n: usize) -> Self {
        LinearMap {
            q: m * n,
            m,
            n,
            rep: DenseMatrix::identity(m * n),
        }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rep(&self) -> &DenseMatrix {
        &self.rep
    }

    pub fn apply(&self, x: &DenseMatrix) -> Vec<f64> {
        assert_eq!(
            (x.rows(), x.cols()),
            (self.m, self.n),
            "map domain mismatch"
        );
        self.rep.matvec(&x.vec_col_major())
    }

    pub fn apply_vec(&self, v: &[f64]) -> Vec<f64> {
        self.rep.matvec(v)
    }

    /// Adjoint `M*(z) = reshape(rep^T z)`.
    pub fn adjoint(&self, z: &[f64]) -> DenseMatrix {
        DenseMatrix::from_vec_col_major(self.m, self.n, &self.rep.tr_matvec(z))
    }

    pub fn scale(&self, c: f64) -> Self {
        LinearMap {
            q: self.q,
            m: self.m,
            n: self.n,
            rep: self.rep.scale(c),
        }
    }

    /// Largest singular value of the representation.
    pub fn operator_norm(&self) -> f64 {
        svd(&self.rep)
            .map(|f| f.singular.first().copied().unwrap_or(0.0))
            .unwrap_or(0.0)
    }
}

/// One signal-recovery problem: data, constraint set, and optional truth.
#[derive(Clone, Debug)]
pub struct SignalInstance {
    pub a: DenseMatrix,
    pub y: Vec<f64>,
    pub truth: Option<Vec<f64>>,
    pub epsilon: f64,
    pub eta: f64,
    pub constraint: Constraint,
}

impl SignalInstance {
    pub fn new(a: DenseMatrix, y: Vec<f64>, constraint: Constraint, eta: f64) -> Result<Self> {
        if a.rows() != y.len() {
            return Err(Error::InvalidInput("observation length mismatch".into()));
        }
        if !(eta >= 0.0) {
            return Err(Error::InvalidInput("eta must be nonnegative".into()));
        }
        if constraint == Constraint::Equality && eta != 0.0 {
            return Err(Error::InvalidInput(
                "equality constraint forces eta = 0".into(),
            ));
        }
        Ok(SignalInstance {
            a,
            y,
            truth: None,
            epsilon: 0.0,
            eta,
            constraint,
        })
    }

    pub fn equality(a: DenseMatrix, y: Vec<f64>) -> Result<Self> {
        Self::new(a, y, Constraint::Equality, 0.0)
    }

    pub fn with_truth(mut self, truth: Vec<f64>, epsilon: f64) -> Self {
        self.truth = Some(truth);
        self.epsilon = epsilon;
        self
    }
}

/// One matrix-recovery problem.
#[derive(Clone, Debug)]
pub struct MatrixInstance {
    pub map: LinearMap,
    pub b: Vec<f64>,
    pub truth: Option<DenseMatrix>,
    pub epsilon: f64,
    pub eta: f64,
    pub constraint: Constraint,
}

impl MatrixInstance {
    pub fn new(map: LinearMap, b: Vec<f64>, constraint: Constraint, eta: f64) -> Result<Self> {
        if map.q() != b.len() {
            return Err(Error::InvalidInput("observation length mismatch".into()));
        }
        if !(eta >= 0.0) {
            return Err(Error::InvalidInput("eta must be nonnegative".into()));
        }
        if constraint == Constraint::Equality && eta != 0.0 {
            return Err(Error::InvalidInput(
                "equality constraint forces eta = 0".into(),
            ));
        }
        Ok(MatrixInstance {
            map,
            b,
            truth: None,
            epsilon: 0.0,
            eta,
            constraint,
        })
    }

    pub fn equality(map: LinearMap, b: Vec<f64>) -> Result<Self> {
        Self::new(map, b, Constraint::Equality, 0.0)
    }

    pub fn with_truth(mut self, truth: DenseMatrix, epsilon: f64) -> Self {
        self.truth = Some(truth);
        self.epsilon = epsilon;
        self
    }
}

/// Convergence report attached to every solve.
#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

/// Dispatches a signal solve to the LP or ADMM backend. The LP backend
/// covers the two polyhedral constraints; the l2 ball requires ADMM.
pub fn solve_signal(inst: &SignalInstance, method: SolveMethod) -> Result<(Vec<f64>, SolveReport)> {
    match method {
        SolveMethod::Lp => match inst.constraint {
            Constraint::Equality | Constraint::Dantzig => solve_signal_lp(inst),
            Constraint::L2Ball => Err(Error::InvalidInput(
                "the l2-ball constraint is not an LP; use the ADMM method".into(),
            )),
        },
        SolveMethod::Admm => solve_signal_admm(inst),
    }
}

/// Componentwise `sign(x) * max(|x| - tau, 0)`.
pub fn soft_threshold(x: f64, tau: f64) -> f64 {
    debug_assert!(tau >= 0.0);
    if x > tau {
        x - tau
    } else if x < -tau {
        x + tau
    } else {
        0.0
    }
}

pub fn soft_threshold_vec(xs: &[f64], tau: f64) -> Vec<f64> {
    xs.iter().map(|&x| soft_threshold(x, tau)).collect()
}

/// Proximal operator of the nuclear norm: soft-thresholds singular values.
pub fn singular_value_threshold(x: &DenseMatrix, tau: f64) -> Result<DenseMatrix> {
    if tau < 0.0 {
        return Err(Error::InvalidInput("tau must be nonnegative".into()));
    }
    let mut f = svd(x)?;
    for s in f.singular.iter_mut() {
        *s = soft_threshold(*s, tau);
    }
    Ok(f.reconstruct())
}

pub fn nuclear_norm(x: &DenseMatrix) -> f64 {
    svd(x).map(|f| f.nuclear_norm()).unwrap_or(f64::NAN)
}

pub fn spectral_norm(x: &DenseMatrix) -> f64 {
    svd(x)
        .map(|f| f.singular.first().copied().unwrap_or(0.0))
        .unwrap_or(f64::NAN)
}

/// Best k-term split of a vector: `head` keeps the k largest magnitudes
/// (ties to the lowest index), `tail = v - head`, `tail_norm = ||tail||_1`.
#[derive(Clone, Debug)]
pub struct VectorSplit {
    pub head: Vec<f64>,
    pub tail: Vec<f64>,
    pub tail_norm: f64,
}

pub fn best_s_term_vector(v: &[f64], s: usize) -> VectorSplit {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&i, &j| v[j].abs().partial_cmp(&v[i].abs()).unwrap().then(i.cmp(&j)));
    let mut head = vec![0.0; v.len()];
    for &i in order.iter().take(s) {
        head[i] = v[i];
    }
    let tail: Vec<f64> = v.iter().zip(&head).map(|(x, h)| x - h).collect();
    let tail_norm = crate::numerics::l1_norm(&tail);
    VectorSplit {
        head,
        tail,
        tail_norm,
    }
}

/// Best rank-s split of a matrix: `head` keeps the s leading singular
/// triplets, `tail_norm` is the nuclear norm of the rest.
#[derive(Clone, Debug)]
pub struct MatrixSplit {
    pub head: DenseMatrix,
    pub tail: DenseMatrix,
    pub tail_norm: f64,
}

pub fn best_s_term_matrix(x: &DenseMatrix, s: usize) -> Result<MatrixSplit> {
    let f = svd(x)?;
    let mut truncated = f.clone();
    for (i, sv) in truncated.singular.iter_mut().enumerate() {
        if i >= s {
            *sv = 0.0;
        }
    }
    let head = truncated.reconstruct();
    let tail = x.sub(&head);
    let tail_norm = f.singular.iter().skip(s).sum();
    Ok(MatrixSplit {
        head,
        tail,
        tail_norm,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    /// l2-ball constraint bound.
    L2,
    /// Dantzig-selector constraint bound.
    Ds,
}

/// Worst-case recovery error guaranteed when the RIC of order `s` is
/// `delta < 1/3`, the noise satisfies its constraint with level `epsilon`,
/// the program radius is `eta >= epsilon`, and the truth has best-s-term
/// approximation tail `tail` (l1 for signals, nuclear for matrices).
pub fn error_bound(
    mode: BoundMode,
    delta: f64,
    epsilon: f64,
    eta: f64,
    s: usize,
    tail: f64,
) -> Result<f64> {
    if !(0.0..1.0 / 3.0).contains(&delta) {
        return Err(Error::OutOfRegime(format!(
            "delta {delta} must lie in [0, 1/3)"
        )));
    }
    if s < 2 {
        return Err(Error::InvalidInput("order must be at least 2".into()));
    }
    if epsilon < 0.0 || eta < 0.0 || tail < 0.0 {
        return Err(Error::InvalidInput(
            "epsilon, eta, tail must be nonnegative".into(),
        ));
    }
    let gap = 1.0 - 3.0 * delta;
    let noise_coef = match mode {
        BoundMode::L2 => (2.0 * (1.0 + delta)).sqrt() / gap,
        BoundMode::Ds => (2.0 * s as f64).sqrt() / gap,
    };
    let tail_coef = (2.0 * 2f64.sqrt() * (2.0 * delta + (gap * delta).sqrt()) + 2.0 * gap) / gap;
    Ok(noise_coef * (epsilon + eta) + tail_coef * tail / (s as f64).sqrt())
}

/// `||A bhat - y||_2 <= eta + tol`, or the Dantzig / equality analogue.
pub fn signal_feasibility_gap(inst: &SignalInstance, bhat: &[f64]) -> f64 {
    let resid = crate::numerics::sub_vec(&inst.a.matvec(bhat), &inst.y);
    match inst.constraint {
        Constraint::Equality => l2_norm(&resid),
        Constraint::L2Ball => (l2_norm(&resid) - inst.eta).max(0.0),
        Constraint::Dantzig => {
            (crate::numerics::linf_norm(&inst.a.tr_matvec(&resid)) - inst.eta).max(0.0)
        }
    }
}

pub fn matrix_feasibility_gap(inst: &MatrixInstance, xhat: &DenseMatrix) -> f64 {
    let resid = crate::numerics::sub_vec(&inst.map.apply(xhat), &inst.b);
    match inst.constraint {
        Constraint::Equality => l2_norm(&resid),
        Constraint::L2Ball => (l2_norm(&resid) - inst.eta).max(0.0),
        Constraint::Dantzig => (spectral_norm(&inst.map.adjoint(&resid)) - inst.eta).max(0.0),
    }
}
