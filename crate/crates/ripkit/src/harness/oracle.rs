//! Dantzig-selector oracle-inequality Monte Carlo and the exhaustive
//! K-functional minimizer used to probe its proof.

use crate::error::{Error, Result};
use crate::harness::config::{Amplitude, OracleConfig};
use crate::harness::gen;
use crate::harness::TrialRecord;
use crate::numerics::{add_vec, l2_norm, linf_norm, spd_solve, sub_vec, DenseMatrix};
use crate::recovery::{
    solve_matrix, solve_signal, Constraint, LinearMap, MatrixInstance, SignalInstance, SolveMethod,
};
use crate::rip::{binomial, for_each_support, ric_exact_signal};
use crate::rng::{derive_seed, SplitMix64};
use rayon::prelude::*;
use serde::Serialize;
use std::time::Instant;

#[derive(Clone, Debug, Serialize)]
pub struct OracleSummary {
    pub config: OracleConfig,
    /// Exactly computed (signal) or analytically known (matrix) RIC of the
    /// accepted instance.
    pub delta: f64,
    pub lambda: f64,
    pub trials: usize,
    pub violations: usize,
    pub violation_rate: f64,
    /// Failure-probability allowance `1/sqrt(pi log p)` granted to the
    /// signal branch (the matrix branch has no pinned constant, so its rate
    /// is only reported).
    pub probability_bound: Option<f64>,
    /// Mean of squared-error to oracle-bound ratios over trials with a
    /// positive bound.
    pub mean_ratio: f64,
    /// Zero-truth trials where the noise correlation stayed within lambda.
    pub zero_in_radius: usize,
    /// ... of which the selector returned exactly zero.
    pub zero_recovered: usize,
}

/// Signal branch: draws a column-normalized Gaussian sensing matrix until
/// its exact `delta_k` is below 1/3 (its `delta_1` is zero by the unit
/// columns), then measures the squared Dantzig error against the oracle RHS
/// `512/(3 (1 - 3 delta)^2) log p sum_i min(beta_i^2, sigma^2)` per trial.
/// The matrix branch uses a scaled-orthogonal map (`delta_r = 0`
/// analytically) with the spectral radius and the matching RHS.
pub fn run_oracle_mc(config: &OracleConfig) -> Result<(Vec<TrialRecord>, OracleSummary)> {
    config.validate()?;
    crate::harness::pool::init_thread_pool();
    if config.is_signal() {
        run_signal_oracle(config)
    } else {
        run_matrix_oracle(config)
    }
}

struct OracleTrial {
    record: TrialRecord,
    ratio: Option<f64>,
    zero_in_radius: bool,
    zero_recovered: bool,
}

fn run_signal_oracle(config: &OracleConfig) -> Result<(Vec<TrialRecord>, OracleSummary)> {
    let p = config.p.unwrap();
    let k = config.k.unwrap();
    let sigma = config.sigma;
    let lambda = config.lambda()?;

    // Accepted instance: the oracle bound needs delta_k < 1/3 exactly.
    let mut seed_rng = SplitMix64::new(derive_seed(config.seed, u64::MAX));
    let mut accepted: Option<(DenseMatrix, f64)> = None;
    for _ in 0..50 {
        let a = gen::normalize_columns(&gen::gaussian_matrix(config.rows, p, &mut seed_rng));
        let delta = ric_exact_signal(&a, k)?.value;
        if delta < 1.0 / 3.0 {
            accepted = Some((a, delta));
            break;
        }
    }
    let Some((a, delta)) = accepted else {
        return Err(Error::OutOfRegime(format!(
            "no {}x{p} draw reached delta_{k} < 1/3; increase rows",
            config.rows
        )));
    };

    let rhs_factor = 512.0 / (3.0 * (1.0 - 3.0 * delta).powi(2)) * (p as f64).ln();
    let outcomes: Result<Vec<OracleTrial>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = SplitMix64::new(derive_seed(config.seed, trial as u64));
            let start = Instant::now();
            let beta = if config.zero_signal {
                vec![0.0; p]
            } else {
                gen::sparse_signal(p, k, Amplitude::Unit, &mut rng)?
            };
            let z = gen::gaussian_noise(a.rows(), sigma, &mut rng);
            let y = add_vec(&a.matvec(&beta), &z);
            let in_radius = linf_norm(&a.tr_matvec(&z)) <= lambda;
            let inst = SignalInstance::new(a.clone(), y, Constraint::Dantzig, lambda)?;
            let (bhat, report) = solve_signal(&inst, SolveMethod::Lp)?;
            let err = l2_norm(&sub_vec(&bhat, &beta));
            let lhs = err * err;
            let rhs: f64 = rhs_factor
                * beta
                    .iter()
                    .map(|b| b.powi(2).min(sigma * sigma))
                    .sum::<f64>();
            let success = lhs <= rhs || (rhs == 0.0 && lhs <= 1e-16);
            let zero_recovered = config.zero_signal && linf_norm(&bhat) <= 1e-8;
            Ok(OracleTrial {
                record: TrialRecord {
                    trial,
                    delta,
                    error: err,
                    bound: rhs.sqrt(),
                    success,
                    iters: report.iterations,
                    wall_ms: start.elapsed().as_secs_f64() * 1e3,
                },
                ratio: (rhs > 0.0).then_some(lhs / rhs),
                zero_in_radius: config.zero_signal && in_radius,
                zero_recovered,
            })
        })
        .collect();
    let summary_bound = 1.0 / (std::f64::consts::PI * (p as f64).ln()).sqrt();
    assemble(config, delta, lambda, Some(summary_bound), outcomes?)
}

fn run_matrix_oracle(config: &OracleConfig) -> Result<(Vec<TrialRecord>, OracleSummary)> {
    let (m, n) = config.matrix_shape()?;
    let r = config.r.unwrap();
    let sigma = config.sigma;
    let lambda = config.lambda()?;
    let maxdim = m.max(n) as f64;

    // Orthogonal map on the vectorized space: delta_r = 0 for every r.
    let mut seed_rng = SplitMix64::new(derive_seed(config.seed, u64::MAX));
    let rep = gen::random_orthogonal(m * n, &mut seed_rng);
    let map = LinearMap::new(m, n, rep)?;
    let delta = 0.0f64;
    let rhs_factor = 4096.0 * 12f64.ln() / (3.0 * (1.0 - 3.0 * delta).powi(2));

    let outcomes: Result<Vec<OracleTrial>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = SplitMix64::new(derive_seed(config.seed, trial as u64));
            let start = Instant::now();
            let x = if config.zero_signal {
                DenseMatrix::zeros(m, n)
            } else {
                gen::low_rank(m, n, r, &mut rng)?
            };
            let z = gen::gaussian_noise(map.q(), sigma, &mut rng);
            let b = add_vec(&map.apply(&x), &z);
            let in_radius = crate::recovery::spectral_norm(&map.adjoint(&z)) <= lambda;
            let inst = MatrixInstance::new(map.clone(), b, Constraint::Dantzig, lambda)?;
            let (xhat, report) = solve_matrix(&inst)?;
            let err = xhat.sub(&x).frob_norm();
            let lhs = err * err;
            let singulars = crate::numerics::svd(&x)?.singular;
            let rhs: f64 = rhs_factor
                * singulars
                    .iter()
                    .map(|s| (s * s).min(maxdim * sigma * sigma))
                    .sum::<f64>();
            let success = lhs <= rhs || (rhs == 0.0 && lhs <= 1e-16);
            let zero_recovered = config.zero_signal && xhat.max_abs() <= 1e-8;
            Ok(OracleTrial {
                record: TrialRecord {
                    trial,
                    delta,
                    error: err,
                    bound: rhs.sqrt(),
                    success,
                    iters: report.iterations,
                    wall_ms: start.elapsed().as_secs_f64() * 1e3,
                },
                ratio: (rhs > 0.0).then_some(lhs / rhs),
                zero_in_radius: config.zero_signal && in_radius,
                zero_recovered,
            })
        })
        .collect();
    assemble(config, delta, lambda, None, outcomes?)
}

fn assemble(
    config: &OracleConfig,
    delta: f64,
    lambda: f64,
    probability_bound: Option<f64>,
    mut outcomes: Vec<OracleTrial>,
) -> Result<(Vec<TrialRecord>, OracleSummary)> {
    outcomes.sort_by_key(|o| o.record.trial);
    let trials = outcomes.len();
    let violations = outcomes.iter().filter(|o| !o.record.success).count();
    let ratios: Vec<f64> = outcomes.iter().filter_map(|o| o.ratio).collect();
    let summary = OracleSummary {
        config: config.clone(),
        delta,
        lambda,
        trials,
        violations,
        violation_rate: violations as f64 / trials.max(1) as f64,
        probability_bound,
        mean_ratio: if ratios.is_empty() {
            0.0
        } else {
            ratios.iter().sum::<f64>() / ratios.len() as f64
        },
        zero_in_radius: outcomes.iter().filter(|o| o.zero_in_radius).count(),
        zero_recovered: outcomes.iter().filter(|o| o.zero_recovered).count(),
    };
    Ok((outcomes.into_iter().map(|o| o.record).collect(), summary))
}

/// Result of the exhaustive K-functional search
/// `min_xi gamma ||xi||_0 + ||A beta - A xi||_2^2` over supports of size at
/// most `k_max`.
#[derive(Clone, Debug, Serialize)]
pub struct KFunctionalResult {
    pub minimizer: Vec<f64>,
    pub support: Vec<usize>,
    pub value: f64,
    /// Radius `lambda = 4 sqrt(gamma / 3)` implied by the penalty.
    pub lambda: f64,
    /// `||A^T A (minimizer - beta)||_inf`.
    pub correlation: f64,
    /// Whether the correlation stays within `lambda / 2`.
    pub within_half_lambda: bool,
}

/// Brute-force minimizer: one least-squares fit per support. Errors if the
/// support count exceeds the enumeration budget.
pub fn k_functional_min(
    a: &DenseMatrix,
    beta: &[f64],
    gamma_penalty: f64,
    k_max: usize,
) -> Result<KFunctionalResult> {
    let p = a.cols();
    if beta.len() != p {
        return Err(Error::InvalidInput("signal length mismatch".into()));
    }
    if !(gamma_penalty >= 0.0) {
        return Err(Error::InvalidInput("penalty must be nonnegative".into()));
    }
    if k_max > p {
        return Err(Error::InvalidInput("k_max exceeds p".into()));
    }
    let total: u128 = (0..=k_max).map(|s| binomial(p, s)).sum();
    if total > crate::tol::DEFAULT_ENUM_BUDGET as u128 {
        return Err(Error::BudgetExceeded {
            required: total,
            budget: crate::tol::DEFAULT_ENUM_BUDGET,
        });
    }

    let target = a.matvec(beta);
    let target_sq = crate::numerics::dot(&target, &target);

    // Empty support first: K = ||A beta||^2.
    let mut best_value = target_sq;
    let mut best_support: Vec<usize> = Vec::new();
    let mut best_coeffs: Vec<f64> = Vec::new();
    for size in 1..=k_max {
        for_each_support(p, size, |support| {
            let cols = a.select_columns(support);
            let gram = cols.gram();
            let rhs = cols.tr_matvec(&target);
            let coeffs = match spd_solve(&gram, &rhs) {
                Ok(c) => c,
                Err(_) => {
                    // Rank-deficient subset: least squares via pseudoinverse.
                    match crate::numerics::pseudo_inverse(&cols) {
                        Ok(pinv) => pinv.matvec(&target),
                        Err(_) => return,
                    }
                }
            };
            let fitted = cols.matvec(&coeffs);
            let resid = sub_vec(&target, &fitted);
            let value = gamma_penalty * size as f64 + crate::numerics::dot(&resid, &resid);
            if value < best_value {
                best_value = value;
                best_support = support.to_vec();
                best_coeffs = coeffs;
            }
        });
    }

    let mut minimizer = vec![0.0; p];
    for (&i, &c) in best_support.iter().zip(&best_coeffs) {
        minimizer[i] = c;
    }
    let lambda = 4.0 * (gamma_penalty / 3.0).sqrt();
    let correlation = linf_norm(&a.tr_matvec(&sub_vec(&a.matvec(&minimizer), &target)));
    Ok(KFunctionalResult {
        minimizer,
        support: best_support,
        value: best_value,
        lambda,
        correlation,
        within_half_lambda: correlation <= lambda / 2.0 + 1e-12,
    })
}
