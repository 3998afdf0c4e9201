//! Experiment drivers. Each kind maps one trial index to one
//! [`TrialRecord`]; trials run in parallel over sub-seeds derived from the
//! config seed and are emitted sorted by index, so every column except the
//! wall-clock one is reproducible byte for byte.

use crate::error::{Error, Result};
use crate::harness::config::{Amplitude, ExperimentConfig, ExperimentKind, OperatorFamily};
use crate::harness::gen;
use crate::harness::TrialRecord;
use crate::nsp::{failing_pair_from_witness, nsp_certify_signal, NspStatus};
use crate::numerics::{add_vec, l2_norm, linf_norm, sub_vec, DenseMatrix};
use crate::recovery::{
    best_s_term_matrix, best_s_term_vector, error_bound, nuclear_norm, solve_matrix, solve_signal,
    spectral_norm, BoundMode, Constraint, LinearMap, MatrixInstance, SignalInstance, SolveMethod,
};
use crate::rip::{ric_exact_signal, scaling_lemma_report};
use crate::rng::{derive_seed, SplitMix64};
use rayon::prelude::*;
use serde::Serialize;
use std::time::Instant;

/// Aggregate statistics emitted next to the per-trial CSV.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    pub trials: usize,
    pub successes: usize,
    /// Bound violations (noisy kinds) or implication violations (exact
    /// kinds); must stay zero for the guarantees to stand.
    pub violations: usize,
    /// Trials whose exactly computed delta was below 1/3 (or 1/2 for the
    /// scaled order).
    pub delta_in_regime: usize,
    /// Trials whose NSP certificate came back `holds`.
    pub nsp_holds: usize,
    /// Violations of `delta < 1/3 => NSP holds => recovery succeeds`.
    pub consistency_violations: usize,
    /// NSP verdict vs recovery-oracle mismatches (boundary excluded).
    pub mismatches: usize,
    /// Trials that errored out (recorded as failures, never aborting the
    /// sweep); the first few messages are kept below.
    pub failed_trials: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trial_errors: Vec<String>,
    pub max_error: f64,
    pub mean_iterations: f64,
    pub total_wall_ms: f64,
}

struct TrialOutcome {
    record: TrialRecord,
    delta_in_regime: bool,
    nsp_holds: bool,
    consistency_violation: bool,
    mismatch: bool,
    failure: Option<String>,
}

impl TrialOutcome {
    fn from_record(record: TrialRecord) -> Self {
        TrialOutcome {
            record,
            delta_in_regime: false,
            nsp_holds: false,
            consistency_violation: false,
            mismatch: false,
            failure: None,
        }
    }

    /// A trial that errored: recorded as an unconditional failure.
    fn failed(trial: usize, message: String) -> Self {
        TrialOutcome {
            record: TrialRecord {
                trial,
                delta: f64::NAN,
                error: f64::NAN,
                bound: f64::NAN,
                success: false,
                iters: 0,
                wall_ms: 0.0,
            },
            delta_in_regime: false,
            nsp_holds: false,
            consistency_violation: false,
            mismatch: false,
            failure: Some(message),
        }
    }
}

fn finish(
    config: &ExperimentConfig,
    outcomes: Vec<TrialOutcome>,
) -> (Vec<TrialRecord>, ExperimentSummary) {
    let mut outcomes = outcomes;
    outcomes.sort_by_key(|o| o.record.trial);
    let trials = outcomes.len();
    let successes = outcomes.iter().filter(|o| o.record.success).count();
    let summary = ExperimentSummary {
        config: config.clone(),
        trials,
        successes,
        violations: trials - successes,
        delta_in_regime: outcomes.iter().filter(|o| o.delta_in_regime).count(),
        nsp_holds: outcomes.iter().filter(|o| o.nsp_holds).count(),
        consistency_violations: outcomes.iter().filter(|o| o.consistency_violation).count(),
        mismatches: outcomes.iter().filter(|o| o.mismatch).count(),
        failed_trials: outcomes.iter().filter(|o| o.failure.is_some()).count(),
        trial_errors: outcomes
            .iter()
            .filter_map(|o| o.failure.as_ref())
            .take(10)
            .map(|msg| msg.clone())
            .collect(),
        max_error: outcomes
            .iter()
            .filter(|o| o.record.error.is_finite())
            .fold(0.0, |m, o| m.max(o.record.error)),
        mean_iterations: if trials == 0 {
            0.0
        } else {
            outcomes.iter().map(|o| o.record.iters as f64).sum::<f64>() / trials as f64
        },
        total_wall_ms: outcomes.iter().map(|o| o.record.wall_ms).sum(),
    };
    (outcomes.into_iter().map(|o| o.record).collect(), summary)
}

/// Runs all trials of the configured experiment. A failing trial is
/// recorded as an unsuccessful record carrying its error message in the
/// summary; it never aborts the sweep. Only a misconfiguration errors.
pub fn run_experiment(config: &ExperimentConfig) -> Result<(Vec<TrialRecord>, ExperimentSummary)> {
    config.validate()?;
    crate::harness::pool::init_thread_pool();
    if config.kind == ExperimentKind::OracleMc {
        return run_oracle_kind(config);
    }
    let outcomes: Vec<TrialOutcome> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = SplitMix64::new(derive_seed(config.seed, trial as u64));
            let start = Instant::now();
            let mut outcome = match config.kind {
                ExperimentKind::ExactRecovery => exact_recovery_trial(config, trial, &mut rng),
                ExperimentKind::NoisyBounds => noisy_bounds_trial(config, trial, &mut rng),
                ExperimentKind::ScalingLemma => scaling_trial(config, trial, &mut rng),
                ExperimentKind::MatrixRecovery => matrix_recovery_trial(config, trial, &mut rng),
                ExperimentKind::NspSweep => nsp_sweep_trial(config, trial, &mut rng),
                ExperimentKind::OracleMc => unreachable!(),
            }
            .unwrap_or_else(|e| TrialOutcome::failed(trial, format!("trial {trial}: {e}")));
            outcome.record.wall_ms = start.elapsed().as_secs_f64() * 1e3;
            outcome
        })
        .collect();
    Ok(finish(config, outcomes))
}

/// One noiseless trial: exact delta, optional NSP certificate, equality
/// solve, and the implication bookkeeping.
fn exact_recovery_trial(
    config: &ExperimentConfig,
    trial: usize,
    rng: &mut SplitMix64,
) -> Result<TrialOutcome> {
    let (n, p, k) = config.signal_dims()?;
    let a = gen::gaussian_matrix(n, p, rng);
    let order = config.scale * k;
    let delta = ric_exact_signal(&a, order)?.value;
    let (certified, holds) = if config.certify_nsp {
        let cert = nsp_certify_signal(&a, k)?;
        (true, cert.status == NspStatus::Holds)
    } else {
        (false, false)
    };
    let beta = gen::sparse_signal(p, k, config.amplitude, rng)?;
    let y = a.matvec(&beta);
    let inst = SignalInstance::equality(a, y)?;
    let (bhat, report) = solve_signal(&inst, config.method)?;
    let error = l2_norm(&sub_vec(&bhat, &beta));
    let success = error <= 1e-6;

    // delta < 1/3 certifies recovery at scale 1; delta_{2k} <= 1/2 at
    // scale 2. Either way, an in-regime delta forces success.
    let in_regime = match config.scale {
        1 => delta < 1.0 / 3.0,
        2 => delta <= 0.5,
        _ => false,
    };
    let mut consistency_violation = in_regime && !success;
    if certified {
        if config.scale == 1 && in_regime && !holds {
            consistency_violation = true;
        }
        if holds && !success {
            consistency_violation = true;
        }
    }
    Ok(TrialOutcome {
        delta_in_regime: in_regime,
        nsp_holds: holds,
        consistency_violation,
        ..TrialOutcome::from_record(TrialRecord {
            trial,
            delta,
            error,
            bound: 1e-6,
            success,
            iters: report.iterations,
            wall_ms: 0.0,
        })
    })
}

/// Draws an operator with exactly known RIC below 1/3: even trials scale a
/// random orthogonal basis (delta = |c^2 - 1| analytically), odd trials
/// rejection-sample a column-normalized Gaussian and certify delta by
/// enumeration.
fn accepted_signal_operator(
    n: usize,
    p: usize,
    k: usize,
    trial: usize,
    rng: &mut SplitMix64,
) -> Result<(DenseMatrix, f64)> {
    if trial % 2 == 0 {
        let c = rng.uniform(0.92, 1.12);
        let a = gen::random_orthogonal(p, rng).scale(c);
        Ok((a, (c * c - 1.0).abs()))
    } else {
        for _ in 0..50 {
            let a = gen::normalize_columns(&gen::gaussian_matrix(n, p, rng));
            let delta = ric_exact_signal(&a, k)?.value;
            if delta < 1.0 / 3.0 {
                return Ok((a, delta));
            }
        }
        // Tall Gaussians at sane dimensions accept within a few draws; fall
        // back to the analytic family rather than fail the sweep.
        let c = rng.uniform(0.95, 1.05);
        Ok((gen::random_orthogonal(p, rng).scale(c), (c * c - 1.0).abs()))
    }
}

fn noisy_bounds_trial(
    config: &ExperimentConfig,
    trial: usize,
    rng: &mut SplitMix64,
) -> Result<TrialOutcome> {
    let epsilon = config.noise;
    let eta = config.radius;
    if config.is_signal_flavor() {
        let (n, p, k) = config.signal_dims()?;
        let (a, delta) = accepted_signal_operator(n, p, k, trial, rng)?;
        let mut beta = gen::sparse_signal(p, k, config.amplitude, rng)?;
        // Every third trial perturbs the truth off exact sparsity to
        // exercise the best-k-term tail of the bounds.
        if trial % 3 == 2 {
            for b in beta.iter_mut() {
                *b += 0.05 * rng.next_normal();
            }
        }
        let tail = best_s_term_vector(&beta, k).tail_norm;
        let (constraint, z) = match config.bound_mode {
            BoundMode::L2 => (
                Constraint::L2Ball,
                gen::sphere_noise(a.rows(), epsilon, rng),
            ),
            BoundMode::Ds => {
                // Rescale Gaussian noise onto the Dantzig boundary
                // ||A^T z||_inf = epsilon.
                let g = rng.normal_vec(a.rows());
                let corr = linf_norm(&a.tr_matvec(&g));
                let scale = if corr > 0.0 { epsilon / corr } else { 0.0 };
                (Constraint::Dantzig, g.iter().map(|x| x * scale).collect())
            }
        };
        let y = add_vec(&a.matvec(&beta), &z);
        let inst = SignalInstance::new(a, y, constraint, eta)?.with_truth(beta.clone(), epsilon);
        let method = match constraint {
            Constraint::L2Ball => SolveMethod::Admm,
            _ => config.method,
        };
        let (bhat, report) = solve_signal(&inst, method)?;
        let error = l2_norm(&sub_vec(&bhat, &beta));
        let bound = error_bound(config.bound_mode, delta, epsilon, eta, k, tail)?;
        // The noiseless limit has a vanishing bound; exact recovery up to
        // solver tolerance is the consistent reading there.
        let success = if bound > 0.0 {
            error <= bound
        } else {
            error <= 1e-6
        };
        Ok(TrialOutcome {
            delta_in_regime: delta < 1.0 / 3.0,
            ..TrialOutcome::from_record(TrialRecord {
                trial,
                delta,
                error,
                bound,
                success,
                iters: report.iterations,
                wall_ms: 0.0,
            })
        })
    } else {
        let (m, n, r) = (config.m.unwrap(), config.n.unwrap(), config.r.unwrap());
        // Scaled orthogonal map on the vectorized space: delta_r = |c^2 - 1|.
        let c = rng.uniform(0.92, 1.12);
        let q_basis = gen::random_orthogonal(m * n, rng).scale(c);
        let map = LinearMap::new(m, n, q_basis)?;
        let delta = (c * c - 1.0).abs();
        let mut x = gen::low_rank(m, n, r, rng)?;
        if trial % 3 == 2 {
            for i in 0..m {
                for j in 0..n {
                    x.set(i, j, x.get(i, j) + 0.05 * rng.next_normal());
                }
            }
        }
        let tail = best_s_term_matrix(&x, r)?.tail_norm;
        let (constraint, z) = match config.bound_mode {
            BoundMode::L2 => (Constraint::L2Ball, gen::sphere_noise(map.q(), epsilon, rng)),
            BoundMode::Ds => {
                // Boundary of the spectral-norm set ||M*(z)|| = epsilon.
                let g = rng.normal_vec(map.q());
                let corr = spectral_norm(&map.adjoint(&g));
                let scale = if corr > 0.0 { epsilon / corr } else { 0.0 };
                (Constraint::Dantzig, g.iter().map(|v| v * scale).collect())
            }
        };
        let b = add_vec(&map.apply(&x), &z);
        let inst = MatrixInstance::new(map, b, constraint, eta)?;
        let (xhat, report) = solve_matrix(&inst)?;
        let error = xhat.sub(&x).frob_norm();
        let bound = error_bound(config.bound_mode, delta, epsilon, eta, r, tail)?;
        let success = if bound > 0.0 {
            error <= bound
        } else {
            error <= 1e-6
        };
        Ok(TrialOutcome {
            delta_in_regime: delta < 1.0 / 3.0,
            ..TrialOutcome::from_record(TrialRecord {
                trial,
                delta,
                error,
                bound,
                success,
                iters: report.iterations,
                wall_ms: 0.0,
            })
        })
    }
}

fn scaling_trial(
    config: &ExperimentConfig,
    trial: usize,
    rng: &mut SplitMix64,
) -> Result<TrialOutcome> {
    let (n, p, k) = config.signal_dims()?;
    let a = gen::gaussian_matrix(n, p, rng);
    let report = scaling_lemma_report(&a, k, config.s)?;
    Ok(TrialOutcome {
        delta_in_regime: report.delta_k < 1.0 / 3.0,
        consistency_violation: !report.holds,
        ..TrialOutcome::from_record(TrialRecord {
            trial,
            delta: report.delta_sk,
            error: (report.delta_sk - report.bound).max(0.0),
            bound: report.bound,
            success: report.holds,
            iters: 0,
            wall_ms: 0.0,
        })
    })
}

fn matrix_recovery_trial(
    config: &ExperimentConfig,
    trial: usize,
    rng: &mut SplitMix64,
) -> Result<TrialOutcome> {
    let (q, m, n, r) = config.matrix_dims()?;
    match config.operator {
        OperatorFamily::Gaussian => {
            let map = gen::gaussian_map(q, m, n, rng)?;
            let x = gen::low_rank(m, n, r, rng)?;
            let b = map.apply(&x);
            // No exact RIC exists for a random map; record the certified
            // lower bound from a short witness search.
            let delta = crate::rip::ric_lower_matrix(&map, r, 8, 100, rng.next_u64())?.value;
            let inst = MatrixInstance::equality(map, b)?;
            let (xhat, report) = solve_matrix(&inst)?;
            let rel = xhat.sub(&x).frob_norm() / x.frob_norm();
            let success = rel <= 1e-4;
            Ok(TrialOutcome::from_record(TrialRecord {
                trial,
                delta,
                error: rel,
                bound: 1e-4,
                success,
                iters: report.iterations,
                wall_ms: 0.0,
            }))
        }
        OperatorFamily::Counterexample => {
            // The colliding pair shares its image and its nuclear norm, so
            // the minimizer is not unique and recovery of X cannot be
            // claimed; the trial asserts that certificate and records a
            // failure by construction.
            let kit = crate::constructions::sharp_counterexample_matrix(m, n, r)?;
            let crate::constructions::KitOperator::Map(map) = &kit.operator else {
                unreachable!()
            };
            let (
                crate::constructions::KitElement::Matrix(x),
                crate::constructions::KitElement::Matrix(y),
            ) = &kit.colliding_pair
            else {
                unreachable!()
            };
            let b = map.apply(x);
            let inst = MatrixInstance::equality(map.clone(), b.clone())?;
            let (xhat, report) = solve_matrix(&inst)?;
            // Non-uniqueness certificate: Y is feasible with the same
            // nuclear norm, and the solver found an objective no larger.
            let y_feasible = l2_norm(&sub_vec(&map.apply(y), &b)) <= 1e-8;
            let equal_objective = (nuclear_norm(x) - nuclear_norm(y)).abs() <= 1e-8;
            let solver_no_worse = report.objective <= nuclear_norm(x) + 1e-6;
            if !(y_feasible && equal_objective && solver_no_worse) {
                return Err(Error::InvalidWitness(
                    "collision certificate failed on the constructed pair".into(),
                ));
            }
            let rel = xhat.sub(x).frob_norm() / x.frob_norm();
            Ok(TrialOutcome::from_record(TrialRecord {
                trial,
                delta: kit.claimed_ric,
                error: rel,
                bound: 0.0,
                success: false,
                iters: report.iterations,
                wall_ms: 0.0,
            }))
        }
    }
}

/// Solves basis pursuit for every probe signal; recovery must match the
/// certificate verdict (boundary verdicts are excluded from the check).
fn nsp_sweep_trial(
    config: &ExperimentConfig,
    trial: usize,
    rng: &mut SplitMix64,
) -> Result<TrialOutcome> {
    let (n, p, k) = config.signal_dims()?;
    let a = gen::gaussian_matrix(n, p, rng);
    let cert = nsp_certify_signal(&a, k)?;

    let mut probes: Vec<Vec<f64>> = Vec::new();
    // All +-1 spike patterns on every support of size k.
    crate::rip::for_each_support(p, k, |support| {
        for pattern in 0u64..(1u64 << (k - 1)) {
            let mut beta = vec![0.0; p];
            for (j, &i) in support.iter().enumerate() {
                beta[i] = if j == 0 || (pattern >> (j - 1)) & 1 == 0 {
                    1.0
                } else {
                    -1.0
                };
            }
            probes.push(beta);
        }
    });
    // Random k-sparse probes with generic amplitudes.
    for _ in 0..200 {
        probes.push(gen::sparse_signal(p, k, Amplitude::Gaussian, rng)?);
    }
    // A failing certificate pins a concrete unrecoverable signal.
    if cert.status == NspStatus::Fails {
        if let Some(witness) = &cert.worst_vector {
            let (gamma, _) = failing_pair_from_witness(&a, witness, k)?;
            probes.push(gamma);
        }
    }

    let mut recovered_all = true;
    let mut failures = 0usize;
    let mut iters = 0usize;
    for beta in &probes {
        let inst = SignalInstance::equality(a.clone(), a.matvec(beta))?;
        let (bhat, report) = solve_signal(&inst, config.method)?;
        iters += report.iterations;
        if l2_norm(&sub_vec(&bhat, beta)) > 1e-7 {
            recovered_all = false;
            failures += 1;
        }
    }

    let mismatch = match cert.status {
        NspStatus::Holds => !recovered_all,
        NspStatus::Fails => recovered_all,
        NspStatus::Boundary => false,
    };
    Ok(TrialOutcome {
        nsp_holds: cert.status == NspStatus::Holds,
        mismatch,
        ..TrialOutcome::from_record(TrialRecord {
            trial,
            delta: cert.worst_value,
            error: failures as f64 / probes.len() as f64,
            bound: 0.5,
            success: !mismatch,
            iters,
            wall_ms: 0.0,
        })
    })
}

/// `oracle_mc` as an experiment kind: the shared fields map onto an
/// [`crate::harness::OracleConfig`] with defaulted radius and penalty.
fn run_oracle_kind(config: &ExperimentConfig) -> Result<(Vec<TrialRecord>, ExperimentSummary)> {
    let oracle = crate::harness::OracleConfig {
        p: config.p,
        k: config.k,
        m: if config.p.is_some() { None } else { config.m },
        n: if config.p.is_some() { None } else { config.n },
        r: config.r,
        rows: config.n.filter(|_| config.p.is_some()).unwrap_or(256),
        sigma: config.noise,
        trials: config.trials,
        seed: config.seed,
        lambda: None,
        gamma_penalty: None,
        zero_signal: false,
        out: config.out.clone(),
    };
    let (records, oracle_summary) = crate::harness::run_oracle_mc(&oracle)?;
    let summary = ExperimentSummary {
        config: config.clone(),
        trials: oracle_summary.trials,
        successes: oracle_summary.trials - oracle_summary.violations,
        violations: oracle_summary.violations,
        delta_in_regime: if oracle_summary.delta < 1.0 / 3.0 {
            oracle_summary.trials
        } else {
            0
        },
        nsp_holds: 0,
        consistency_violations: 0,
        mismatches: 0,
        failed_trials: 0,
        trial_errors: Vec::new(),
        max_error: records.iter().fold(0.0, |m, r| m.max(r.error)),
        mean_iterations: if records.is_empty() {
            0.0
        } else {
            records.iter().map(|r| r.iters as f64).sum::<f64>() / records.len() as f64
        },
        total_wall_ms: records.iter().map(|r| r.wall_ms).sum(),
    };
    Ok((records, summary))
}
