//! Cross-module invariants that tie the RIC, NSP, and solver layers
//! together.

use ripkit::harness::io::records_to_csv;
use ripkit::harness::{gen, run_experiment, Amplitude, ExperimentConfig};
use ripkit::nsp::{nsp_certify_signal, NspStatus};
use ripkit::numerics::{l1_norm, l2_norm, sub_vec, DenseMatrix};
use ripkit::recovery::{
    nuclear_norm, solve_matrix, solve_signal, Constraint, MatrixInstance, SignalInstance,
    SolveMethod,
};
use ripkit::rip::ric_exact_signal;
use ripkit::rng::SplitMix64;

fn experiment(json: serde_json::Value) -> ExperimentConfig {
    serde_json::from_value(json).unwrap()
}

/// RIC below 1/3 certifies the null-space property, which certifies
/// recovery; checked on operators whose constant is analytic.
#[test]
fn ric_below_third_implies_nsp_holds() {
    let mut rng = SplitMix64::new(401);
    for c in [0.95f64, 1.05, 1.1] {
        let a = gen::random_orthogonal(8, &mut rng).scale(c);
        let delta = ric_exact_signal(&a, 2).unwrap().value;
        assert!((delta - (c * c - 1.0).abs()).abs() < 1e-10);
        assert!(delta < 1.0 / 3.0);
        let cert = nsp_certify_signal(&a, 2).unwrap();
        assert_eq!(
            cert.status,
            NspStatus::Holds,
            "delta {delta} but NSP not held"
        );
        // And recovery indeed succeeds on a random 2-sparse signal.
        let beta = gen::sparse_signal(8, 2, Amplitude::Gaussian, &mut rng).unwrap();
        let y = a.matvec(&beta);
        let inst = SignalInstance::equality(a, y).unwrap();
        let (bhat, _) = solve_signal(&inst, SolveMethod::Lp).unwrap();
        assert!(l2_norm(&sub_vec(&bhat, &beta)) < 1e-6);
    }
}

/// The order-2k sufficient condition: exactly computed `delta_{2k} <= 1/2`
/// forces exact recovery. Tall instances make the premise non-vacuous.
#[test]
fn delta_2k_at_most_half_implies_recovery() {
    let config = experiment(serde_json::json!({
        "kind": "exact_recovery",
        "n": 400, "p": 10, "k": 2,
        "trials": 20,
        "seed": 4040,
        "scale": 2,
        "certify_nsp": false
    }));
    let (records, summary) = run_experiment(&config).unwrap();
    assert!(
        summary.delta_in_regime > 0,
        "no trial reached delta_4 <= 1/2; the check would be vacuous"
    );
    for rec in &records {
        if rec.delta <= 0.5 {
            assert!(
                rec.success,
                "trial {}: delta_4 = {} but recovery failed",
                rec.trial, rec.delta
            );
        }
    }
    assert_eq!(summary.consistency_violations, 0);
}

/// Solver objectives never exceed the truth's norm when the truth is
/// feasible.
#[test]
fn objectives_never_exceed_feasible_truth() {
    let mut rng = SplitMix64::new(402);
    for trial in 0..10 {
        let a = gen::gaussian_matrix(10, 16, &mut rng);
        let beta = gen::sparse_signal(16, 3, Amplitude::Gaussian, &mut rng).unwrap();
        let y = a.matvec(&beta);
        let truth_l1 = l1_norm(&beta);
        let inst = SignalInstance::equality(a.clone(), y.clone()).unwrap();
        let (_, lp_report) = solve_signal(&inst, SolveMethod::Lp).unwrap();
        assert!(lp_report.objective <= truth_l1 + 1e-6, "trial {trial}: lp");
        let (_, admm_report) = solve_signal(&inst, SolveMethod::Admm).unwrap();
        assert!(
            admm_report.objective <= truth_l1 + 1e-6,
            "trial {trial}: admm"
        );

        let map = gen::gaussian_map(30, 5, 5, &mut rng).unwrap();
        let x = gen::low_rank(5, 5, 2, &mut rng).unwrap();
        let b = map.apply(&x);
        let minst = MatrixInstance::equality(map, b).unwrap();
        let (_, mreport) = solve_matrix(&minst).unwrap();
        assert!(
            mreport.objective <= nuclear_norm(&x) + 1e-6,
            "trial {trial}: matrix"
        );
    }
}

/// The noiseless limit of the noisy sweep: zero noise and radius degrade
/// gracefully to exact recovery with a zero bound.
#[test]
fn noisy_bounds_noiseless_limit() {
    for mode in ["l2", "ds"] {
        let config = experiment(serde_json::json!({
            "kind": "noisy_bounds",
            "n": 40, "p": 8, "k": 2,
            "trials": 9,
            "noise": 0.0,
            "radius": 0.0,
            "bound_mode": mode,
            "seed": 77
        }));
        let (records, summary) = run_experiment(&config).unwrap();
        assert_eq!(summary.violations, 0, "mode {mode}");
        for rec in &records {
            // Exactly sparse trials have a zero bound and must recover to
            // 1e-6; the perturbed-tail trials keep a positive bound.
            if rec.bound == 0.0 {
                assert!(
                    rec.error <= 1e-6,
                    "mode {mode} trial {}: {}",
                    rec.trial,
                    rec.error
                );
            } else {
                assert!(rec.error <= rec.bound);
            }
        }
    }
}

/// Identical config and seed give identical records except the wall-clock
/// column.
#[test]
fn experiment_csv_is_deterministic_modulo_wall_clock() {
    let config = experiment(serde_json::json!({
        "kind": "exact_recovery",
        "n": 10, "p": 12, "k": 2,
        "trials": 6,
        "seed": 321,
        "certify_nsp": true
    }));
    let (records_a, _) = run_experiment(&config).unwrap();
    let (records_b, _) = run_experiment(&config).unwrap();
    let strip = |csv: String| -> String {
        csv.lines()
            .map(|line| {
                let mut cells: Vec<&str> = line.split(',').collect();
                cells.pop();
                cells.join(",")
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(
        strip(records_to_csv(&records_a)),
        strip(records_to_csv(&records_b))
    );
}

/// The l2-ball program returns zero whenever zero is feasible (the matrix
/// example from the solve contract).
#[test]
fn l2_ball_prefers_zero_when_feasible() {
    let mut rng = SplitMix64::new(405);
    let map = gen::gaussian_map(12, 3, 3, &mut rng).unwrap();
    let b = gen::gaussian_noise(12, 0.01, &mut rng);
    let eta = 2.0 * l2_norm(&b);
    let inst = MatrixInstance::new(map, b, Constraint::L2Ball, eta).unwrap();
    let (xhat, report) = solve_matrix(&inst).unwrap();
    assert!(report.converged);
    assert!(
        xhat.max_abs() < 1e-7,
        "nonzero minimizer {}",
        xhat.max_abs()
    );
}

/// Mixed-operator noisy sweeps accept only instances with certified
/// RIC < 1/3, so every recorded delta must sit in the regime.
#[test]
fn noisy_bounds_deltas_are_in_regime() {
    let config = experiment(serde_json::json!({
        "kind": "noisy_bounds",
        "n": 120, "p": 10, "k": 2,
        "trials": 12,
        "noise": 0.05,
        "radius": 0.05,
        "bound_mode": "ds",
        "seed": 91
    }));
    let (records, summary) = run_experiment(&config).unwrap();
    assert_eq!(summary.delta_in_regime, records.len());
    assert!(records.iter().all(|r| r.delta < 1.0 / 3.0));
    assert_eq!(summary.violations, 0);
}

/// Counterexample matrix sweep: the harness must log the constructed
/// collision as a non-success while certifying the tie in objectives.
#[test]
fn counterexample_sweep_records_failure() {
    let config = experiment(serde_json::json!({
        "kind": "matrix_recovery",
        "q": 15, "m": 4, "n": 4, "r": 2,
        "trials": 2,
        "seed": 5,
        "operator": "counterexample"
    }));
    let (records, summary) = run_experiment(&config).unwrap();
    assert_eq!(summary.successes, 0);
    assert!(records.iter().all(|r| !r.success));
    assert!(records.iter().all(|r| (r.delta - 1.0 / 3.0).abs() < 1e-12));
}

/// Exact nuclear-norm recovery on maps with analytically known RIC below
/// 1/3 (scaled orthogonal bases of the vectorized space).
#[test]
fn matrix_equality_recovery_with_known_ric() {
    let mut rng = SplitMix64::new(406);
    for c in [0.95f64, 1.08] {
        let rep = gen::random_orthogonal(25, &mut rng).scale(c);
        let map = ripkit::recovery::LinearMap::new(5, 5, rep).unwrap();
        let delta = (c * c - 1.0).abs();
        assert!(delta < 1.0 / 3.0);
        let x = gen::low_rank(5, 5, 2, &mut rng).unwrap();
        let b = map.apply(&x);
        let inst = MatrixInstance::equality(map, b).unwrap();
        let (xhat, report) = solve_matrix(&inst).unwrap();
        assert!(report.converged);
        let rel = xhat.sub(&x).frob_norm() / x.frob_norm();
        assert!(rel < 1e-6, "relative error {rel} at delta {delta}");
    }
}

/// Matrix branch of the oracle Monte Carlo: no violations at desk scale
/// and the analytic RIC of the isometric map is zero.
#[test]
fn oracle_matrix_branch_runs_clean() {
    let config: ripkit::harness::OracleConfig = serde_json::from_value(serde_json::json!({
        "m": 4, "n": 4, "r": 2, "sigma": 0.05, "trials": 5, "seed": 70
    }))
    .unwrap();
    let (records, summary) = ripkit::harness::run_oracle_mc(&config).unwrap();
    assert_eq!(records.len(), 5);
    assert_eq!(summary.delta, 0.0);
    assert_eq!(summary.violations, 0, "rate {}", summary.violation_rate);
    assert!(summary.probability_bound.is_none());
}

/// The oracle kind is reachable through the generic experiment driver.
#[test]
fn oracle_kind_delegates_from_run_experiment() {
    let config = experiment(serde_json::json!({
        "kind": "oracle_mc",
        "n": 128, "p": 12, "k": 2,
        "trials": 3,
        "noise": 0.1,
        "seed": 6
    }));
    let (records, summary) = run_experiment(&config).unwrap();
    assert_eq!(records.len(), 3);
    assert_eq!(summary.violations, 0);
}

/// A trial that errors out is recorded as a failure; the sweep finishes.
#[test]
fn failing_trials_are_recorded_not_fatal() {
    // C(30, 14) far exceeds the enumeration budget, so every trial's exact
    // RIC computation errors out.
    let config = experiment(serde_json::json!({
        "kind": "exact_recovery",
        "n": 4, "p": 30, "k": 2,
        "scale": 7,
        "trials": 3,
        "seed": 1,
        "certify_nsp": false
    }));
    let (records, summary) = run_experiment(&config).unwrap();
    assert_eq!(records.len(), 3);
    assert_eq!(summary.failed_trials, 3);
    assert_eq!(summary.successes, 0);
    assert!(records.iter().all(|r| !r.success && r.delta.is_nan()));
    assert!(summary.trial_errors[0].contains("budget"));
}

/// The zero-noise limit of the oracle run: lambda collapses to zero, the
/// Dantzig set becomes the normal equations, and recovery is exact.
#[test]
fn oracle_sigma_zero_limit() {
    let config: ripkit::harness::OracleConfig = serde_json::from_value(serde_json::json!({
        "p": 10, "k": 2, "rows": 80, "sigma": 0.0, "trials": 3, "seed": 41
    }))
    .unwrap();
    let (records, summary) = ripkit::harness::run_oracle_mc(&config).unwrap();
    assert_eq!(summary.violations, 0);
    for rec in &records {
        assert!(
            rec.error <= 1e-8,
            "trial {}: error {}",
            rec.trial,
            rec.error
        );
        assert_eq!(rec.bound, 0.0);
    }
}

/// The K-functional minimizer reproduces a direct dense port of the same
/// search on a case small enough to cross-check by hand.
#[test]
fn k_functional_agrees_with_manual_scan() {
    let a = DenseMatrix::identity(4);
    let beta = vec![2.0, 0.4, 0.0, 0.0];
    // With A = I the fit error over support S is the energy off S, so
    // K(S) = gamma |S| + sum_{i not in S} beta_i^2.
    for gamma in [0.1, 0.3, 1.0, 5.0] {
        let res = ripkit::harness::k_functional_min(&a, &beta, gamma, 4).unwrap();
        let mut best = f64::INFINITY;
        for mask in 0u32..16 {
            let size = mask.count_ones() as f64;
            let miss: f64 = (0..4)
                .filter(|i| mask & (1 << i) == 0)
                .map(|i| beta[i] * beta[i])
                .sum();
            best = best.min(gamma * size + miss);
        }
        assert!(
            (res.value - best).abs() < 1e-12,
            "gamma {gamma}: {} vs {best}",
            res.value
        );
    }
}
