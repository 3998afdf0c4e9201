//! Experiment harness: configuration, instance generation, drivers, the
//! oracle Monte Carlo, and file I/O for the CLI.

pub mod config;
pub mod experiment;
pub mod gen;
pub mod io;
pub mod oracle;
pub(crate) mod pool;

pub use config::{Amplitude, ExperimentConfig, ExperimentKind, OperatorFamily, OracleConfig};
pub use experiment::{run_experiment, ExperimentSummary};
pub use oracle::{k_functional_min, run_oracle_mc, KFunctionalResult, OracleSummary};

use serde::Serialize;

/// One row of the per-trial CSV (`trial,delta,error,bound,success,iters,
/// wall_ms`). Everything but the wall clock is reproducible for a fixed
/// config and seed.
#[derive(Clone, Debug, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    /// RIC (exact, analytic, or lower bound) or the kind-specific statistic
    /// documented by the experiment.
    pub delta: f64,
    /// Recovery error (l2 or Frobenius) or the kind-specific residual.
    pub error: f64,
    /// The threshold the error is compared against.
    pub bound: f64,
    pub success: bool,
    pub iters: usize,
    pub wall_ms: f64,
}
