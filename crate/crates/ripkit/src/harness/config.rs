//! Experiment configuration, mirrored one-to-one by the JSON config files.

use crate::error::{Error, Result};
use crate::recovery::{BoundMode, Constraint, SolveMethod};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Noiseless equality recovery on random Gaussian matrices, with the RIC
    /// computed exactly per trial and NSP cross-certification.
    ExactRecovery,
    /// Boundary-noise trials checked against the closed-form error bounds;
    /// signal or matrix flavor decided by which dimensions are present.
    NoisyBounds,
    /// Dantzig-selector oracle-inequality Monte Carlo (delegates to the
    /// oracle runner using the shared fields).
    OracleMc,
    /// Per-trial comparison of `delta_{sk}` against `(2s-1) delta_k`.
    ScalingLemma,
    /// Nuclear-norm equality recovery on Gaussian maps, or the constructed
    /// colliding pair when `operator = counterexample`.
    MatrixRecovery,
    /// NSP certificates cross-validated against exhaustive basis-pursuit
    /// recovery.
    NspSweep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Amplitude {
    Unit,
    Gaussian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorFamily {
    Gaussian,
    Counterexample,
}

fn default_method() -> SolveMethod {
    SolveMethod::Lp
}

fn default_bound_mode() -> BoundMode {
    BoundMode::L2
}

fn default_constraint() -> Constraint {
    Constraint::Equality
}

fn default_operator() -> OperatorFamily {
    OperatorFamily::Gaussian
}

fn default_amplitude() -> Amplitude {
    Amplitude::Gaussian
}

fn default_scale() -> usize {
    1
}

fn default_s() -> usize {
    2
}

fn default_true() -> bool {
    true
}

/// Knobs for [`crate::harness::run_experiment`]. Signal kinds read
/// `(n, p, k)`; matrix kinds read `(q, m, n, r)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    pub trials: usize,
    /// Noise level epsilon (the constraint is stressed on its boundary).
    #[serde(default)]
    pub noise: f64,
    /// Program radius eta.
    #[serde(default)]
    pub radius: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_method")]
    pub method: SolveMethod,
    #[serde(default = "default_bound_mode")]
    pub bound_mode: BoundMode,
    #[serde(default = "default_constraint")]
    pub constraint: Constraint,
    #[serde(default = "default_operator")]
    pub operator: OperatorFamily,
    /// RIC order multiplier for exact-recovery sweeps: the delta column
    /// reports `delta_{scale * k}` (scale 2 checks the `delta_2k <= 1/2`
    /// sufficient condition).
    #[serde(default = "default_scale")]
    pub scale: usize,
    /// Multiplier for the scaling-lemma kind.
    #[serde(default = "default_s")]
    pub s: usize,
    #[serde(default = "default_amplitude")]
    pub amplitude: Amplitude,
    /// Whether exact-recovery sweeps also certify the NSP per trial.
    #[serde(default = "default_true")]
    pub certify_nsp: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl ExperimentConfig {
    pub fn signal_dims(&self) -> Result<(usize, usize, usize)> {
        match (self.n, self.p, self.k) {
            (Some(n), Some(p), Some(k)) if n > 0 && p > 0 && k > 0 => Ok((n, p, k)),
            _ => Err(Error::InvalidInput("kind requires positive n, p, k".into())),
        }
    }

    pub fn matrix_dims(&self) -> Result<(usize, usize, usize, usize)> {
        match (self.q, self.m, self.n, self.r) {
            (Some(q), Some(m), Some(n), Some(r)) if q > 0 && m > 0 && n > 0 && r > 0 => {
                Ok((q, m, n, r))
            }
            _ => Err(Error::InvalidInput(
                "kind requires positive q, m, n, r".into(),
            )),
        }
    }

    /// Signal flavor (n, p, k present) vs matrix flavor for noisy bounds.
    pub fn is_signal_flavor(&self) -> bool {
        self.p.is_some()
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidInput("trials must be at least 1".into()));
        }
        if !self.noise.is_finite() || self.noise < 0.0 {
            return Err(Error::InvalidInput("noise must be nonnegative".into()));
        }
        if !self.radius.is_finite() || self.radius < 0.0 {
            return Err(Error::InvalidInput("radius must be nonnegative".into()));
        }
        match self.kind {
            ExperimentKind::ExactRecovery => {
                let (_, p, k) = self.signal_dims()?;
                if k < 2 {
                    return Err(Error::InvalidInput(
                        "exact recovery sweeps require k >= 2".into(),
                    ));
                }
                if self.scale == 0 || self.scale * k > p {
                    return Err(Error::InvalidInput("scale * k exceeds p".into()));
                }
            }
            ExperimentKind::NoisyBounds => {
                if self.is_signal_flavor() {
                    let (_, _, k) = self.signal_dims()?;
                    if k < 2 {
                        return Err(Error::InvalidInput("bounds require k >= 2".into()));
                    }
                } else {
                    let (m, n, r) = match (self.m, self.n, self.r) {
                        (Some(m), Some(n), Some(r)) if m > 0 && n > 0 && r > 0 => (m, n, r),
                        _ => {
                            return Err(Error::InvalidInput("matrix bounds require m, n, r".into()))
                        }
                    };
                    if r < 2 {
                        return Err(Error::InvalidInput("bounds require r >= 2".into()));
                    }
                    if r > m.min(n) {
                        return Err(Error::InvalidInput("r exceeds min(m, n)".into()));
                    }
                }
                if self.radius < self.noise {
                    return Err(Error::InvalidInput(
                        "the error bounds require radius >= noise".into(),
                    ));
                }
            }
            ExperimentKind::OracleMc => {
                // Validated by the oracle runner.
            }
            ExperimentKind::ScalingLemma => {
                let (_, p, k) = self.signal_dims()?;
                if k < 2 || self.s < 2 {
                    return Err(Error::InvalidInput("scaling lemma needs k, s >= 2".into()));
                }
                if self.s * k > p {
                    return Err(Error::InvalidInput("s * k exceeds p".into()));
                }
            }
            ExperimentKind::MatrixRecovery => {
                let (_, m, n, r) = self.matrix_dims()?;
                if r > m.min(n) {
                    return Err(Error::InvalidInput("r exceeds min(m, n)".into()));
                }
                if self.operator == OperatorFamily::Counterexample && (r < 2 || 2 * r > m.min(n)) {
                    return Err(Error::InvalidInput(
                        "counterexample operator needs 2 <= r <= min(m,n)/2".into(),
                    ));
                }
                if self.constraint != Constraint::Equality {
                    return Err(Error::InvalidInput(
                        "noisy matrix trials belong to the noisy_bounds kind".into(),
                    ));
                }
            }
            ExperimentKind::NspSweep => {
                let (_, p, k) = self.signal_dims()?;
                if k > p {
                    return Err(Error::InvalidInput("k exceeds p".into()));
                }
            }
        }
        Ok(())
    }
}

fn default_oracle_rows() -> usize {
    256
}

/// Configuration of the Dantzig oracle-inequality Monte Carlo. Signal mode
/// reads `(p, k)`, matrix mode `(m, n, r)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    /// Rows of the sensing matrix in signal mode; must be large enough for
    /// the accepted instance to reach `delta_k < 1/3`.
    #[serde(default = "default_oracle_rows")]
    pub rows: usize,
    pub sigma: f64,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Dantzig radius; defaults to `4 sigma sqrt((2/3) log p)` for signals
    /// and `16 sigma sqrt((1/3) log(12) max(m, n))` for matrices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Support penalty of the oracle functional; defaults to
    /// `2 sigma^2 log p`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_penalty: Option<f64>,
    /// Run with the identically-zero truth (the Dantzig selector must then
    /// return exactly zero whenever the noise correlation stays within the
    /// radius).
    #[serde(default)]
    pub zero_signal: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl OracleConfig {
    pub fn is_signal(&self) -> bool {
        self.p.is_some()
    }

    pub fn lambda(&self) -> Result<f64> {
        if let Some(l) = self.lambda {
            return Ok(l);
        }
        if self.is_signal() {
            let p = self.p.unwrap() as f64;
            Ok(4.0 * self.sigma * ((2.0 / 3.0) * p.ln()).sqrt())
        } else {
            let (m, n) = self.matrix_shape()?;
            let maxdim = m.max(n) as f64;
            Ok(16.0 * self.sigma * ((1.0 / 3.0) * 12f64.ln() * maxdim).sqrt())
        }
    }

    pub fn gamma_penalty(&self) -> Result<f64> {
        if let Some(g) = self.gamma_penalty {
            return Ok(g);
        }
        let p = self
            .p
            .ok_or_else(|| Error::InvalidInput("gamma penalty needs p".into()))?;
        Ok(2.0 * self.sigma * self.sigma * (p as f64).ln())
    }

    pub fn matrix_shape(&self) -> Result<(usize, usize)> {
        match (self.m, self.n) {
            (Some(m), Some(n)) if m > 0 && n > 0 => Ok((m, n)),
            _ => Err(Error::InvalidInput("matrix mode requires m and n".into())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidInput("trials must be at least 1".into()));
        }
        if !self.sigma.is_finite() || self.sigma < 0.0 {
            return Err(Error::InvalidInput("sigma must be nonnegative".into()));
        }
        if self.is_signal() {
            let p = self.p.unwrap();
            let k = self.k.unwrap_or(0);
            if k < 2 || k > p {
                return Err(Error::InvalidInput(
                    "signal oracle needs 2 <= k <= p".into(),
                ));
            }
            if self.rows == 0 {
                return Err(Error::InvalidInput("rows must be positive".into()));
            }
        } else {
            let (m, n) = self.matrix_shape()?;
            let r = self.r.unwrap_or(0);
            if r < 2 || r > m.min(n) {
                return Err(Error::InvalidInput(
                    "matrix oracle needs 2 <= r <= min(m, n)".into(),
                ));
            }
        }
        Ok(())
    }
}
