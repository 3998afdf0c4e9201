//! `ripkit` command line: instance generation, RIC and NSP computations,
//! recovery solves, sharpness constructions, experiment sweeps, the oracle
//! Monte Carlo, and the division tableau, all driven by JSON configs.

use clap::{Args, Parser, Subcommand, ValueEnum};
use ripkit::constructions::{
    identifiability_gap_example, sharp_counterexample_matrix, sharp_counterexample_signal, GapKind,
    KitElement, KitOperator,
};
use ripkit::division::{divide, tail_power_check};
use ripkit::error::{Error, Result};
use ripkit::harness::io;
use ripkit::harness::{
    run_experiment, run_oracle_mc, Amplitude, ExperimentConfig, OracleConfig, TrialRecord,
};
use ripkit::nsp::{nsp_certify_signal_with_budget, nsp_falsify_matrix, NspStatus};
use ripkit::numerics::DenseMatrix;
use ripkit::recovery::{
    solve_matrix, solve_signal, Constraint, MatrixInstance, SignalInstance, SolveMethod,
};
use ripkit::rip::{ric_exact_signal_with_budget, ric_lower_matrix, ric_sampled_signal, RipWitness};
use ripkit::rng::SplitMix64;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "ripkit",
    version,
    about = "Sparse and low-rank recovery toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance (matrix, signal, map, low-rank, noise).
    Gen(Common),
    /// Restricted isometry constant: exact for matrices, lower bound for maps.
    Rip(Common),
    /// Null-space property: certify matrices, falsify maps.
    Nsp(Common),
    /// Solve an l1 / nuclear-norm recovery program.
    Solve(Common),
    /// Construct a sharpness or identifiability-gap operator.
    Counterexample(Common),
    /// Run an experiment sweep (exact recovery, noisy bounds, scaling, ...).
    Bounds(Common),
    /// Dantzig-selector oracle-inequality Monte Carlo.
    Oracle(Common),
    /// Build and verify a division tableau.
    Divide(Common),
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen(c) => cmd_gen(&c),
        Command::Rip(c) => cmd_rip(&c),
        Command::Nsp(c) => cmd_nsp(&c),
        Command::Solve(c) => cmd_solve(&c),
        Command::Counterexample(c) => cmd_counterexample(&c),
        Command::Bounds(c) => cmd_bounds(&c),
        Command::Oracle(c) => cmd_oracle(&c),
        Command::Divide(c) => cmd_divide(&c),
    };
    if let Err(e) = outcome {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn load_config<T: serde::de::DeserializeOwned>(common: &Common) -> Result<T> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("--config FILE.json is required".into()))?;
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn emit(common: &Common, text: &str) -> Result<()> {
    match &common.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

// ---------------------------------------------------------------- gen

#[derive(Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
enum GenConfig {
    GaussianMatrix {
        n: usize,
        p: usize,
        #[serde(default)]
        seed: u64,
    },
    SparseSignal {
        p: usize,
        k: usize,
        #[serde(default = "default_amplitude")]
        amplitude: Amplitude,
        #[serde(default)]
        seed: u64,
    },
    GaussianMap {
        q: usize,
        m: usize,
        n: usize,
        #[serde(default)]
        seed: u64,
    },
    LowRank {
        m: usize,
        n: usize,
        r: usize,
        #[serde(default)]
        seed: u64,
    },
    GaussianNoise {
        dim: usize,
        sigma: f64,
        #[serde(default)]
        seed: u64,
    },
}

fn default_amplitude() -> Amplitude {
    Amplitude::Gaussian
}

fn cmd_gen(common: &Common) -> Result<()> {
    use ripkit::harness::gen;
    let config: GenConfig = load_config(common)?;
    let seed_of = |s: u64| common.seed.unwrap_or(s);
    match config {
        GenConfig::GaussianMatrix { n, p, seed } => {
            let mut rng = SplitMix64::new(seed_of(seed));
            emit(
                common,
                &io::matrix_to_csv(&gen::gaussian_matrix(n, p, &mut rng)),
            )
        }
        GenConfig::SparseSignal {
            p,
            k,
            amplitude,
            seed,
        } => {
            let mut rng = SplitMix64::new(seed_of(seed));
            let beta = gen::sparse_signal(p, k, amplitude, &mut rng)?;
            let row: Vec<String> = beta.iter().map(|x| x.to_string()).collect();
            emit(common, &format!("{}\n", row.join(",")))
        }
        GenConfig::GaussianMap { q, m, n, seed } => {
            let mut rng = SplitMix64::new(seed_of(seed));
            let map = gen::gaussian_map(q, m, n, &mut rng)?;
            let out = common
                .out
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("maps need --out for the sidecar".into()))?;
            io::write_linear_map(out, &map)
        }
        GenConfig::LowRank { m, n, r, seed } => {
            let mut rng = SplitMix64::new(seed_of(seed));
            emit(
                common,
                &io::matrix_to_csv(&gen::low_rank(m, n, r, &mut rng)?),
            )
        }
        GenConfig::GaussianNoise { dim, sigma, seed } => {
            let mut rng = SplitMix64::new(seed_of(seed));
            let z = gen::gaussian_noise(dim, sigma, &mut rng);
            let row: Vec<String> = z.iter().map(|x| x.to_string()).collect();
            emit(common, &format!("{}\n", row.join(",")))
        }
    }
}

// ---------------------------------------------------------------- rip

#[derive(Deserialize)]
struct RipCliConfig {
    matrix: Option<PathBuf>,
    map: Option<PathBuf>,
    #[serde(default)]
    k: Option<usize>,
    #[serde(default)]
    r: Option<usize>,
    #[serde(default = "default_restarts")]
    restarts: usize,
    #[serde(default = "default_iters")]
    iters: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_budget")]
    budget: u64,
    /// When set, estimate the matrix RIC from this many random supports
    /// instead of exact enumeration (a certified lower bound).
    #[serde(default)]
    samples: Option<usize>,
}

fn default_restarts() -> usize {
    32
}

fn default_iters() -> usize {
    200
}

fn default_budget() -> u64 {
    ripkit::tol::DEFAULT_ENUM_BUDGET
}

#[derive(Serialize)]
struct RipView {
    value: f64,
    order: usize,
    exact: bool,
    ratio_low: f64,
    ratio_high: f64,
    witness_low: WitnessView,
    witness_high: WitnessView,
}

#[derive(Serialize)]
#[serde(rename_all = "snake_case")]
enum WitnessView {
    Support(Vec<usize>),
    Matrix(Vec<Vec<f64>>),
}

fn witness_view(w: &RipWitness) -> WitnessView {
    match w {
        RipWitness::Support(s) => WitnessView::Support(s.clone()),
        RipWitness::Matrix(m) => WitnessView::Matrix(matrix_rows(m)),
    }
}

fn matrix_rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn cmd_rip(common: &Common) -> Result<()> {
    let config: RipCliConfig = load_config(common)?;
    let est = match (&config.matrix, &config.map) {
        (Some(path), None) => {
            let a = io::read_matrix_csv(path)?;
            let k = config
                .k
                .ok_or_else(|| Error::InvalidInput("matrix mode needs k".into()))?;
            match config.samples {
                Some(samples) => {
                    ric_sampled_signal(&a, k, samples, common.seed.unwrap_or(config.seed))?
                }
                None => ric_exact_signal_with_budget(&a, k, config.budget)?,
            }
        }
        (None, Some(path)) => {
            let map = io::read_linear_map(path)?;
            let r = config
                .r
                .ok_or_else(|| Error::InvalidInput("map mode needs r".into()))?;
            ric_lower_matrix(
                &map,
                r,
                config.restarts,
                config.iters,
                common.seed.unwrap_or(config.seed),
            )?
        }
        _ => {
            return Err(Error::InvalidInput(
                "provide exactly one of `matrix` or `map` in the config".into(),
            ))
        }
    };
    let view = RipView {
        value: est.value,
        order: est.order,
        exact: est.exact,
        ratio_low: est.ratio_low,
        ratio_high: est.ratio_high,
        witness_low: witness_view(&est.witness_low),
        witness_high: witness_view(&est.witness_high),
    };
    emit(
        common,
        &format!("{}\n", serde_json::to_string_pretty(&view)?),
    )
}

// ---------------------------------------------------------------- nsp

#[derive(Deserialize)]
struct NspCliConfig {
    matrix: Option<PathBuf>,
    map: Option<PathBuf>,
    #[serde(default)]
    k: Option<usize>,
    #[serde(default)]
    r: Option<usize>,
    #[serde(default = "default_budget")]
    budget: u64,
    #[serde(default = "default_falsify_budget")]
    search_budget: usize,
    #[serde(default)]
    seed: u64,
}

fn default_falsify_budget() -> usize {
    2000
}

#[derive(Serialize)]
struct NspView {
    order: usize,
    status: &'static str,
    worst_value: f64,
    worst_support: Vec<usize>,
    worst_signs: Vec<i8>,
    worst_vector: Option<Vec<f64>>,
}

fn cmd_nsp(common: &Common) -> Result<()> {
    let config: NspCliConfig = load_config(common)?;
    match (&config.matrix, &config.map) {
        (Some(path), None) => {
            let a = io::read_matrix_csv(path)?;
            let k = config
                .k
                .ok_or_else(|| Error::InvalidInput("matrix mode needs k".into()))?;
            let cert = nsp_certify_signal_with_budget(&a, k, config.budget)?;
            let view = NspView {
                order: cert.order,
                status: match cert.status {
                    NspStatus::Holds => "holds",
                    NspStatus::Boundary => "boundary",
                    NspStatus::Fails => "fails",
                },
                worst_value: cert.worst_value,
                worst_support: cert.worst_support,
                worst_signs: cert.worst_signs,
                worst_vector: cert.worst_vector,
            };
            emit(
                common,
                &format!("{}\n", serde_json::to_string_pretty(&view)?),
            )
        }
        (None, Some(path)) => {
            let map = io::read_linear_map(path)?;
            let r = config
                .r
                .ok_or_else(|| Error::InvalidInput("map mode needs r".into()))?;
            let witness = nsp_falsify_matrix(
                &map,
                r,
                config.search_budget,
                common.seed.unwrap_or(config.seed),
            )?;
            let json = match witness {
                None => serde_json::json!({ "witness": null }),
                Some(w) => serde_json::json!({
                    "witness": {
                        "matrix": matrix_rows(&w.matrix),
                        "ratio": w.ratio,
                        "boundary": w.boundary,
                    }
                }),
            };
            emit(
                common,
                &format!("{}\n", serde_json::to_string_pretty(&json)?),
            )
        }
        _ => Err(Error::InvalidInput(
            "provide exactly one of `matrix` or `map` in the config".into(),
        )),
    }
}

// ---------------------------------------------------------------- solve

#[derive(Deserialize)]
struct SolveCliConfig {
    matrix: Option<PathBuf>,
    map: Option<PathBuf>,
    observation: PathBuf,
    constraint: Constraint,
    #[serde(default)]
    eta: f64,
    #[serde(default = "default_solve_method")]
    method: SolveMethod,
}

fn default_solve_method() -> SolveMethod {
    SolveMethod::Lp
}

fn cmd_solve(common: &Common) -> Result<()> {
    let config: SolveCliConfig = load_config(common)?;
    let y = io::read_vector_csv(&config.observation)?;
    match (&config.matrix, &config.map) {
        (Some(path), None) => {
            let a = io::read_matrix_csv(path)?;
            let inst = SignalInstance::new(a, y, config.constraint, config.eta)?;
            let (beta, report) = solve_signal(&inst, config.method)?;
            match common.format {
                Format::Csv => {
                    let row: Vec<String> = beta.iter().map(|x| x.to_string()).collect();
                    emit(common, &format!("{}\n", row.join(",")))
                }
                Format::Json => emit(
                    common,
                    &format!(
                        "{}\n",
                        serde_json::to_string_pretty(&serde_json::json!({
                            "solution": beta,
                            "report": report,
                        }))?
                    ),
                ),
            }
        }
        (None, Some(path)) => {
            let map = io::read_linear_map(path)?;
            let inst = MatrixInstance::new(map, y, config.constraint, config.eta)?;
            let (xhat, report) = solve_matrix(&inst)?;
            match common.format {
                Format::Csv => emit(common, &io::matrix_to_csv(&xhat)),
                Format::Json => emit(
                    common,
                    &format!(
                        "{}\n",
                        serde_json::to_string_pretty(&serde_json::json!({
                            "solution": matrix_rows(&xhat),
                            "report": report,
                        }))?
                    ),
                ),
            }
        }
        _ => Err(Error::InvalidInput(
            "provide exactly one of `matrix` or `map` in the config".into(),
        )),
    }
}

// ------------------------------------------------------- counterexample

#[derive(Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
enum CounterexampleCliConfig {
    Signal { p: usize, k: usize },
    Matrix { m: usize, n: usize, r: usize },
    GapSignal { p: usize },
    GapMatrix { m: usize, n: usize },
}

fn element_json(e: &KitElement) -> serde_json::Value {
    match e {
        KitElement::Vector(v) => serde_json::json!(v),
        KitElement::Matrix(m) => serde_json::json!(matrix_rows(m)),
    }
}

fn cmd_counterexample(common: &Common) -> Result<()> {
    let config: CounterexampleCliConfig = load_config(common)?;
    let kit = match config {
        CounterexampleCliConfig::Signal { p, k } => sharp_counterexample_signal(p, k)?,
        CounterexampleCliConfig::Matrix { m, n, r } => sharp_counterexample_matrix(m, n, r)?,
        CounterexampleCliConfig::GapSignal { p } => {
            identifiability_gap_example(GapKind::Signal { p })?
        }
        CounterexampleCliConfig::GapMatrix { m, n } => {
            identifiability_gap_example(GapKind::Matrix { m, n })?
        }
    };
    // CSV emits the operator itself (plus sidecar for maps); JSON carries
    // the whole kit.
    match common.format {
        Format::Csv => match &kit.operator {
            KitOperator::Signal(a) => emit(common, &io::matrix_to_csv(a)),
            KitOperator::Map(map) => {
                let out = common
                    .out
                    .as_ref()
                    .ok_or_else(|| Error::InvalidInput("maps need --out for the sidecar".into()))?;
                io::write_linear_map(out, map)
            }
        },
        Format::Json => {
            let operator = match &kit.operator {
                KitOperator::Signal(a) => serde_json::json!({
                    "kind": "matrix", "rows": matrix_rows(a),
                }),
                KitOperator::Map(map) => serde_json::json!({
                    "kind": "map", "q": map.q(), "m": map.m(), "n": map.n(),
                    "rep": matrix_rows(map.rep()),
                }),
            };
            let json = serde_json::json!({
                "order": kit.order,
                "claimed_ric": kit.claimed_ric,
                "operator": operator,
                "anchor": element_json(&kit.anchor),
                "colliding_pair": [
                    element_json(&kit.colliding_pair.0),
                    element_json(&kit.colliding_pair.1),
                ],
            });
            emit(
                common,
                &format!("{}\n", serde_json::to_string_pretty(&json)?),
            )
        }
    }
}

// ---------------------------------------------------------------- bounds

fn records_and_summary(
    common: &Common,
    records: &[TrialRecord],
    summary: &impl Serialize,
) -> Result<()> {
    let csv = io::records_to_csv(records);
    let summary_json = serde_json::to_string_pretty(summary)?;
    match (&common.out, common.format) {
        (Some(path), _) => {
            std::fs::write(path, csv)?;
            std::fs::write(summary_sidecar(path), format!("{summary_json}\n"))?;
            println!("{summary_json}");
        }
        (None, Format::Csv) => {
            print!("{csv}");
            eprintln!("{summary_json}");
        }
        (None, Format::Json) => {
            let combined = serde_json::json!({
                "records": records,
                "summary": serde_json::to_value(summary)?,
            });
            println!("{}", serde_json::to_string_pretty(&combined)?);
        }
    }
    Ok(())
}

fn summary_sidecar(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_os_string();
    name.push(".summary.json");
    PathBuf::from(name)
}

fn cmd_bounds(common: &Common) -> Result<()> {
    let mut config: ExperimentConfig = load_config(common)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    let (records, summary) = run_experiment(&config)?;
    records_and_summary(common, &records, &summary)
}

fn cmd_oracle(common: &Common) -> Result<()> {
    let mut config: OracleConfig = load_config(common)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    let (records, summary) = run_oracle_mc(&config)?;
    records_and_summary(common, &records, &summary)
}

// ---------------------------------------------------------------- divide

#[derive(Deserialize)]
struct DivideCliConfig {
    a: Vec<f64>,
    r: usize,
    #[serde(default)]
    slack: f64,
    #[serde(default = "default_alphas")]
    alphas: Vec<f64>,
}

fn default_alphas() -> Vec<f64> {
    vec![1.0, 2.0, 3.0]
}

fn cmd_divide(common: &Common) -> Result<()> {
    let config: DivideCliConfig = load_config(common)?;
    let tableau = divide(&config.a, config.r, config.slack)?;
    let width = tableau.m - 2 * tableau.r;
    let rows: Vec<Vec<f64>> = (0..tableau.r)
        .map(|i| (0..width).map(|j| tableau.allocation(i, j)).collect())
        .collect();
    let mut tail_checks = serde_json::Map::new();
    for &alpha in &config.alphas {
        let ok = tail_power_check(&config.a, config.r, config.slack, alpha)?;
        tail_checks.insert(format!("{alpha}"), serde_json::json!(ok));
    }
    let json = serde_json::json!({
        "r": tableau.r,
        "m": tableau.m,
        "slack": tableau.slack,
        "allocations": rows,
        "row_loads": (0..tableau.r).map(|i| tableau.row_load(i)).collect::<Vec<f64>>(),
        "constraints_satisfied": tableau.check().is_ok(),
        "tail_power": tail_checks,
    });
    emit(
        common,
        &format!("{}\n", serde_json::to_string_pretty(&json)?),
    )
}
