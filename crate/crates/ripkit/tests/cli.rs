//! End-to-end checks of the `ripkit` binary: every subcommand, the on-disk
//! formats, and determinism across thread counts.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ripkit() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ripkit"))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

struct Dirs {
    _tmp: tempfile::TempDir,
    root: PathBuf,
}

fn dirs() -> Dirs {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().to_path_buf();
    Dirs { _tmp: tmp, root }
}

#[test]
fn gen_matrix_and_sparse_signal() {
    let d = dirs();
    let cfg = d.root.join("gen.json");
    write(
        &cfg,
        r#"{"kind": "gaussian_matrix", "n": 4, "p": 6, "seed": 3}"#,
    );
    let out_path = d.root.join("a.csv");
    run_ok(
        ripkit()
            .args(["gen", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out_path),
    );
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert_eq!(text.lines().next().unwrap().split(',').count(), 6);

    // Same seed gives identical bytes; --seed overrides.
    run_ok(
        ripkit()
            .args(["gen", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(d.root.join("b.csv")),
    );
    assert_eq!(
        std::fs::read(&out_path).unwrap(),
        std::fs::read(d.root.join("b.csv")).unwrap()
    );
    run_ok(
        ripkit()
            .args(["gen", "--config"])
            .arg(&cfg)
            .args(["--seed", "9"])
            .arg("--out")
            .arg(d.root.join("c.csv")),
    );
    assert_ne!(
        std::fs::read(&out_path).unwrap(),
        std::fs::read(d.root.join("c.csv")).unwrap()
    );

    write(
        &cfg,
        r#"{"kind": "sparse_signal", "p": 10, "k": 3, "seed": 1}"#,
    );
    let out = run_ok(ripkit().args(["gen", "--config"]).arg(&cfg));
    let signal = stdout_str(&out);
    let nonzero = signal
        .trim()
        .split(',')
        .filter(|c| c.parse::<f64>().unwrap() != 0.0)
        .count();
    assert_eq!(nonzero, 3);
}

#[test]
fn counterexample_rip_and_nsp_pipeline() {
    let d = dirs();
    let cx_cfg = d.root.join("cx.json");
    write(&cx_cfg, r#"{"kind": "signal", "p": 6, "k": 2}"#);
    let a_path = d.root.join("sharp.csv");
    run_ok(
        ripkit()
            .args(["counterexample", "--config"])
            .arg(&cx_cfg)
            .arg("--out")
            .arg(&a_path),
    );

    // Exact RIC of the constructed operator is 1/3.
    let rip_cfg = d.root.join("rip.json");
    write(
        &rip_cfg,
        &format!(r#"{{"matrix": {:?}, "k": 2}}"#, a_path.to_str().unwrap()),
    );
    let out = run_ok(ripkit().args(["rip", "--config"]).arg(&rip_cfg));
    let view: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    let value = view["value"].as_f64().unwrap();
    assert!((value - 1.0 / 3.0).abs() < 1e-9, "value {value}");
    assert_eq!(view["exact"], serde_json::json!(true));

    // The certification lands exactly on the boundary.
    let nsp_cfg = d.root.join("nsp.json");
    write(
        &nsp_cfg,
        &format!(r#"{{"matrix": {:?}, "k": 2}}"#, a_path.to_str().unwrap()),
    );
    let out = run_ok(ripkit().args(["nsp", "--config"]).arg(&nsp_cfg));
    let view: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(view["status"], serde_json::json!("boundary"));
    let worst = view["worst_value"].as_f64().unwrap();
    assert!((worst - 0.5).abs() < 1e-9, "worst value {worst}");
}

#[test]
fn matrix_counterexample_map_round_trip() {
    let d = dirs();
    let cfg = d.root.join("cx.json");
    write(&cfg, r#"{"kind": "matrix", "m": 4, "n": 4, "r": 2}"#);
    let map_path = d.root.join("map.csv");
    run_ok(
        ripkit()
            .args(["counterexample", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&map_path),
    );
    assert!(d.root.join("map.csv.json").exists(), "sidecar missing");

    let rip_cfg = d.root.join("rip.json");
    write(
        &rip_cfg,
        &format!(
            r#"{{"map": {:?}, "r": 2, "seed": 5}}"#,
            map_path.to_str().unwrap()
        ),
    );
    let out = run_ok(ripkit().args(["rip", "--config"]).arg(&rip_cfg));
    let view: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(view["exact"], serde_json::json!(false));
    let value = view["value"].as_f64().unwrap();
    assert!(value >= 1.0 / 3.0 - 1e-6, "lower bound {value}");

    // The null-space search finds the boundary witness.
    let nsp_cfg = d.root.join("nsp.json");
    write(
        &nsp_cfg,
        &format!(r#"{{"map": {:?}, "r": 2}}"#, map_path.to_str().unwrap()),
    );
    let out = run_ok(ripkit().args(["nsp", "--config"]).arg(&nsp_cfg));
    let view: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    let witness = &view["witness"];
    assert!(!witness.is_null());
    assert_eq!(witness["boundary"], serde_json::json!(true));
}

#[test]
fn solve_recovers_sparse_signal_from_files() {
    let d = dirs();
    // Identity sensing keeps the expectation obvious.
    let a_path = d.root.join("a.csv");
    let mut rows = String::new();
    for i in 0..5 {
        let row: Vec<&str> = (0..5).map(|j| if i == j { "1" } else { "0" }).collect();
        rows.push_str(&row.join(","));
        rows.push('\n');
    }
    write(&a_path, &rows);
    let y_path = d.root.join("y.csv");
    write(&y_path, "0,2.5,0,-1,0\n");
    let cfg = d.root.join("solve.json");
    write(
        &cfg,
        &format!(
            r#"{{"matrix": {:?}, "observation": {:?}, "constraint": "equality"}}"#,
            a_path.to_str().unwrap(),
            y_path.to_str().unwrap()
        ),
    );
    let out = run_ok(
        ripkit()
            .args(["solve", "--config"])
            .arg(&cfg)
            .args(["--format", "json"]),
    );
    let view: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    let solution: Vec<f64> = view["solution"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let expected = [0.0, 2.5, 0.0, -1.0, 0.0];
    for (s, e) in solution.iter().zip(expected) {
        assert!((s - e).abs() < 1e-8);
    }
    assert_eq!(view["report"]["converged"], serde_json::json!(true));
}

#[test]
fn bounds_writes_records_and_summary_and_is_deterministic() {
    let d = dirs();
    let cfg = d.root.join("exp.json");
    write(
        &cfg,
        r#"{"kind": "exact_recovery", "n": 10, "p": 12, "k": 2,
            "trials": 4, "seed": 11, "certify_nsp": false}"#,
    );
    let strip_wall = |text: &str| -> String {
        text.lines()
            .map(|line| {
                let mut cells: Vec<&str> = line.split(',').collect();
                cells.pop();
                cells.join(",")
            })
            .collect::<Vec<_>>()
            .join("\n")
    };

    let out_a = d.root.join("records_a.csv");
    run_ok(
        ripkit()
            .args(["bounds", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out_a)
            .env("RIPKIT_THREADS", "1"),
    );
    let csv_a = std::fs::read_to_string(&out_a).unwrap();
    assert!(csv_a.starts_with("trial,delta,error,bound,success,iters,wall_ms\n"));
    assert_eq!(csv_a.lines().count(), 5);
    let summary_text = std::fs::read_to_string(d.root.join("records_a.csv.summary.json")).unwrap();
    let summary: serde_json::Value = serde_json::from_str(&summary_text).unwrap();
    assert_eq!(summary["trials"], serde_json::json!(4));
    assert_eq!(summary["config"]["seed"], serde_json::json!(11));

    // Re-run with a different worker cap: identical apart from wall_ms.
    let out_b = d.root.join("records_b.csv");
    run_ok(
        ripkit()
            .args(["bounds", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out_b)
            .env("RIPKIT_THREADS", "4"),
    );
    let csv_b = std::fs::read_to_string(&out_b).unwrap();
    assert_eq!(strip_wall(&csv_a), strip_wall(&csv_b));
}

#[test]
fn oracle_subcommand_reports_rates() {
    let d = dirs();
    let cfg = d.root.join("oracle.json");
    write(
        &cfg,
        r#"{"p": 12, "k": 2, "rows": 128, "sigma": 0.1, "trials": 5, "seed": 2}"#,
    );
    let out = run_ok(
        ripkit()
            .args(["oracle", "--config"])
            .arg(&cfg)
            .args(["--format", "json"]),
    );
    let view: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(view["records"].as_array().unwrap().len(), 5);
    let delta = view["summary"]["delta"].as_f64().unwrap();
    assert!(delta < 1.0 / 3.0);
    assert!(view["summary"]["violation_rate"].as_f64().unwrap() <= 1.0);
}

#[test]
fn divide_reports_tableau_and_tail_checks() {
    let d = dirs();
    let cfg = d.root.join("divide.json");
    write(&cfg, r#"{"a": [5.0, 3.0, 2.0], "r": 1, "slack": 0.0}"#);
    let out = run_ok(ripkit().args(["divide", "--config"]).arg(&cfg));
    let view: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(view["constraints_satisfied"], serde_json::json!(true));
    assert_eq!(view["allocations"], serde_json::json!([[2.0]]));
    for alpha in ["1", "2", "3"] {
        assert_eq!(
            view["tail_power"][alpha],
            serde_json::json!(true),
            "alpha {alpha}"
        );
    }
}

#[test]
fn gap_counterexamples_through_cli() {
    let d = dirs();
    let cfg = d.root.join("gap.json");
    write(&cfg, r#"{"kind": "gap_signal", "p": 4}"#);
    let out = run_ok(
        ripkit()
            .args(["counterexample", "--config"])
            .arg(&cfg)
            .args(["--format", "json"]),
    );
    let view: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(view["claimed_ric"], serde_json::json!(0.0));
    assert_eq!(view["order"], serde_json::json!(1));

    write(&cfg, r#"{"kind": "gap_matrix", "m": 3, "n": 3}"#);
    let out = run_ok(
        ripkit()
            .args(["counterexample", "--config"])
            .arg(&cfg)
            .args(["--format", "json"]),
    );
    let view: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(view["operator"]["q"], serde_json::json!(7));
}

#[test]
fn invalid_config_fails_cleanly() {
    let d = dirs();
    let cfg = d.root.join("bad.json");
    write(&cfg, r#"{"a": [1.0, 2.0], "r": 1, "slack": 0.0}"#);
    let out = ripkit()
        .args(["divide", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("error:"), "stderr was: {err}");
}
