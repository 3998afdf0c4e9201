//! On-disk formats: headerless CSV for matrices and vectors (one row per
//! line, ASCII decimals), a JSON sidecar for linear maps, a fixed-header
//! CSV for trial records, and JSON (pretty) for summaries.

use crate::error::{Error, Result};
use crate::harness::TrialRecord;
use crate::numerics::DenseMatrix;
use crate::recovery::LinearMap;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub fn matrix_to_csv(m: &DenseMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn matrix_from_csv(text: &str) -> Result<DenseMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let row: Vec<f64> = trimmed
            .split(',')
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: bad number {cell:?}", lineno + 1)))
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty CSV".into()));
    }
    DenseMatrix::from_rows(&rows)
}

pub fn write_matrix_csv(path: &Path, m: &DenseMatrix) -> Result<()> {
    std::fs::write(path, matrix_to_csv(m))?;
    Ok(())
}

pub fn read_matrix_csv(path: &Path) -> Result<DenseMatrix> {
    matrix_from_csv(&std::fs::read_to_string(path)?)
}

/// Vectors are stored as a single CSV row; a single-column file is also
/// accepted on read.
pub fn write_vector_csv(path: &Path, v: &[f64]) -> Result<()> {
    let row: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    std::fs::write(path, format!("{}\n", row.join(",")))?;
    Ok(())
}

pub fn read_vector_csv(path: &Path) -> Result<Vec<f64>> {
    let m = read_matrix_csv(path)?;
    if m.rows() == 1 {
        Ok(m.row(0).to_vec())
    } else if m.cols() == 1 {
        Ok(m.column(0))
    } else {
        Err(Error::Parse(format!(
            "expected a vector, found {}x{}",
            m.rows(),
            m.cols()
        )))
    }
}

#[derive(Serialize, Deserialize)]
struct MapSidecar {
    q: usize,
    m: usize,
    n: usize,
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut name = path.as_os_str().to_os_string();
    name.push(".json");
    std::path::PathBuf::from(name)
}

/// Writes the `q x (m n)` representation as CSV plus a `<path>.json`
/// sidecar carrying the shape.
pub fn write_linear_map(path: &Path, map: &LinearMap) -> Result<()> {
    write_matrix_csv(path, map.rep())?;
    let sidecar = MapSidecar {
        q: map.q(),
        m: map.m(),
        n: map.n(),
    };
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}

pub fn read_linear_map(path: &Path) -> Result<LinearMap> {
    let rep = read_matrix_csv(path)?;
    let sidecar: MapSidecar = serde_json::from_str(&std::fs::read_to_string(sidecar_path(path))?)?;
    if rep.rows() != sidecar.q || rep.cols() != sidecar.m * sidecar.n {
        return Err(Error::Parse(format!(
            "sidecar shape {}x({}*{}) does not match CSV {}x{}",
            sidecar.q,
            sidecar.m,
            sidecar.n,
            rep.rows(),
            rep.cols()
        )));
    }
    LinearMap::new(sidecar.m, sidecar.n, rep)
}

pub const RECORD_HEADER: &str = "trial,delta,error,bound,success,iters,wall_ms";

/// Renders trial records under the fixed header. All columns except
/// `wall_ms` are deterministic for a given config and seed.
pub fn records_to_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from(RECORD_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.3}\n",
            r.trial,
            r.delta,
            r.error,
            r.bound,
            u8::from(r.success),
            r.iters,
            r.wall_ms
        ));
    }
    out
}

pub fn write_records_csv(path: &Path, records: &[TrialRecord]) -> Result<()> {
    std::fs::write(path, records_to_csv(records))?;
    Ok(())
}
