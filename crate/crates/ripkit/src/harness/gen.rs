//! Deterministic instance generators. Everything is a pure function of the
//! generator state, so a seed pins the whole experiment.

use crate::error::{Error, Result};
use crate::harness::config::Amplitude;
use crate::numerics::{dot, l2_norm, DenseMatrix};
use crate::recovery::LinearMap;
use crate::rng::SplitMix64;

/// Gaussian sensing matrix with entry variance `1/n`, so columns have unit
/// expected squared norm.
pub fn gaussian_matrix(n: usize, p: usize, rng: &mut SplitMix64) -> DenseMatrix {
    let scale = 1.0 / (n as f64).sqrt();
    let mut a = DenseMatrix::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            a.set(i, j, rng.next_normal() * scale);
        }
    }
    a
}

/// Rescales every column to unit l2 norm.
pub fn normalize_columns(a: &DenseMatrix) -> DenseMatrix {
    let mut out = a.clone();
    for j in 0..a.cols() {
        let norm = l2_norm(&a.column(j));
        if norm > 0.0 {
            for i in 0..a.rows() {
                out.set(i, j, a.get(i, j) / norm);
            }
        }
    }
    out
}

/// Random orthogonal matrix: Gaussian draw followed by modified
/// Gram-Schmidt (twice, for orthogonality at machine precision).
pub fn random_orthogonal(p: usize, rng: &mut SplitMix64) -> DenseMatrix {
    let mut q = DenseMatrix::zeros(p, p);
    for j in 0..p {
        let mut col = rng.normal_vec(p);
        for _ in 0..2 {
            for prev in 0..j {
                let pc = q.column(prev);
                let proj = dot(&col, &pc);
                for i in 0..p {
                    col[i] -= proj * pc[i];
                }
            }
        }
        let norm = l2_norm(&col);
        for (i, &v) in col.iter().enumerate() {
            q.set(i, j, v / norm);
        }
    }
    q
}

/// Exactly k nonzeros on a uniformly random support; amplitudes are plus or
/// minus one (`Unit`) or standard normal (`Gaussian`).
pub fn sparse_signal(
    p: usize,
    k: usize,
    amplitude: Amplitude,
    rng: &mut SplitMix64,
) -> Result<Vec<f64>> {
    if k > p {
        return Err(Error::InvalidInput(format!("k={k} exceeds p={p}")));
    }
    let support = rng.subset(p, k);
    let mut beta = vec![0.0; p];
    for &i in &support {
        beta[i] = match amplitude {
            Amplitude::Unit => {
                if rng.next_f64() < 0.5 {
                    1.0
                } else {
                    -1.0
                }
            }
            Amplitude::Gaussian => {
                // Reject a zero draw so the support size stays exact.
                let mut v = rng.next_normal();
                while v == 0.0 {
                    v = rng.next_normal();
                }
                v
            }
        };
    }
    Ok(beta)
}

/// Gaussian linear map with entry variance `1/q`.
pub fn gaussian_map(q: usize, m: usize, n: usize, rng: &mut SplitMix64) -> Result<LinearMap> {
    let rep = gaussian_matrix(q, m * n, rng);
    LinearMap::new(m, n, rep)
}

/// Product of two Gaussian factors with inner dimension r.
pub fn low_rank(m: usize, n: usize, r: usize, rng: &mut SplitMix64) -> Result<DenseMatrix> {
    if r > m.min(n) {
        return Err(Error::InvalidInput(format!("r={r} exceeds min({m}, {n})")));
    }
    let mut left = DenseMatrix::zeros(m, r);
    let mut right = DenseMatrix::zeros(n, r);
    for i in 0..m {
        for j in 0..r {
            left.set(i, j, rng.next_normal());
        }
    }
    for i in 0..n {
        for j in 0..r {
            right.set(i, j, rng.next_normal());
        }
    }
    Ok(left.matmul(&right.transpose()))
}

/// Centered Gaussian noise with standard deviation sigma.
pub fn gaussian_noise(dim: usize, sigma: f64, rng: &mut SplitMix64) -> Vec<f64> {
    (0..dim).map(|_| sigma * rng.next_normal()).collect()
}

/// Uniform on the sphere of the given radius (boundary noise for the l2
/// constraint).
pub fn sphere_noise(dim: usize, radius: f64, rng: &mut SplitMix64) -> Vec<f64> {
    loop {
        let g = rng.normal_vec(dim);
        let norm = l2_norm(&g);
        if norm > 0.0 {
            return g.iter().map(|x| x * radius / norm).collect();
        }
    }
}
