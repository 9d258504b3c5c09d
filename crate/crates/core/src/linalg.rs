//! Dense symmetric eigendecomposition and small-matrix helpers.
//!
//! The kernel matrices here are tiny (N is the peakon count, single digits),
//! so a cyclic Jacobi sweep is accurate to machine precision and keeps the
//! crate free of heavyweight linear-algebra dependencies under `no_std`.

use alloc::vec;
use alloc::vec::Vec;

// Inherent float methods come from std in test builds; this import provides
// them for the no_std library build.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Eigendecomposition of a real symmetric matrix: `A = V diag(values) Vᵀ`.
///
/// `vectors` is row-major with eigenvector `k` stored as column `k`,
/// i.e. `vectors[i * n + k]` is component `i` of the k-th eigenvector.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
    pub n: usize,
}

/// Cyclic Jacobi eigensolver for a row-major symmetric `n x n` matrix.
///
/// Off-diagonal mass is annihilated sweep by sweep; for the matrix sizes used
/// here convergence takes a handful of sweeps. Fails only if the off-diagonal
/// norm refuses to drop below `1e-14` times the matrix scale within 64 sweeps.
pub fn sym_eigen(matrix: &[f64], n: usize) -> Result<SymEigen> {
    assert_eq!(matrix.len(), n * n, "matrix buffer must be n*n");
    if n == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let scale = a.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1.0);
    let tol = 1e-14 * scale;

    for _sweep in 0..64 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[p * n + q].abs());
            }
        }
        if off <= tol {
            let values = (0..n).map(|i| a[i * n + i]).collect();
            return Ok(SymEigen { values, vectors: v, n });
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= tol * 1e-2 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                // Stable tangent of the rotation angle.
                let t = if theta.abs() > 1e12 {
                    0.5 / theta
                } else {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                // Update rows/columns p and q of A (symmetric rotation).
                for k in 0..n {
                    if k != p && k != q {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[p * n + k] = a[k * n + p];
                        a[k * n + q] = s * akp + c * akq;
                        a[q * n + k] = a[k * n + q];
                    }
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;

                // Accumulate the eigenvector rotation.
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    Err(Error::Numeric("Jacobi eigensolver did not converge"))
}

impl SymEigen {
    /// Reassemble `f(A) = V diag(f(λ)) Vᵀ` for a spectral map `f`.
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let n = self.n;
        let mapped: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.vectors[i * n + k] * mapped[k] * self.vectors[j * n + k];
                }
                out[i * n + j] = acc;
                out[j * n + i] = acc;
            }
        }
        out
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `y = M x` for a row-major `n x n` matrix.
pub fn mat_vec(m: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for i in 0..n {
        let row = &m[i * n..(i + 1) * n];
        y[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
    }
    y
}

/// Row-major product of two `n x n` matrices.
pub fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

/// Largest absolute entry of the difference `A - B`.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}
