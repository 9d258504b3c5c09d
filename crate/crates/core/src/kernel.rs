//! Peakon kernel matrix `E(x)`, its square root and inverse square root.
//!
//! `E(x)_{ij} = exp(-|x_i - x_j|)` is symmetric positive semi-definite with
//! unit diagonal, positive definite exactly when all coordinates are
//! distinct, and singular on the diagonal. In two dimensions everything is
//! closed-form in `ζ = exp(-|x_1 - x_2|)`: the eigenvalues of `E` are
//! `1 ± ζ`, the square root has entries `(√(1+ζ) ± √(1-ζ))/2`, and the
//! inverse square root swaps the roots into the denominators. The map
//! `x ↦ √E(x)` is only 1/2-Hölder across the diagonal (`√(1-ζ) ~ √|x_1-x_2|`),
//! which is the source of every regularity subtlety downstream.

use alloc::vec;
use alloc::vec::Vec;

// Inherent float methods come from std in test builds; this import provides
// them for the no_std library build.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg;

/// Below this coordinate separation the two-point kernel is treated as
/// singular and inverse-square-root operations refuse to run: `1/(1-ζ)`
/// overflows as `ζ → 1`.
pub const DEGENERACY_FLOOR: f64 = 1e-12;

/// Operator-norm bound of `√E(x)` over all two-point configurations:
/// the largest eigenvalue of `E` is `1 + ζ ≤ 2`.
pub const BOUND_B_2D: f64 = core::f64::consts::SQRT_2;

/// A point `x = (x_1, …, x_N)` in configuration space (peakon positions).
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigPoint {
    coords: Vec<f64>,
}

impl ConfigPoint {
    /// Requires at least one coordinate, all finite.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("configuration coordinate"));
        }
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Euclidean distance to another point of the same dimension.
    pub fn distance(&self, other: &Self) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `|x_1 - x_2|` for two-point configurations.
    pub fn separation(&self) -> Result<f64> {
        self.require_dim(2)?;
        Ok((self.coords[0] - self.coords[1]).abs())
    }

    /// Whether the point lies exactly on the diagonal `D = {x_1 = x_2}`.
    pub fn on_diagonal(&self) -> bool {
        self.coords.len() == 2 && self.coords[0] == self.coords[1]
    }

    pub(crate) fn require_dim(&self, n: usize) -> Result<()> {
        if self.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.dim() });
        }
        Ok(())
    }
}

/// The kernel matrix `E(x)` together with the point it was built from.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    entries: Vec<f64>,
    source_point: ConfigPoint,
}

impl KernelMatrix {
    pub fn dim(&self) -> usize {
        self.source_point.dim()
    }

    /// Row-major `N x N` entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn source_point(&self) -> &ConfigPoint {
        &self.source_point
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim() + j]
    }

    /// Smallest eigenvalue (spectral, via Jacobi).
    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(linalg::sym_eigen(&self.entries, self.dim())?.min_value())
    }
}

/// A symmetric PSD square root of a kernel matrix.
///
/// For `N = 2` the closed form is used and `zeta = exp(-|x_1 - x_2|)` is
/// recorded; for general `N` the root comes from the spectral decomposition
/// and `zeta` is `None`.
#[derive(Debug, Clone)]
pub struct SqrtKernel {
    entries: Vec<f64>,
    n: usize,
    zeta: Option<f64>,
}

impl SqrtKernel {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn zeta(&self) -> Option<f64> {
        self.zeta
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// `√E(x) · ξ`.
    pub fn apply(&self, xi: &[f64]) -> Vec<f64> {
        linalg::mat_vec(&self.entries, self.n, xi)
    }

    /// Matrix square `√E · √E`, for verification against `E`.
    pub fn squared(&self) -> Vec<f64> {
        linalg::mat_mul(&self.entries, &self.entries, self.n)
    }
}

/// `E(x)` with entries `exp(-|x_i - x_j|)`; unit diagonal, symmetric, PSD.
pub fn kernel_matrix(x: &ConfigPoint) -> KernelMatrix {
    let n = x.dim();
    let c = x.coords();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        entries[i * n + i] = 1.0;
        for j in (i + 1)..n {
            let e = (-(c[i] - c[j]).abs()).exp();
            entries[i * n + j] = e;
            entries[j * n + i] = e;
        }
    }
    KernelMatrix { entries, source_point: x.clone() }
}

/// `(√(1+ζ), √(1-ζ))` computed cancellation-free: `1 - ζ` goes through
/// `-expm1(-d)` so tiny separations keep full relative accuracy.
fn sqrt_pair(separation: f64) -> (f64, f64) {
    let zeta = (-separation).exp();
    let one_minus = -(-separation).exp_m1();
    ((1.0 + zeta).sqrt(), one_minus.sqrt())
}

/// Closed-form `√E(x)` for two-point configurations:
/// diagonal entries `(√(1+ζ) + √(1-ζ))/2`, off-diagonal
/// `(√(1+ζ) - √(1-ζ))/2`. Continuous through the diagonal, where it
/// degenerates to `(1/√2)·[[1,1],[1,1]]`.
pub fn sqrt_kernel_2d(x: &ConfigPoint) -> Result<SqrtKernel> {
    x.require_dim(2)?;
    let d = x.separation()?;
    let (sp, sm) = sqrt_pair(d);
    let diag = 0.5 * (sp + sm);
    let off = 0.5 * (sp - sm);
    Ok(SqrtKernel {
        entries: vec![diag, off, off, diag],
        n: 2,
        zeta: Some((-d).exp()),
    })
}

/// Unique symmetric PSD square root for any `N`, via the spectral
/// decomposition with negative eigenvalues (numerical noise) clamped to 0.
pub fn sqrt_kernel_nd(x: &ConfigPoint) -> Result<SqrtKernel> {
    let e = kernel_matrix(x);
    let n = x.dim();
    let eig = linalg::sym_eigen(e.entries(), n)?;
    let entries = eig.spectral_map(|l| l.max(0.0).sqrt());
    Ok(SqrtKernel { entries, n, zeta: None })
}

/// `√E(x) · ξ` by the cheapest applicable route: identity for `N = 1`,
/// closed form for `N = 2`, spectral otherwise.
pub fn sqrt_apply(x: &ConfigPoint, xi: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; x.dim()];
    sqrt_apply_into(x.coords(), xi, &mut out)?;
    Ok(out)
}

/// Allocation-free form of [`sqrt_apply`] on raw coordinate slices, for the
/// integrator's inner loop (`N <= 2` never allocates).
pub fn sqrt_apply_into(coords: &[f64], xi: &[f64], out: &mut [f64]) -> Result<()> {
    let n = coords.len();
    if xi.len() != n || out.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: xi.len().min(out.len()) });
    }
    match n {
        0 => Err(Error::DimensionMismatch { expected: 1, got: 0 }),
        1 => {
            out[0] = xi[0];
            Ok(())
        }
        2 => {
            let (sp, sm) = sqrt_pair((coords[0] - coords[1]).abs());
            let diag = 0.5 * (sp + sm);
            let off = 0.5 * (sp - sm);
            out[0] = diag * xi[0] + off * xi[1];
            out[1] = off * xi[0] + diag * xi[1];
            Ok(())
        }
        _ => {
            let x = ConfigPoint::new(coords.to_vec())?;
            let y = sqrt_kernel_nd(&x)?.apply(xi);
            out.copy_from_slice(&y);
            Ok(())
        }
    }
}

/// `√E(x)⁻¹ ξ` for an off-diagonal two-point configuration:
/// `½ ((ξ₁+ξ₂)/√(1+ζ) ± (ξ₁-ξ₂)/√(1-ζ))`.
pub fn inv_sqrt_apply(x: &ConfigPoint, xi: &[f64; 2]) -> Result<[f64; 2]> {
    x.require_dim(2)?;
    let d = x.separation()?;
    if d < DEGENERACY_FLOOR {
        return Err(Error::DegeneratePoint { separation: d, floor: DEGENERACY_FLOOR });
    }
    let (sp, sm) = sqrt_pair(d);
    let sum = (xi[0] + xi[1]) / sp;
    let diff = (xi[0] - xi[1]) / sm;
    Ok([0.5 * (sum + diff), 0.5 * (sum - diff)])
}

/// The exact squared norm `|√E(x)⁻¹ ξ|²` together with its separation-based
/// upper bound.
///
/// Exact: `¼ (2(ξ₁+ξ₂)²/(1+ζ) + 2(ξ₁-ξ₂)²/(1-ζ))`.
/// Bound: `½ ((ξ₁+ξ₂)² + (1+|x₁-x₂|)/|x₁-x₂| · (ξ₁-ξ₂)²)`, which dominates
/// the exact value via `1/(1-e⁻ˢ) ≤ (1+s)/s`.
pub fn inv_sqrt_norm_bound(x: &ConfigPoint, xi: &[f64; 2]) -> Result<(f64, f64)> {
    x.require_dim(2)?;
    let d = x.separation()?;
    if d < DEGENERACY_FLOOR {
        return Err(Error::DegeneratePoint { separation: d, floor: DEGENERACY_FLOOR });
    }
    let zeta = (-d).exp();
    let one_minus = -(-d).exp_m1();
    let sum_sq = (xi[0] + xi[1]) * (xi[0] + xi[1]);
    let diff_sq = (xi[0] - xi[1]) * (xi[0] - xi[1]);
    let exact = 0.25 * (2.0 * sum_sq / (1.0 + zeta) + 2.0 * diff_sq / one_minus);
    let bound = 0.5 * (sum_sq + (1.0 + d) / d * diff_sq);
    Ok((exact, bound))
}

/// Per-point operator-norm bound `‖√E(x)‖ = √(λ_max(E(x)))`.
///
/// For `N = 2` this is `√(1+ζ) ≤ √2`; for general `N` the largest eigenvalue
/// is computed spectrally (it never exceeds `N` by Gershgorin).
pub fn matrix_norm_bound(x: &ConfigPoint) -> Result<f64> {
    match x.dim() {
        1 => Ok(1.0),
        2 => {
            let zeta = (-x.separation()?).exp();
            Ok((1.0 + zeta).sqrt())
        }
        n => {
            let e = kernel_matrix(x);
            let eig = linalg::sym_eigen(e.entries(), n)?;
            Ok(eig.max_value().max(0.0).sqrt())
        }
    }
}

/// Uniform bound `sup_x ‖√E(x)‖` in dimension `n`: `√n`, attained as all
/// coordinates coincide (for `n = 2` this is the constant `B = √2`).
pub fn uniform_norm_bound(n: usize) -> f64 {
    (n as f64).sqrt()
}
