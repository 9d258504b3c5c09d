//! Backward semi-Lagrangian solver for the value function
//! `v(y,t) = inf { ½∫ₜᵀ|α|² ds + g(x(T)) }` over `x' = √E(x)α`, `x(t) = y`,
//! together with two independent oracles.
//!
//! One backward step relaxes every node against the next time slice:
//!
//! `v(y, t_k) = min_{a ∈ A} [ Δt·½|a|² + Interp v(·, t_{k+1}) at y + Δt √E(y) a ]`
//!
//! with multilinear interpolation and `v(·, T) = g`. The control set `A`
//! discretises the dual variable of the Legendre form: geometric radii times
//! unit directions, plus the zero control, whose foot point is the node
//! itself and is therefore evaluated exactly — that makes `v ≤ g` and
//! `|v| ≤ ‖g‖_∞` hold by exact induction, not up to interpolation noise.
//! Foot points leaving the box are clamped and charged the Lipschitz penalty
//! `L·(clamp distance)`; consumers should read only the dependence interior
//! (shrunk by `B·a_max·(T-t)` per side).
//!
//! Oracles: [`hopflax_1d`] (in one dimension `E ≡ [1]`, so the Hopf-Lax
//! formula `v(y,t) = min_z |y-z|²/(2(T-t)) + g(z)` is exact) and
//! [`direct_shoot`] (derivative-free minimisation over piecewise-constant
//! controls — an upper bound on the infimum up to integrator error).

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

// Inherent float methods come from std in test builds; this import provides
// them for the no_std library build.
#[allow(unused_imports)]
use num_traits::Float;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::control::PiecewiseControl;
use crate::error::{Error, Result};
use crate::kernel::{self, ConfigPoint};

/// Bounded Lipschitz terminal datum `g` with its constants.
#[derive(Clone)]
pub struct TerminalData {
    g: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    lipschitz: f64,
    sup_norm: f64,
    name: String,
}

impl core::fmt::Debug for TerminalData {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("TerminalData")
            .field("name", &self.name)
            .field("lipschitz", &self.lipschitz)
            .field("sup_norm", &self.sup_norm)
            .finish()
    }
}

impl TerminalData {
    pub fn new(
        name: &str,
        g: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        lipschitz: f64,
        sup_norm: f64,
    ) -> Self {
        Self { g: Arc::new(g), lipschitz, sup_norm, name: name.into() }
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        (self.g)(y)
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `g ≡ c`: L = 0, `‖g‖_∞ = |c|`.
    pub fn constant(c: f64) -> Self {
        Self::new("const", move |_| c, 0.0, c.abs())
    }

    /// `g(y) = clamp(|y - y₀|, 0, R) = min(|y - y₀|, R)`: L = 1, `‖g‖_∞ = R`.
    pub fn cone(center: Vec<f64>, radius: f64) -> Self {
        Self::new(
            "cone",
            move |y: &[f64]| {
                let d: f64 = y
                    .iter()
                    .zip(&center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                d.min(radius)
            },
            1.0,
            radius,
        )
    }

    /// `g(y) = scale·sin(y₁)·sin(y₂)`: L = scale, `‖g‖_∞ = scale`.
    pub fn sine_product(scale: f64) -> Self {
        Self::new(
            "sinsin",
            move |y: &[f64]| scale * y[0].sin() * y[1].sin(),
            scale.abs(),
            scale.abs(),
        )
    }
}

/// Discretisation of the control space: radii (starting at 0) crossed with
/// unit directions. The zero control is always a member.
#[derive(Debug, Clone)]
pub struct ControlSet {
    radii: Vec<f64>,
    directions: Vec<Vec<f64>>,
    dim: usize,
}

impl ControlSet {
    pub fn new(radii: Vec<f64>, directions: Vec<Vec<f64>>, dim: usize) -> Result<Self> {
        if radii.first() != Some(&0.0) {
            return Err(Error::Config("radius list must start at 0".into()));
        }
        if radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("radii must be strictly increasing".into()));
        }
        if radii.len() < 2 {
            return Err(Error::Config("control set needs a positive max radius".into()));
        }
        if directions.is_empty() {
            return Err(Error::Config("control set needs directions".into()));
        }
        for u in &directions {
            if u.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: u.len() });
            }
            let n: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (n - 1.0).abs() > 1e-12 {
                return Err(Error::Config("directions must be unit vectors".into()));
            }
        }
        Ok(Self { radii, directions, dim })
    }

    /// Geometric radii `a_max/100 … a_max` (16 by default) plus zero, times
    /// uniformly spread angles (32 by default).
    pub fn uniform_2d(n_radii: usize, n_angles: usize, a_max: f64) -> Result<Self> {
        let directions = (0..n_angles)
            .map(|m| {
                let th = core::f64::consts::TAU * m as f64 / n_angles as f64;
                vec![th.cos(), th.sin()]
            })
            .collect();
        Self::new(geometric_radii(n_radii, a_max)?, directions, 2)
    }

    /// One-dimensional set: radii times the two directions ±1.
    pub fn line_1d(n_radii: usize, a_max: f64) -> Result<Self> {
        Self::new(geometric_radii(n_radii, a_max)?, vec![vec![1.0], vec![-1.0]], 1)
    }

    /// Axis directions ±e_i plus the two diagonal directions ±(1,…,1)/√n.
    pub fn axes_nd(dim: usize, n_radii: usize, a_max: f64) -> Result<Self> {
        let mut directions = Vec::with_capacity(2 * dim + 2);
        for i in 0..dim {
            for sign in [1.0, -1.0] {
                let mut u = vec![0.0; dim];
                u[i] = sign;
                directions.push(u);
            }
        }
        let c = 1.0 / (dim as f64).sqrt();
        directions.push(vec![c; dim]);
        directions.push(vec![-c; dim]);
        Self::new(geometric_radii(n_radii, a_max)?, directions, dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn a_max(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    /// Materialise the nonzero controls as flat `dim`-vectors with their
    /// squared norms (the zero control is handled exactly by the solver).
    fn materialise(&self) -> (Vec<f64>, Vec<f64>) {
        let mut flat = Vec::new();
        let mut norm_sq = Vec::new();
        for &r in &self.radii[1..] {
            for u in &self.directions {
                for &c in u {
                    flat.push(r * c);
                }
                norm_sq.push(r * r);
            }
        }
        (flat, norm_sq)
    }
}

fn geometric_radii(n_radii: usize, a_max: f64) -> Result<Vec<f64>> {
    if !(a_max > 0.0) || !a_max.is_finite() {
        return Err(Error::Config("a_max must be positive".into()));
    }
    if n_radii < 1 {
        return Err(Error::Config("need at least one positive radius".into()));
    }
    let mut radii = Vec::with_capacity(n_radii + 1);
    radii.push(0.0);
    if n_radii == 1 {
        radii.push(a_max);
        return Ok(radii);
    }
    let lo = a_max / 100.0;
    for k in 0..n_radii {
        let frac = k as f64 / (n_radii - 1) as f64;
        radii.push(lo * (a_max / lo).powf(frac));
    }
    // The endpoint computation is exact enough that the last entry is a_max
    // up to an ulp; pin it.
    *radii.last_mut().unwrap() = a_max;
    Ok(radii)
}

/// Rectangular space-time grid geometry: box `[lo, hi]^dim`, `nx` nodes per
/// axis, `nt` backward steps over `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub nx: usize,
    pub dim: usize,
    pub nt: usize,
    pub horizon: f64,
}

impl GridSpec {
    pub fn dx(&self) -> f64 {
        (self.hi - self.lo) / (self.nx - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.nt as f64
    }

    pub fn node_count(&self) -> usize {
        self.nx.pow(self.dim as u32)
    }

    /// Axis indices of a flat node index (axis 0 fastest).
    pub fn unflatten(&self, mut idx: usize, out: &mut [usize]) {
        for slot in out.iter_mut() {
            *slot = idx % self.nx;
            idx /= self.nx;
        }
    }

    pub fn node_coords(&self, idx: usize, out: &mut [f64]) {
        let mut rest = idx;
        let dx = self.dx();
        for slot in out.iter_mut() {
            *slot = self.lo + (rest % self.nx) as f64 * dx;
            rest /= self.nx;
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        if self.nx < 3 {
            return Err(Error::Config("nx must be at least 3".into()));
        }
        if self.nt < 1 {
            return Err(Error::Config("nt must be at least 1".into()));
        }
        if !(self.lo < self.hi) {
            return Err(Error::Config("domain bounds must satisfy lo < hi".into()));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::Config("horizon must be positive".into()));
        }
        Ok(())
    }
}

/// A fully specified backward dynamic-programming problem.
#[derive(Debug, Clone)]
pub struct ValueProblem {
    spec: GridSpec,
    terminal: TerminalData,
    controls: ControlSet,
    /// Flat nonzero control vectors (`n_controls x dim`).
    control_flat: Vec<f64>,
    /// `Δt·½|a|²` per nonzero control.
    control_cost: Vec<f64>,
    /// Per-node `√E(y)` matrices, row-major `dim x dim`, node-major.
    sqrt_e: Vec<f64>,
    /// Uniform operator bound `B = √dim` of `√E`.
    matrix_bound: f64,
}

impl ValueProblem {
    pub fn new(spec: GridSpec, terminal: TerminalData, controls: ControlSet) -> Result<Self> {
        spec.validate()?;
        if controls.dim() != spec.dim {
            return Err(Error::DimensionMismatch { expected: spec.dim, got: controls.dim() });
        }
        let matrix_bound = kernel::uniform_norm_bound(spec.dim);
        // Foot points must not be able to jump across the domain; beyond
        // half the width the scheme reads nothing but boundary clamps.
        if controls.a_max() * matrix_bound * spec.dt() > 0.5 * (spec.hi - spec.lo) {
            return Err(Error::Config(
                "time step too coarse: a_max * B * dt exceeds half the domain width".into(),
            ));
        }

        let d = spec.dim;
        let n = spec.node_count();
        let mut sqrt_e = vec![0.0; n * d * d];
        let mut coords = vec![0.0; d];
        for idx in 0..n {
            spec.node_coords(idx, &mut coords);
            let block = &mut sqrt_e[idx * d * d..(idx + 1) * d * d];
            match d {
                1 => block[0] = 1.0,
                2 => {
                    let x = ConfigPoint::new(coords.clone())?;
                    block.copy_from_slice(kernel::sqrt_kernel_2d(&x)?.entries());
                }
                _ => {
                    let x = ConfigPoint::new(coords.clone())?;
                    block.copy_from_slice(kernel::sqrt_kernel_nd(&x)?.entries());
                }
            }
        }

        let (control_flat, norm_sq) = controls.materialise();
        let dt = spec.dt();
        let control_cost = norm_sq.iter().map(|&s| 0.5 * s * dt).collect();

        Ok(Self { spec, terminal, controls, control_flat, control_cost, sqrt_e, matrix_bound })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn terminal(&self) -> &TerminalData {
        &self.terminal
    }

    pub fn controls(&self) -> &ControlSet {
        &self.controls
    }

    pub fn matrix_bound(&self) -> f64 {
        self.matrix_bound
    }

    /// Terminal slice `v(·, T) = g` sampled at the nodes.
    pub fn terminal_slice(&self) -> Vec<f64> {
        let n = self.spec.node_count();
        let mut out = vec![0.0; n];
        let mut coords = vec![0.0; self.spec.dim];
        for (idx, slot) in out.iter_mut().enumerate() {
            self.spec.node_coords(idx, &mut coords);
            *slot = self.terminal.eval(&coords);
        }
        out
    }

    /// Relax the nodes in `range` against the next slice, writing results to
    /// `out` (one entry per node in the range). Pure per node: callers may
    /// split the node range across threads and concatenate.
    pub fn relax_into(&self, next: &[f64], range: Range<usize>, out: &mut [f64]) {
        debug_assert_eq!(next.len(), self.spec.node_count());
        debug_assert_eq!(out.len(), range.len());
        let d = self.spec.dim;
        let dt = self.spec.dt();
        let lip = self.terminal.lipschitz();
        let n_controls = self.control_cost.len();

        let mut coords = vec![0.0; d];
        let mut foot = vec![0.0; d];

        for (slot, node) in out.iter_mut().zip(range) {
            self.spec.node_coords(node, &mut coords);
            let s = &self.sqrt_e[node * d * d..(node + 1) * d * d];
            // Zero control: the foot point is the node itself — exact read.
            let mut best = next[node];
            for c in 0..n_controls {
                let a = &self.control_flat[c * d..(c + 1) * d];
                for i in 0..d {
                    let mut drift = 0.0;
                    for j in 0..d {
                        drift += s[i * d + j] * a[j];
                    }
                    foot[i] = coords[i] + dt * drift;
                }
                let val = self.control_cost[c] + self.interp_clamped(next, &foot, lip);
                if val < best {
                    best = val;
                }
            }
            *slot = best;
        }
    }

    /// Clamped multilinear interpolation of a slice plus the Lipschitz
    /// boundary penalty `L·|foot - clamp(foot)|`.
    fn interp_clamped(&self, slice: &[f64], foot: &[f64], lip: f64) -> f64 {
        let nx = self.spec.nx;
        let lo = self.spec.lo;
        let inv_dx = 1.0 / self.spec.dx();
        let top = (nx - 1) as f64;

        match self.spec.dim {
            1 => {
                let mut u = (foot[0] - lo) * inv_dx;
                let mut pen = 0.0;
                if u < 0.0 {
                    pen = -u;
                    u = 0.0;
                } else if u > top {
                    pen = u - top;
                    u = top;
                }
                let i = (u as usize).min(nx - 2);
                let f = u - i as f64;
                (1.0 - f) * slice[i] + f * slice[i + 1] + lip * pen / inv_dx
            }
            2 => {
                let mut pen_sq = 0.0;
                let mut u0 = (foot[0] - lo) * inv_dx;
                if u0 < 0.0 {
                    pen_sq += u0 * u0;
                    u0 = 0.0;
                } else if u0 > top {
                    pen_sq += (u0 - top) * (u0 - top);
                    u0 = top;
                }
                let mut u1 = (foot[1] - lo) * inv_dx;
                if u1 < 0.0 {
                    pen_sq += u1 * u1;
                    u1 = 0.0;
                } else if u1 > top {
                    pen_sq += (u1 - top) * (u1 - top);
                    u1 = top;
                }
                let i0 = (u0 as usize).min(nx - 2);
                let i1 = (u1 as usize).min(nx - 2);
                let f0 = u0 - i0 as f64;
                let f1 = u1 - i1 as f64;
                let base = i1 * nx + i0;
                let v00 = slice[base];
                let v10 = slice[base + 1];
                let v01 = slice[base + nx];
                let v11 = slice[base + nx + 1];
                let low = v00 + f0 * (v10 - v00);
                let high = v01 + f0 * (v11 - v01);
                let val = low + f1 * (high - low);
                if pen_sq > 0.0 {
                    val + lip * pen_sq.sqrt() / inv_dx
                } else {
                    val
                }
            }
            d => {
                // Generic multilinear over 2^d corners.
                let mut pen_sq = 0.0;
                let mut cell = vec![0usize; d];
                let mut frac = vec![0.0; d];
                for axis in 0..d {
                    let mut u = (foot[axis] - lo) * inv_dx;
                    if u < 0.0 {
                        pen_sq += u * u;
                        u = 0.0;
                    } else if u > top {
                        pen_sq += (u - top) * (u - top);
                        u = top;
                    }
                    let i = (u as usize).min(nx - 2);
                    cell[axis] = i;
                    frac[axis] = u - i as f64;
                }
                let mut val = 0.0;
                for corner in 0..(1usize << d) {
                    let mut w = 1.0;
                    let mut idx = 0usize;
                    let mut stride = 1usize;
                    for axis in 0..d {
                        let hi_side = (corner >> axis) & 1 == 1;
                        w *= if hi_side { frac[axis] } else { 1.0 - frac[axis] };
                        idx += (cell[axis] + hi_side as usize) * stride;
                        stride *= nx;
                    }
                    val += w * slice[idx];
                }
                val + lip * pen_sq.sqrt() / inv_dx
            }
        }
    }

    /// Sequential backward sweep over all slices.
    pub fn solve(&self) -> ValueGrid {
        let n = self.spec.node_count();
        let mut slices = Vec::with_capacity(self.spec.nt + 1);
        slices.push(self.terminal_slice());
        for _ in 0..self.spec.nt {
            let mut out = vec![0.0; n];
            self.relax_into(slices.last().unwrap(), 0..n, &mut out);
            slices.push(out);
        }
        slices.reverse();
        self.assemble(slices)
    }

    /// Package externally computed slices (index 0 = `t = 0`, last = `T`)
    /// into a grid; the slice layout must match this problem.
    pub fn assemble(&self, slices: Vec<Vec<f64>>) -> ValueGrid {
        assert_eq!(slices.len(), self.spec.nt + 1);
        ValueGrid {
            spec: self.spec,
            values: slices,
            terminal: self.terminal.clone(),
            matrix_bound: self.matrix_bound,
            a_max: self.controls.a_max(),
        }
    }
}

/// The solved value function on its space-time grid.
#[derive(Debug, Clone)]
pub struct ValueGrid {
    spec: GridSpec,
    /// `nt + 1` slices, slice `k` at `t_k = k·Δt`; the last one equals `g`.
    values: Vec<Vec<f64>>,
    terminal: TerminalData,
    matrix_bound: f64,
    a_max: f64,
}

impl ValueGrid {
    pub fn from_parts(
        spec: GridSpec,
        values: Vec<Vec<f64>>,
        terminal: TerminalData,
        matrix_bound: f64,
        a_max: f64,
    ) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.nt + 1 || values.iter().any(|s| s.len() != spec.node_count()) {
            return Err(Error::Config("slice layout does not match the grid spec".into()));
        }
        Ok(Self { spec, values, terminal, matrix_bound, a_max })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn terminal(&self) -> &TerminalData {
        &self.terminal
    }

    pub fn matrix_bound(&self) -> f64 {
        self.matrix_bound
    }

    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    pub fn slice(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    pub fn time_of(&self, k: usize) -> f64 {
        if k == self.spec.nt {
            self.spec.horizon
        } else {
            k as f64 * self.spec.dt()
        }
    }

    pub fn value_at_node(&self, k: usize, node: usize) -> f64 {
        self.values[k][node]
    }

    /// Half-width of the boundary-contaminated band at time `t`: information
    /// propagates inward at speed at most `B·a_max`.
    pub fn dependence_margin(&self, t: f64) -> f64 {
        self.matrix_bound * self.a_max * (self.spec.horizon - t)
    }

    /// Whether `y` sits strictly inside the dependence interior at time `t`.
    pub fn in_dependence_interior(&self, y: &[f64], t: f64) -> bool {
        let m = self.dependence_margin(t);
        y.iter().all(|&c| c - self.spec.lo >= m && self.spec.hi - c >= m)
    }

    /// Multilinear in space, linear in time between slices.
    pub fn evaluate(&self, y: &[f64], t: f64) -> Result<f64> {
        if y.len() != self.spec.dim {
            return Err(Error::DimensionMismatch { expected: self.spec.dim, got: y.len() });
        }
        if y.iter().any(|&c| c < self.spec.lo || c > self.spec.hi) {
            return Err(Error::OutOfDomain);
        }
        if !(0.0..=self.spec.horizon).contains(&t) {
            return Err(Error::OutOfDomain);
        }
        let dt = self.spec.dt();
        let k = ((t / dt) as usize).min(self.spec.nt - 1);
        let f = (t - k as f64 * dt) / dt;
        let a = self.interp_space(&self.values[k], y);
        let b = self.interp_space(&self.values[k + 1], y);
        Ok(a + f * (b - a))
    }

    fn interp_space(&self, slice: &[f64], y: &[f64]) -> f64 {
        let nx = self.spec.nx;
        let inv_dx = 1.0 / self.spec.dx();
        let top = (nx - 1) as f64;
        let d = self.spec.dim;
        let mut val = 0.0;
        let mut cell = vec![0usize; d];
        let mut frac = vec![0.0; d];
        for axis in 0..d {
            let u = ((y[axis] - self.spec.lo) * inv_dx).clamp(0.0, top);
            let i = (u as usize).min(nx - 2);
            cell[axis] = i;
            frac[axis] = u - i as f64;
        }
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut idx = 0usize;
            let mut stride = 1usize;
            for axis in 0..d {
                let hi_side = (corner >> axis) & 1 == 1;
                w *= if hi_side { frac[axis] } else { 1.0 - frac[axis] };
                idx += (cell[axis] + hi_side as usize) * stride;
                stride *= nx;
            }
            val += w * slice[idx];
        }
        val
    }

    /// Largest violations of the structural bounds `|v| ≤ ‖g‖_∞` and
    /// `v ≤ g` over all nodes and slices (nonpositive values mean both hold).
    pub fn bound_violations(&self) -> (f64, f64) {
        let sup = self.terminal.sup_norm();
        let terminal = self.values.last().unwrap();
        let mut sup_violation = f64::NEG_INFINITY;
        let mut monotone_violation = f64::NEG_INFINITY;
        for slice in &self.values {
            for (v, g) in slice.iter().zip(terminal) {
                sup_violation = sup_violation.max(v.abs() - sup);
                monotone_violation = monotone_violation.max(v - g);
            }
        }
        (sup_violation, monotone_violation)
    }
}

/// Exact one-dimensional oracle: `v(y,t) = min_z |y-z|²/(2(T-t)) + g(z)`.
///
/// The minimum is bracketed on a dense scan of radius `2·L·(T-t)` around `y`
/// (any minimiser satisfies `|y-z| ≤ 2L(T-t)`), then polished by golden
/// section inside the bracketing cells. At `t = T` this returns `g(y)`.
pub fn hopflax_1d(g: &TerminalData, y: f64, t: f64, horizon: f64, z_grid: usize) -> f64 {
    let s = horizon - t;
    if s <= 0.0 {
        return g.eval(&[y]);
    }
    let radius = (2.0 * g.lipschitz() * s).max(1e-12);
    let n = z_grid.max(8);
    let cost = |z: f64| (y - z) * (y - z) / (2.0 * s) + g.eval(&[z]);

    let mut best_i = 0;
    let mut best = f64::INFINITY;
    let step = 2.0 * radius / (n - 1) as f64;
    for i in 0..n {
        let z = y - radius + step * i as f64;
        let c = cost(z);
        if c < best {
            best = c;
            best_i = i;
        }
    }
    // Golden-section polish on the bracketing interval.
    let mut lo = y - radius + step * best_i.saturating_sub(1) as f64;
    let mut hi = y - radius + step * (best_i + 1).min(n - 1) as f64;
    let phi = 0.618_033_988_749_894_9_f64;
    let mut m1 = hi - phi * (hi - lo);
    let mut m2 = lo + phi * (hi - lo);
    let mut c1 = cost(m1);
    let mut c2 = cost(m2);
    for _ in 0..120 {
        if hi - lo < 1e-13 {
            break;
        }
        if c1 <= c2 {
            hi = m2;
            m2 = m1;
            c2 = c1;
            m1 = hi - phi * (hi - lo);
            c1 = cost(m1);
        } else {
            lo = m1;
            m1 = m2;
            c1 = c2;
            m2 = lo + phi * (hi - lo);
            c2 = cost(m2);
        }
    }
    best.min(c1).min(c2)
}

/// Upper-bound oracle: minimise `½·energy(α) + g(x_α(T))` over
/// piecewise-constant controls with `segments` pieces by coordinate pattern
/// search from `restarts` starts (zero plus seeded random draws). Divergent
/// candidates are discarded. The result overestimates the true infimum by
/// the optimiser's and integrator's defects only.
pub fn direct_shoot(
    y: &ConfigPoint,
    t: f64,
    horizon: f64,
    g: &TerminalData,
    segments: usize,
    restarts: usize,
    seed: u64,
) -> Result<f64> {
    if segments < 1 || restarts < 1 {
        return Err(Error::Config("need at least one segment and one restart".into()));
    }
    if !(t < horizon) {
        return Err(Error::Ordering("shooting requires t < horizon"));
    }
    let dim = y.dim();
    let span = horizon - t;
    let n_vars = segments * dim;
    let scale = g.lipschitz() * kernel::uniform_norm_bound(dim);
    let amp = 2.0 * scale + 1.0;
    let rk_step = (span / segments as f64 / 4.0).min(0.02);

    let breakpoints: Vec<f64> = (0..=segments)
        .map(|k| {
            if k == segments {
                horizon
            } else {
                t + span * k as f64 / segments as f64
            }
        })
        .collect();

    let cost = |vars: &[f64]| -> f64 {
        let control = match PiecewiseControl::new(breakpoints.clone(), vars.to_vec(), dim) {
            Ok(c) => c,
            Err(_) => return f64::INFINITY,
        };
        match crate::control::integrate(y, t, &control, rk_step) {
            Ok(traj) => 0.5 * control.energy() + g.eval(traj.end_state()),
            Err(_) => f64::INFINITY,
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best_overall = f64::INFINITY;
    for restart in 0..restarts {
        let mut vars: Vec<f64> = if restart == 0 {
            vec![0.0; n_vars]
        } else {
            (0..n_vars).map(|_| rng.random_range(-scale.max(0.5)..scale.max(0.5))).collect()
        };
        let mut current = cost(&vars);
        let mut step = amp / 4.0;
        while step > 1e-5 * amp {
            let mut improved = false;
            for i in 0..n_vars {
                let saved = vars[i];
                for dir in [1.0, -1.0] {
                    vars[i] = saved + dir * step;
                    let c = cost(&vars);
                    if c < current - 1e-15 {
                        current = c;
                        improved = true;
                        break;
                    }
                    vars[i] = saved;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        best_overall = best_overall.min(current);
    }
    if !best_overall.is_finite() {
        return Err(Error::Numeric("every shooting candidate diverged"));
    }
    Ok(best_overall)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(coords: &[f64]) -> ConfigPoint {
        ConfigPoint::new(coords.to_vec()).unwrap()
    }

    fn problem_1d(nx: usize, nt: usize, g: TerminalData) -> ValueProblem {
        let spec = GridSpec { lo: -4.0, hi: 4.0, nx, dim: 1, nt, horizon: 1.0 };
        let a_max = 4.0 * g.lipschitz().max(0.25);
        let controls = ControlSet::line_1d(16, a_max).unwrap();
        ValueProblem::new(spec, g, controls).unwrap()
    }

    #[test]
    fn terminal_library_constants() {
        let c = TerminalData::constant(5.0);
        assert_eq!(c.eval(&[3.0, -1.0]), 5.0);
        assert_eq!(c.lipschitz(), 0.0);
        assert_eq!(c.sup_norm(), 5.0);

        let cone = TerminalData::cone(vec![1.0, 0.0], 2.0);
        assert_eq!(cone.eval(&[1.0, 0.0]), 0.0);
        assert_eq!(cone.eval(&[1.0, 5.0]), 2.0);
        assert!((cone.eval(&[2.0, 0.0]) - 1.0).abs() < 1e-15);

        let s = TerminalData::sine_product(0.5);
        let y = [0.3, -1.2];
        assert!((s.eval(&y) - 0.5 * y[0].sin() * y[1].sin()).abs() < 1e-15);
    }

    #[test]
    fn terminal_lipschitz_spot_checks() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for g in [
            TerminalData::cone(vec![0.5, -0.5], 2.0),
            TerminalData::sine_product(1.3),
        ] {
            for _ in 0..200 {
                let a = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
                let b = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
                let dist = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                let dv = (g.eval(&a) - g.eval(&b)).abs();
                assert!(dv <= g.lipschitz() * dist + 1e-12);
                assert!(g.eval(&a).abs() <= g.sup_norm() + 1e-12);
            }
        }
    }

    #[test]
    fn control_set_shape() {
        let cs = ControlSet::uniform_2d(16, 32, 4.0).unwrap();
        assert_eq!(cs.radii().len(), 17);
        assert_eq!(cs.radii()[0], 0.0);
        assert!((cs.radii()[1] - 0.04).abs() < 1e-15);
        assert_eq!(cs.a_max(), 4.0);
        assert_eq!(cs.directions().len(), 32);

        let cs = ControlSet::line_1d(16, 4.0).unwrap();
        assert_eq!(cs.directions().len(), 2);

        assert!(ControlSet::new(vec![0.1, 1.0], vec![vec![1.0]], 1).is_err());
        assert!(ControlSet::new(vec![0.0, 1.0], vec![vec![0.5]], 1).is_err());
    }

    #[test]
    fn solver_validates_configuration() {
        let g = TerminalData::constant(0.0);
        let spec = GridSpec { lo: -1.0, hi: 1.0, nx: 2, dim: 1, nt: 4, horizon: 1.0 };
        assert!(ValueProblem::new(spec, g.clone(), ControlSet::line_1d(4, 1.0).unwrap()).is_err());

        // CFL-style rejection: one giant step with a fast control set.
        let spec = GridSpec { lo: -1.0, hi: 1.0, nx: 11, dim: 1, nt: 1, horizon: 1.0 };
        let err = ValueProblem::new(spec, g, ControlSet::line_1d(4, 10.0).unwrap());
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn constant_terminal_data_is_invariant() {
        // g ≡ 0 → v ≡ 0, g ≡ 5 → v ≡ 5, exactly.
        for c in [0.0, 5.0] {
            let prob = problem_1d(33, 8, TerminalData::constant(c));
            let grid = prob.solve();
            for k in 0..=8 {
                assert!(grid.slice(k).iter().all(|&v| v == c));
            }
        }
    }

    #[test]
    fn bounds_hold_exactly() {
        let prob = problem_1d(65, 32, TerminalData::cone(vec![0.0], 3.0));
        let grid = prob.solve();
        let (sup_v, mono_v) = grid.bound_violations();
        assert!(sup_v <= 0.0, "sup violation {sup_v}");
        assert!(mono_v <= 0.0, "v <= g violation {mono_v}");
    }

    #[test]
    fn monotone_in_terminal_data() {
        let g1 = TerminalData::cone(vec![0.0], 2.0);
        let g2 = TerminalData::cone(vec![0.0], 3.0);
        let p1 = problem_1d(49, 16, g1);
        let p2 = problem_1d(49, 16, g2);
        let v1 = p1.solve();
        let v2 = p2.solve();
        for k in 0..=16 {
            for (a, b) in v1.slice(k).iter().zip(v2.slice(k)) {
                assert!(a <= b);
            }
        }
    }

    #[test]
    fn hopflax_matches_calculus_solution() {
        // For g(z) = |z| (R large enough): v = |y| - s/2 if |y| >= s,
        // else y²/(2s).
        let g = TerminalData::cone(vec![0.0], 100.0);
        for (y, s) in [(0.0, 1.0), (0.4, 1.0), (-1.5, 1.0), (2.0, 0.5), (-0.1, 0.25)] {
            let t = 1.0 - s;
            let got = hopflax_1d(&g, y, t, 1.0, 4001);
            let want = if y.abs() >= s { y.abs() - 0.5 * s } else { y * y / (2.0 * s) };
            assert!((got - want).abs() < 1e-9, "y={y} s={s}: {got} vs {want}");
        }

        // Constant terminal data and the t = T edge.
        let c = TerminalData::constant(2.5);
        assert_eq!(hopflax_1d(&c, 0.3, 0.2, 1.0, 101), 2.5);
        let g = TerminalData::cone(vec![0.0], 3.0);
        assert_eq!(hopflax_1d(&g, 0.7, 1.0, 1.0, 101), g.eval(&[0.7]));

        // z = y is always feasible: v <= g(y).
        for y in [-2.0, 0.0, 1.3] {
            assert!(hopflax_1d(&g, y, 0.0, 1.0, 2001) <= g.eval(&[y]) + 1e-12);
        }
    }

    #[test]
    fn solve_tracks_hopflax_in_one_dimension() {
        let g = TerminalData::cone(vec![0.0], 3.0);
        let prob = problem_1d(65, 64, g.clone());
        let grid = prob.solve();
        let mut worst = 0.0_f64;
        for k in 0..=64 {
            let t = grid.time_of(k);
            for node in 0..65 {
                let y = -4.0 + node as f64 * grid.spec().dx();
                if !grid.in_dependence_interior(&[y], t) {
                    continue;
                }
                let oracle = hopflax_1d(&g, y, t, 1.0, 2001);
                worst = worst.max((grid.value_at_node(k, node) - oracle).abs());
            }
        }
        assert!(worst <= 0.05, "coarse-grid oracle gap {worst}");
    }

    #[test]
    fn evaluate_interpolates() {
        let g = TerminalData::cone(vec![0.0], 3.0);
        let prob = problem_1d(33, 8, g.clone());
        let grid = prob.solve();

        // Node queries return stored values exactly.
        let dx = grid.spec().dx();
        let y = -4.0 + 7.0 * dx;
        let got = grid.evaluate(&[y], 1.0).unwrap();
        assert_eq!(got, grid.value_at_node(8, 7));

        // Midpoint of two nodes averages them.
        let va = grid.value_at_node(8, 7);
        let vb = grid.value_at_node(8, 8);
        let got = grid.evaluate(&[y + 0.5 * dx], 1.0).unwrap();
        assert!((got - 0.5 * (va + vb)).abs() < 1e-12);

        // The t = T slice is g at the nodes.
        assert!((grid.evaluate(&[y], 1.0).unwrap() - g.eval(&[y])).abs() < 1e-12);

        assert!(matches!(grid.evaluate(&[5.0], 0.5), Err(Error::OutOfDomain)));
        assert!(matches!(grid.evaluate(&[0.0], 2.0), Err(Error::OutOfDomain)));
    }

    #[test]
    fn diagonal_translation_equivariance_2d() {
        // E(x) depends only on x₁-x₂, so shifting g along the diagonal
        // shifts v along the diagonal.
        let tau = 0.3; // 3 cells at dx = 0.1
        let spec = GridSpec { lo: -2.0, hi: 2.0, nx: 41, dim: 2, nt: 8, horizon: 0.1 };
        let controls = ControlSet::uniform_2d(8, 16, 4.0 * core::f64::consts::SQRT_2).unwrap();
        let g = TerminalData::cone(vec![0.2, -0.4], 2.0);
        let g_shift = TerminalData::cone(vec![0.2 + tau, -0.4 + tau], 2.0);
        let base = ValueProblem::new(spec, g, controls.clone()).unwrap().solve();
        let shifted = ValueProblem::new(spec, g_shift, controls).unwrap().solve();

        let nx = 41;
        let shift_cells = 3;
        let mut compared = 0;
        for k in [0, 4, 8] {
            let t = base.time_of(k);
            for i1 in 0..nx - shift_cells {
                for i0 in 0..nx - shift_cells {
                    let y = [-2.0 + 0.1 * i0 as f64, -2.0 + 0.1 * i1 as f64];
                    let y_shift = [y[0] + tau, y[1] + tau];
                    if !base.in_dependence_interior(&y, t)
                        || !shifted.in_dependence_interior(&y_shift, t)
                    {
                        continue;
                    }
                    let a = base.value_at_node(k, i1 * nx + i0);
                    let b = shifted.value_at_node(k, (i1 + shift_cells) * nx + i0 + shift_cells);
                    assert!((a - b).abs() < 1e-10, "equivariance broke: {a} vs {b}");
                    compared += 1;
                }
            }
        }
        assert!(compared > 100, "interior too thin: {compared}");
    }

    #[test]
    fn direct_shoot_examples() {
        // g ≡ 0: the zero start is already optimal.
        let g = TerminalData::constant(0.0);
        let got = direct_shoot(&point(&[0.3]), 0.0, 1.0, &g, 2, 2, 7).unwrap();
        assert!(got.abs() < 1e-12);

        // One dimension: matches the Hopf-Lax oracle at scattered points.
        let g = TerminalData::cone(vec![0.0], 3.0);
        for y in [-1.0, 0.0, 2.0] {
            let oracle = hopflax_1d(&g, y, 0.0, 1.0, 4001);
            let shoot = direct_shoot(&point(&[y]), 0.0, 1.0, &g, 2, 6, 11).unwrap();
            assert!(
                (shoot - oracle).abs() <= 1e-3,
                "y={y}: shoot {shoot} vs oracle {oracle}"
            );
        }

        assert!(direct_shoot(&point(&[0.0]), 1.0, 1.0, &g, 2, 2, 0).is_err());
        assert!(direct_shoot(&point(&[0.0]), 0.0, 1.0, &g, 0, 2, 0).is_err());
    }

    #[test]
    fn solve_bounded_by_shoot_1d() {
        let g = TerminalData::cone(vec![0.0], 3.0);
        let prob = problem_1d(129, 128, g.clone());
        let grid = prob.solve();
        for (node, t_idx) in [(64, 64), (80, 96), (40, 32)] {
            let y = -4.0 + node as f64 * grid.spec().dx();
            let t = grid.time_of(t_idx);
            if !grid.in_dependence_interior(&[y], t) {
                continue;
            }
            let shoot = direct_shoot(&point(&[y]), t, 1.0, &g, 3, 4, 5).unwrap();
            let v = grid.value_at_node(t_idx, node);
            assert!(v <= shoot + 0.02, "v {v} vs shoot {shoot}");
        }
    }
}
