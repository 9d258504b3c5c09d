//! Measurable controls and the controlled dynamics `x'(s) = √E(x(s)) α(s)`.
//!
//! Controls are stored piecewise-constant: every steering construction used
//! by the witness module is either exactly constant or smooth enough that
//! fine piecewise-constant sampling approaches its energy, and the value
//! infimum is not changed by restricting to this class. Integration is
//! classical fixed-step RK4 restarted at control breakpoints, which keeps
//! certificates reproducible. The closed-form `√E` is continuous through the
//! diagonal, so no singularity handling is needed for forward dynamics.

use alloc::vec;
use alloc::vec::Vec;

// Inherent float methods come from std in test builds; this import provides
// them for the no_std library build.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::kernel::{self, ConfigPoint};

/// A control `α : [s₀, s_M] → ℝᴺ`, constant on `[s_k, s_{k+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseControl {
    /// Strictly increasing times `s₀ < s₁ < … < s_M`.
    breakpoints: Vec<f64>,
    /// Flat row-major `M x dim` segment values.
    values: Vec<f64>,
    dim: usize,
}

impl PiecewiseControl {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        if breakpoints.len() < 2 {
            return Err(Error::Config("control needs at least one segment".into()));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("control breakpoint"));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Ordering("breakpoints must be strictly increasing"));
        }
        if values.len() != (breakpoints.len() - 1) * dim {
            return Err(Error::DimensionMismatch {
                expected: (breakpoints.len() - 1) * dim,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("control value"));
        }
        Ok(Self { breakpoints, values, dim })
    }

    /// Single-segment constant control on `[start, end)`.
    pub fn constant(start: f64, end: f64, value: &[f64]) -> Result<Self> {
        Self::new(vec![start, end], value.to_vec(), value.len())
    }

    /// Zero control of the given dimension on `[start, end)`.
    pub fn zero(start: f64, end: f64, dim: usize) -> Result<Self> {
        Self::new(vec![start, end], vec![0.0; dim], dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn segments(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn start(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn end(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn segment_value(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    /// Value at time `s`, left-closed segments; at `s = end` the last
    /// segment's value (the left limit) is returned.
    pub fn value_at(&self, s: f64) -> &[f64] {
        let k = match self.breakpoints.binary_search_by(|b| b.partial_cmp(&s).unwrap()) {
            Ok(i) => i.min(self.segments() - 1),
            Err(i) => i.saturating_sub(1).min(self.segments() - 1),
        };
        self.segment_value(k)
    }

    /// `∫ |α(s)|² ds`, exact for piecewise-constant controls
    /// (the value cost applies the extra ½ factor itself).
    pub fn energy(&self) -> f64 {
        (0..self.segments())
            .map(|k| {
                let dt = self.breakpoints[k + 1] - self.breakpoints[k];
                let sq: f64 = self.segment_value(k).iter().map(|v| v * v).sum();
                sq * dt
            })
            .sum()
    }

    /// Prepend a zero segment on `[from, start)`; energy is unchanged.
    /// Padding by zero duration is the identity.
    pub fn pad_with_zero(&self, from: f64) -> Result<Self> {
        if !from.is_finite() {
            return Err(Error::NonFinite("pad time"));
        }
        if from > self.start() {
            return Err(Error::Ordering("pad time must not be after the control start"));
        }
        if from == self.start() {
            return Ok(self.clone());
        }
        let mut breakpoints = Vec::with_capacity(self.breakpoints.len() + 1);
        breakpoints.push(from);
        breakpoints.extend_from_slice(&self.breakpoints);
        let mut values = vec![0.0; self.dim];
        values.extend_from_slice(&self.values);
        Self::new(breakpoints, values, self.dim)
    }

    /// Translate every breakpoint by `delta >= 0`; values and energy are
    /// unchanged. Truncation past a horizon is the caller's business.
    pub fn time_shift(&self, delta: f64) -> Result<Self> {
        if !delta.is_finite() {
            return Err(Error::NonFinite("shift"));
        }
        debug_assert!(delta >= 0.0, "time_shift expects a nonnegative delta");
        let breakpoints = self.breakpoints.iter().map(|b| b + delta).collect();
        Self::new(breakpoints, self.values.clone(), self.dim)
    }
}

/// A sampled solution of `x' = √E(x) α`, together with its control.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    /// Flat row-major `len x dim` states.
    states: Vec<f64>,
    dim: usize,
    control: PiecewiseControl,
}

impl Trajectory {
    pub(crate) fn from_parts(
        times: Vec<f64>,
        states: Vec<f64>,
        dim: usize,
        control: PiecewiseControl,
    ) -> Self {
        debug_assert_eq!(states.len(), times.len() * dim);
        Self { times, states, dim, control }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn start_state(&self) -> &[f64] {
        self.state(0)
    }

    pub fn end_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn control(&self) -> &PiecewiseControl {
        &self.control
    }

    /// Rows `(s, x_1..x_N, alpha_1..alpha_N)` for export.
    pub fn rows(&self) -> impl Iterator<Item = (f64, &[f64], &[f64])> + '_ {
        (0..self.len()).map(move |i| {
            let s = self.times[i];
            (s, self.state(i), self.control.value_at(s))
        })
    }
}

fn rk4_step(x: &mut [f64], alpha: &[f64], h: f64, scratch: &mut Scratch) -> Result<()> {
    let n = x.len();
    let Scratch { k1, k2, k3, k4, tmp } = scratch;
    kernel::sqrt_apply_into(x, alpha, k1)?;
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * h * k1[i];
    }
    kernel::sqrt_apply_into(tmp, alpha, k2)?;
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * h * k2[i];
    }
    kernel::sqrt_apply_into(tmp, alpha, k3)?;
    for i in 0..n {
        tmp[i] = x[i] + h * k3[i];
    }
    kernel::sqrt_apply_into(tmp, alpha, k4)?;
    for i in 0..n {
        x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(())
}

struct Scratch {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }
}

/// Integrate `x' = √E(x) α(s)`, `x(t) = y`, over `[t, control.end()]`.
///
/// Fixed-step RK4, restarted at every control breakpoint (each segment is
/// split into equal sub-steps no longer than `step`). Returns the densely
/// sampled trajectory; a non-finite state aborts with a divergence error.
pub fn integrate(
    y: &ConfigPoint,
    t: f64,
    control: &PiecewiseControl,
    step: f64,
) -> Result<Trajectory> {
    let n = y.dim();
    if control.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: control.dim() });
    }
    if !(step > 0.0) {
        return Err(Error::Config("integration step must be positive".into()));
    }
    if t < control.start() - 1e-12 || t >= control.end() {
        return Err(Error::Ordering("start time must lie inside the control's span"));
    }

    let mut scratch = Scratch::new(n);
    let mut x: Vec<f64> = y.coords().to_vec();
    let mut times = vec![t];
    let mut states = x.clone();

    let bps = control.breakpoints();
    for k in 0..control.segments() {
        let seg_start = bps[k].max(t);
        let seg_end = bps[k + 1];
        if seg_end <= seg_start {
            continue;
        }
        let alpha = control.segment_value(k);
        let len = seg_end - seg_start;
        // Guard against an extra microscopic step when len/step sits one
        // rounding error above an integer.
        let substeps = (len / step - 1e-9).ceil().max(1.0) as usize;
        let h = len / substeps as f64;
        for j in 1..=substeps {
            rk4_step(&mut x, alpha, h, &mut scratch)?;
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Diverged { at: seg_start + h * j as f64 });
            }
            // Hit the breakpoint exactly rather than accumulating h.
            let s = if j == substeps { seg_end } else { seg_start + h * j as f64 };
            times.push(s);
            states.extend_from_slice(&x);
        }
    }

    Ok(Trajectory::from_parts(times, states, n, control.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn point(coords: &[f64]) -> ConfigPoint {
        ConfigPoint::new(coords.to_vec()).unwrap()
    }

    #[test]
    fn control_validation() {
        assert!(PiecewiseControl::new(vec![0.0], vec![], 1).is_err());
        assert!(PiecewiseControl::new(vec![0.0, 0.0], vec![1.0], 1).is_err());
        assert!(PiecewiseControl::new(vec![1.0, 0.5], vec![1.0], 1).is_err());
        assert!(PiecewiseControl::new(vec![0.0, 1.0], vec![f64::NAN], 1).is_err());
        assert!(PiecewiseControl::new(vec![0.0, 1.0], vec![1.0, 2.0], 1).is_err());
        assert!(PiecewiseControl::new(vec![0.0, 1.0], vec![1.0], 1).is_ok());
    }

    #[test]
    fn energy_examples() {
        let zero = PiecewiseControl::zero(0.0, 1.0, 2).unwrap();
        assert_eq!(zero.energy(), 0.0);

        let unit = PiecewiseControl::constant(0.0, 1.0, &[1.0]).unwrap();
        assert_eq!(unit.energy(), 1.0);

        // |a| = 1 on [0, 0.5], |a| = 2 on [0.5, 1]: 0.5 + 2.0 = 2.5.
        let two = PiecewiseControl::new(vec![0.0, 0.5, 1.0], vec![1.0, 2.0], 1).unwrap();
        assert!((two.energy() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn value_at_uses_left_limit_at_end() {
        let c = PiecewiseControl::new(vec![0.0, 0.5, 1.0], vec![1.0, 2.0], 1).unwrap();
        assert_eq!(c.value_at(0.0), &[1.0]);
        assert_eq!(c.value_at(0.499), &[1.0]);
        assert_eq!(c.value_at(0.5), &[2.0]);
        assert_eq!(c.value_at(1.0), &[2.0]);
    }

    #[test]
    fn pad_with_zero_preserves_energy() {
        let zero = PiecewiseControl::zero(1.0, 2.0, 2).unwrap();
        let padded = zero.pad_with_zero(0.0).unwrap();
        assert_eq!(padded.energy(), 0.0);
        assert_eq!(padded.start(), 0.0);

        // Zero-duration pad is the identity.
        let same = zero.pad_with_zero(1.0).unwrap();
        assert_eq!(same, zero);

        // Pad after the start is rejected.
        assert!(zero.pad_with_zero(1.5).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let m = rng.random_range(1..6);
            let mut bps = vec![0.0];
            for _ in 0..m {
                bps.push(bps.last().unwrap() + rng.random_range(0.1..1.0));
            }
            let vals: Vec<f64> = (0..m * 2).map(|_| rng.random_range(-2.0..2.0)).collect();
            let c = PiecewiseControl::new(bps, vals, 2).unwrap();
            let p = c.pad_with_zero(-rng.random_range(0.0..3.0) - 0.01).unwrap();
            assert!((p.energy() - c.energy()).abs() < 1e-14);
        }
    }

    #[test]
    fn time_shift_properties() {
        let c = PiecewiseControl::new(vec![0.0, 0.5, 1.0], vec![1.0, -2.0], 1).unwrap();
        let same = c.time_shift(0.0).unwrap();
        assert_eq!(same, c);
        let shifted = c.time_shift(2.5).unwrap();
        assert_eq!(shifted.start(), 2.5);
        assert!((shifted.energy() - c.energy()).abs() < 1e-15);
    }

    #[test]
    fn zero_control_freezes_state() {
        let y = point(&[0.4, -1.3]);
        let c = PiecewiseControl::zero(0.0, 2.0, 2).unwrap();
        let traj = integrate(&y, 0.0, &c, 0.05).unwrap();
        for i in 0..traj.len() {
            assert_eq!(traj.state(i), y.coords());
        }
    }

    #[test]
    fn one_dimensional_constant_control_is_linear() {
        // E = [1] in one dimension, so x(s) = y + c (s - t) exactly.
        let y = point(&[0.7]);
        let c = PiecewiseControl::constant(1.0, 3.0, &[-0.6]).unwrap();
        let traj = integrate(&y, 1.0, &c, 0.1).unwrap();
        for i in 0..traj.len() {
            let s = traj.times()[i];
            let want = 0.7 - 0.6 * (s - 1.0);
            assert!((traj.state(i)[0] - want).abs() < 1e-13);
        }
        assert!((traj.end_state()[0] - (0.7 - 0.6 * 2.0)).abs() < 1e-13);
    }

    #[test]
    fn diagonal_start_with_axis_control_rides_the_diagonal() {
        // From a diagonal point with α = (1, 0), the state moves along the
        // diagonal at speed 1/√2 per component.
        let y = point(&[0.2, 0.2]);
        let c = PiecewiseControl::constant(0.0, 1.0, &[1.0, 0.0]).unwrap();
        let traj = integrate(&y, 0.0, &c, 0.01).unwrap();
        let inv_sqrt2 = 1.0 / core::f64::consts::SQRT_2;
        for i in 0..traj.len() {
            let s = traj.times()[i];
            let st = traj.state(i);
            assert_eq!(st[0], st[1], "state must stay on the diagonal");
            assert!((st[0] - (0.2 + inv_sqrt2 * s)).abs() < 1e-12);
        }
    }

    #[test]
    fn step_halving_is_fourth_order() {
        // Smooth off-diagonal dynamics: halving the step must shrink the
        // endpoint defect by at least 8x.
        let y = point(&[0.0, 1.0]);
        let c = PiecewiseControl::constant(0.0, 1.0, &[0.35, -0.2]).unwrap();
        let reference = integrate(&y, 0.0, &c, 1.0 / 4096.0).unwrap();
        let endpoint = |step: f64| {
            let t = integrate(&y, 0.0, &c, step).unwrap();
            [t.end_state()[0], t.end_state()[1]]
        };
        let rx = reference.end_state();
        let err = |e: [f64; 2]| ((e[0] - rx[0]).powi(2) + (e[1] - rx[1]).powi(2)).sqrt();
        let e1 = err(endpoint(0.1));
        let e2 = err(endpoint(0.05));
        assert!(e1 / e2 >= 8.0, "order ratio {} too small", e1 / e2);
    }

    #[test]
    fn displacement_bounded_by_cauchy_schwarz_chain() {
        // |x(s_b) - x(s_a)| <= B ∫|α| <= B (s_b - s_a)^{1/2} (∫|α|²)^{1/2}.
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let b = crate::kernel::BOUND_B_2D;
        for _ in 0..50 {
            let y = point(&[rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]);
            let m = rng.random_range(1..5);
            let mut bps = vec![0.0];
            for _ in 0..m {
                bps.push(bps.last().unwrap() + rng.random_range(0.1..0.6));
            }
            let vals: Vec<f64> = (0..m * 2).map(|_| rng.random_range(-1.5..1.5)).collect();
            let c = PiecewiseControl::new(bps, vals, 2).unwrap();
            let traj = integrate(&y, 0.0, &c, 0.01).unwrap();

            let duration = c.end() - c.start();
            let l2 = c.energy().sqrt();
            let start = traj.start_state();
            let end = traj.end_state();
            let disp = ((end[0] - start[0]).powi(2) + (end[1] - start[1]).powi(2)).sqrt();
            // Integrator error is far below the slack in this bound.
            assert!(disp <= b * duration.sqrt() * l2 + 1e-8);
        }
    }

    #[test]
    fn shifted_control_gives_time_translated_trajectory() {
        // In one dimension the dynamics are state-independent, so shifting
        // the control shifts the whole trajectory.
        let y = point(&[0.3]);
        let c = PiecewiseControl::new(vec![0.0, 0.4, 1.0], vec![1.2, -0.5], 1).unwrap();
        let shifted = c.time_shift(0.7).unwrap();
        let base = integrate(&y, 0.0, &c, 0.05).unwrap();
        let moved = integrate(&y, 0.7, &shifted, 0.05).unwrap();
        assert_eq!(base.len(), moved.len());
        for i in 0..base.len() {
            assert!((moved.times()[i] - (base.times()[i] + 0.7)).abs() < 1e-12);
            assert!((moved.state(i)[0] - base.state(i)[0]).abs() < 1e-13);
        }
    }

    #[test]
    fn integrate_rejects_bad_configs() {
        let y = point(&[0.0, 0.0]);
        let c = PiecewiseControl::zero(0.0, 1.0, 2).unwrap();
        assert!(integrate(&y, 0.0, &c, 0.0).is_err());
        assert!(integrate(&y, 1.0, &c, 0.1).is_err());
        assert!(integrate(&point(&[0.0]), 0.0, &c, 0.1).is_err());
    }
}
