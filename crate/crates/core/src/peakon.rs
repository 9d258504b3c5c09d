//! Multipeakon Hamiltonian dynamics.
//!
//! A multipeakon `u(x,t) = Σ p_i(t) e^{-|x - q_i(t)|}` solves Camassa-Holm
//! exactly when `(q, p)` follows the canonical flow of
//! `H(q,p) = ½ E(q) p · p`. The canonical equations work out to
//!
//! - `dq_i/dt = ∂H/∂p_i = Σ_j p_j e^{-|q_i - q_j|}`,
//! - `dp_i/dt = -∂H/∂q_i = Σ_{j≠i} p_i p_j sgn(q_i - q_j) e^{-|q_i - q_j|}`,
//!
//! with the `sgn(0) = 0` convention at collisions, where the field loses
//! smoothness. Integration is plain fixed-step RK4 with conservation
//! monitoring (`H` by autonomy, `Σ p_i` by translation invariance), not a
//! symplectic method: drifts are measured, never hidden.

use alloc::vec;
use alloc::vec::Vec;

// Inherent float methods come from std in test builds; this import provides
// them for the no_std library build.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Canonical state `(q, p)` of an N-peakon system at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakonState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub t: f64,
}

impl PeakonState {
    pub fn new(q: Vec<f64>, p: Vec<f64>, t: f64) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        if q.len() != p.len() {
            return Err(Error::DimensionMismatch { expected: q.len(), got: p.len() });
        }
        if q.iter().chain(p.iter()).any(|v| !v.is_finite()) || !t.is_finite() {
            return Err(Error::NonFinite("peakon state"));
        }
        Ok(Self { q, p, t })
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// Smallest pairwise position separation (infinity for a single peakon).
    pub fn min_separation(&self) -> f64 {
        let n = self.q.len();
        let mut m = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                m = m.min((self.q[i] - self.q[j]).abs());
            }
        }
        m
    }
}

/// `H(q,p) = ½ Σ_{ij} p_i p_j e^{-|q_i - q_j|}`; nonnegative since `E` is PSD.
pub fn hamiltonian(state: &PeakonState) -> f64 {
    let n = state.len();
    let mut h = 0.0;
    for i in 0..n {
        h += state.p[i] * state.p[i];
        for j in (i + 1)..n {
            h += 2.0 * state.p[i] * state.p[j] * (-(state.q[i] - state.q[j]).abs()).exp();
        }
    }
    0.5 * h
}

/// Total momentum `Σ p_i`, an exact invariant of the flow (H depends on
/// position differences only).
pub fn total_momentum(state: &PeakonState) -> f64 {
    state.p.iter().sum()
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn rhs_into(q: &[f64], p: &[f64], dq: &mut [f64], dp: &mut [f64]) {
    let n = q.len();
    for i in 0..n {
        let mut dqi = 0.0;
        let mut dpi = 0.0;
        for j in 0..n {
            let e = (-(q[i] - q[j]).abs()).exp();
            dqi += p[j] * e;
            if j != i {
                dpi += p[i] * p[j] * sgn(q[i] - q[j]) * e;
            }
        }
        dq[i] = dqi;
        dp[i] = dpi;
    }
}

/// The canonical vector field `(dq/dt, dp/dt)` at a state.
pub fn rhs(state: &PeakonState) -> (Vec<f64>, Vec<f64>) {
    let n = state.len();
    let mut dq = vec![0.0; n];
    let mut dp = vec![0.0; n];
    rhs_into(&state.q, &state.p, &mut dq, &mut dp);
    (dq, dp)
}

/// Threshold below which a run is flagged as grazing a collision: the
/// vector field is not smooth where positions coincide.
pub const COLLISION_FLAG_SEPARATION: f64 = 1e-6;

/// Result of a peakon integration with conservation diagnostics.
#[derive(Debug, Clone)]
pub struct PeakonRun {
    pub states: Vec<PeakonState>,
    /// `max_t |H(t) - H(0)| / max(|H(0)|, 1)`.
    pub energy_drift: f64,
    /// `max_t |Σp(t) - Σp(0)|`.
    pub momentum_drift: f64,
    /// Some sample came within [`COLLISION_FLAG_SEPARATION`] of a collision.
    pub near_collision: bool,
    /// Set when the state went non-finite; `states` holds the partial run.
    pub diverged_at: Option<f64>,
}

impl PeakonRun {
    pub fn initial(&self) -> &PeakonState {
        &self.states[0]
    }

    pub fn last(&self) -> &PeakonState {
        self.states.last().unwrap()
    }
}

/// Fixed-step RK4 integration over `[t0, t0 + horizon]`.
///
/// Conservation drifts are tracked sample by sample; a non-finite state stops
/// the run early and is reported in `diverged_at` together with the partial
/// trajectory.
pub fn integrate_peakons(state0: &PeakonState, horizon: f64, dt: f64) -> Result<PeakonRun> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Config("time step must be positive".into()));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::Config("horizon must be positive".into()));
    }
    let n = state0.len();
    let steps = (horizon / dt - 1e-9).ceil().max(1.0) as usize;
    let h = horizon / steps as f64;

    let h0 = hamiltonian(state0);
    let p0 = total_momentum(state0);
    let href = h0.abs().max(1.0);

    let mut q = state0.q.clone();
    let mut p = state0.p.clone();
    let mut states = Vec::with_capacity(steps + 1);
    states.push(state0.clone());

    let mut energy_drift = 0.0_f64;
    let mut momentum_drift = 0.0_f64;
    let mut near_collision = state0.min_separation() < COLLISION_FLAG_SEPARATION;

    let mut k1q = vec![0.0; n];
    let mut k1p = vec![0.0; n];
    let mut k2q = vec![0.0; n];
    let mut k2p = vec![0.0; n];
    let mut k3q = vec![0.0; n];
    let mut k3p = vec![0.0; n];
    let mut k4q = vec![0.0; n];
    let mut k4p = vec![0.0; n];
    let mut qt = vec![0.0; n];
    let mut pt = vec![0.0; n];

    for step in 1..=steps {
        rhs_into(&q, &p, &mut k1q, &mut k1p);
        for i in 0..n {
            qt[i] = q[i] + 0.5 * h * k1q[i];
            pt[i] = p[i] + 0.5 * h * k1p[i];
        }
        rhs_into(&qt, &pt, &mut k2q, &mut k2p);
        for i in 0..n {
            qt[i] = q[i] + 0.5 * h * k2q[i];
            pt[i] = p[i] + 0.5 * h * k2p[i];
        }
        rhs_into(&qt, &pt, &mut k3q, &mut k3p);
        for i in 0..n {
            qt[i] = q[i] + h * k3q[i];
            pt[i] = p[i] + h * k3p[i];
        }
        rhs_into(&qt, &pt, &mut k4q, &mut k4p);
        for i in 0..n {
            q[i] += h / 6.0 * (k1q[i] + 2.0 * k2q[i] + 2.0 * k3q[i] + k4q[i]);
            p[i] += h / 6.0 * (k1p[i] + 2.0 * k2p[i] + 2.0 * k3p[i] + k4p[i]);
        }

        let t = state0.t + h * step as f64;
        if q.iter().chain(p.iter()).any(|v| !v.is_finite()) {
            return Ok(PeakonRun {
                states,
                energy_drift,
                momentum_drift,
                near_collision,
                diverged_at: Some(t),
            });
        }
        let st = PeakonState { q: q.clone(), p: p.clone(), t };
        energy_drift = energy_drift.max((hamiltonian(&st) - h0).abs() / href);
        momentum_drift = momentum_drift.max((total_momentum(&st) - p0).abs());
        near_collision = near_collision || st.min_separation() < COLLISION_FLAG_SEPARATION;
        states.push(st);
    }

    Ok(PeakonRun { states, energy_drift, momentum_drift, near_collision, diverged_at: None })
}

/// Reconstructed field `u(x) = Σ p_i e^{-|x - q_i|}` at the sample points.
pub fn peakon_field(state: &PeakonState, x_samples: &[f64]) -> Vec<f64> {
    x_samples
        .iter()
        .map(|&x| {
            state
                .q
                .iter()
                .zip(&state.p)
                .map(|(&qi, &pi)| pi * (-(x - qi).abs()).exp())
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn state(q: &[f64], p: &[f64]) -> PeakonState {
        PeakonState::new(q.to_vec(), p.to_vec(), 0.0).unwrap()
    }

    #[test]
    fn hamiltonian_examples() {
        // Single peakon with p = 2: H = ½·4 = 2.
        assert_eq!(hamiltonian(&state(&[0.0], &[2.0])), 2.0);
        // Zero momentum.
        assert_eq!(hamiltonian(&state(&[1.0, 2.0], &[0.0, 0.0])), 0.0);
        // q = (0, ln 2), p = (1,1): ½(1 + 1 + 2·½) = 1.5.
        let h = hamiltonian(&state(&[0.0, 2.0_f64.ln()], &[1.0, 1.0]));
        assert!((h - 1.5).abs() < 1e-14);
    }

    #[test]
    fn rhs_examples() {
        // Single peakon: free translation.
        let (dq, dp) = rhs(&state(&[0.0], &[0.7]));
        assert_eq!(dq, vec![0.7]);
        assert_eq!(dp, vec![0.0]);

        // Zero momentum freezes everything.
        let (dq, dp) = rhs(&state(&[-1.0, 1.0], &[0.0, 0.0]));
        assert_eq!(dq, vec![0.0, 0.0]);
        assert_eq!(dp, vec![0.0, 0.0]);

        // Symmetric peakon-antipeakon state: dq₁ = p₁ + p₂e⁻² = 1 - e⁻².
        let (dq, _dp) = rhs(&state(&[-1.0, 1.0], &[1.0, -1.0]));
        assert!((dq[0] - (1.0 - (-2.0_f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn rhs_matches_finite_difference_gradient() {
        // dq = ∂H/∂p and dp = -∂H/∂q, checked against central differences.
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let eps = 1e-6;
        for _ in 0..100 {
            let n = rng.random_range(1..5);
            let mut q: Vec<f64> = (0..n).map(|_| rng.random_range(-4.0..4.0)).collect();
            // Keep positions distinct so H is differentiable.
            q.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if q.windows(2).any(|w| (w[1] - w[0]).abs() < 1e-3) {
                continue;
            }
            let p: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let st = state(&q, &p);
            let (dq, dp) = rhs(&st);
            for i in 0..n {
                let mut plus = st.clone();
                let mut minus = st.clone();
                plus.p[i] += eps;
                minus.p[i] -= eps;
                let dh_dp = (hamiltonian(&plus) - hamiltonian(&minus)) / (2.0 * eps);
                assert!((dq[i] - dh_dp).abs() <= 1e-5 * dh_dp.abs().max(1.0));

                let mut plus = st.clone();
                let mut minus = st.clone();
                plus.q[i] += eps;
                minus.q[i] -= eps;
                let dh_dq = (hamiltonian(&plus) - hamiltonian(&minus)) / (2.0 * eps);
                assert!((dp[i] + dh_dq).abs() <= 1e-5 * dh_dq.abs().max(1.0));
            }
        }
    }

    #[test]
    fn single_peakon_travels_linearly() {
        let run = integrate_peakons(&state(&[0.0], &[1.0]), 5.0, 1e-3).unwrap();
        assert!(run.diverged_at.is_none());
        assert!((run.last().q[0] - 5.0).abs() <= 1e-8);
        assert!(run.energy_drift <= 1e-12);
    }

    #[test]
    fn two_peakon_overtaking_conserves() {
        let run = integrate_peakons(&state(&[-5.0, 5.0], &[2.0, 1.0]), 10.0, 1e-3).unwrap();
        assert!(run.diverged_at.is_none());
        assert!(run.energy_drift <= 1e-6, "H drift {}", run.energy_drift);
        assert!(run.momentum_drift <= 1e-9, "Σp drift {}", run.momentum_drift);
    }

    #[test]
    fn flow_reverses_under_momentum_flip() {
        let start = state(&[-3.0, 2.5], &[1.3, -0.4]);
        let fwd = integrate_peakons(&start, 4.0, 5e-4).unwrap();
        let mut back_start = fwd.last().clone();
        for p in &mut back_start.p {
            *p = -*p;
        }
        let back = integrate_peakons(&back_start, 4.0, 5e-4).unwrap();
        for i in 0..start.len() {
            assert!((back.last().q[i] - start.q[i]).abs() <= 1e-6);
        }
    }

    #[test]
    fn field_examples() {
        // Zero momenta: zero field.
        let u = peakon_field(&state(&[0.0, 1.0], &[0.0, 0.0]), &[-1.0, 0.0, 1.0]);
        assert!(u.iter().all(|&v| v == 0.0));

        // Peak value at the peak.
        let u = peakon_field(&state(&[0.4], &[1.7]), &[0.4]);
        assert_eq!(u[0], 1.7);

        // Far-separated peakons decouple up to e^{-separation}.
        let st = state(&[-20.0, 20.0], &[1.0, -2.0]);
        let u = peakon_field(&st, &[-20.0, 20.0]);
        let sep_tail = (-40.0_f64).exp();
        assert!((u[0] - (1.0 + -2.0 * sep_tail)).abs() < 1e-18);
        assert!((u[1] - (-2.0 + sep_tail)).abs() < 1e-18);
    }

    #[test]
    fn near_collision_is_flagged_and_bad_configs_rejected() {
        let st = state(&[0.0, 1e-8], &[1.0, 1.0]);
        let run = integrate_peakons(&st, 0.01, 1e-3).unwrap();
        assert!(run.near_collision);

        assert!(integrate_peakons(&st, 1.0, 0.0).is_err());
        assert!(integrate_peakons(&st, -1.0, 0.1).is_err());
        assert!(PeakonState::new(vec![0.0], vec![1.0, 2.0], 0.0).is_err());
        assert!(PeakonState::new(vec![f64::NAN], vec![1.0], 0.0).is_err());
    }
}
