//! Optimal-control machinery for the degenerate Hamilton-Jacobi equation of
//! two-peakon Camassa-Holm dynamics.
//!
//! The Hamiltonian is the quadratic form `½ E(x) p · p` built from the peakon
//! kernel matrix `E(x)_{ij} = exp(-|x_i - x_j|)`, which is positive
//! semi-definite but singular on the diagonal `x_i = x_j`. This crate provides
//!
//! - [`kernel`]: closed-form and spectral algebra for `E(x)`, `√E(x)` and
//!   `√E(x)⁻¹`, with the quantitative bounds the regularity estimates use;
//! - [`control`]: piecewise-constant controls and RK4 integration of the
//!   controlled system `x'(s) = √E(x(s)) α(s)`;
//! - [`witness`]: the explicit steering controls between configuration points
//!   (along the diagonal, diagonal-to-point, straight off-diagonal segments)
//!   packaged as verifiable certificates with constants `(a, b, γ)`;
//! - [`value`]: a backward semi-Lagrangian solver for the value function
//!   `v(y,t) = inf ½∫|α|² + g(x(T))`, plus two independent oracles
//!   (1D Hopf-Lax, direct shooting);
//! - [`regularity`]: empirical time-Lipschitz and spatial Hölder moduli
//!   measured on solved grids;
//! - [`peakon`]: the multipeakon Hamiltonian flow with conservation
//!   diagnostics.
//!
//! The crate is `no_std` (with `alloc`); all IO, file formats and the CLI
//! live in the companion `peakon-hj-cli` crate.

#![no_std]

extern crate alloc;

pub mod control;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod peakon;
pub mod regularity;
pub mod value;
pub mod witness;

pub use error::{Error, Result};
pub use kernel::ConfigPoint;
