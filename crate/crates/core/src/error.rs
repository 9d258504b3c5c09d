//! Error type shared across the crate.

use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An input coordinate, control value or parameter is NaN or infinite.
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Two coordinates coincide (or nearly so) where the inverse square root
    /// is required; `E(x)` is singular on the diagonal.
    #[error("degenerate point: separation {separation:e} below floor {floor:e}")]
    DegeneratePoint { separation: f64, floor: f64 },

    /// An endpoint violates the region hypothesis of the requested witness.
    #[error("region violation: {0}")]
    Region(&'static str),

    /// Inputs are admissible points but fall outside the lemma's scope
    /// (e.g. distance above the allowed radius, segment crossing the diagonal).
    #[error("outside lemma scope: {0}")]
    OutOfScope(&'static str),

    #[error("ordering violation: {0}")]
    Ordering(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numeric failure: {0}")]
    Numeric(&'static str),

    /// The integrated state left the finite range; carries the time at which
    /// divergence was detected.
    #[error("trajectory diverged at s = {at}")]
    Diverged { at: f64 },

    #[error("empty sample: {0}")]
    EmptySample(&'static str),

    #[error("query outside the grid domain")]
    OutOfDomain,
}

pub type Result<T> = core::result::Result<T, Error>;
