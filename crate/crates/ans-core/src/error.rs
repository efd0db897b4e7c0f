//! Error type shared by the core modules.

use alloc::string::String;

/// Failures surfaced by the core pipeline.
///
/// These are contract violations or data problems the caller can act on;
/// internal algorithmic invariants are enforced with debug assertions
/// instead.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A pose, delta, or sample contained NaN or infinity.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// A parameter was outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Too few samples for the requested fit.
    #[error("insufficient data: need at least {need} samples, got {got}")]
    InsufficientData { need: usize, got: usize },

    /// Input data admits no meaningful fit (e.g. all samples identical while
    /// more than one mixture component was requested).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// Procedural world generation exhausted its retry budget.
    #[error("world generation failed after {attempts} attempts")]
    GenerationFailed { attempts: u32 },

    /// A pose left the geocentric map. Episode runners translate this into a
    /// `map_overflow` episode status.
    #[error("pose ({x:.3}, {y:.3}) m is outside the {size}x{size} map")]
    OutOfMap { x: f64, y: f64, size: usize },
}
