//! Error type shared across the engine.

use thiserror::Error;

/// Errors surfaced by simulation, field, and diagnostics operations.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SimError {
    /// A model parameter violates one of its invariants.
    #[error("invalid parameter `{field}`: {reason}")]
    Validation { field: &'static str, reason: String },

    /// Two particles sit at exactly zero separation, where the pair potential
    /// is undefined. Hitting this numerically indicates a step-size failure.
    #[error("singular configuration: particles {i} and {j} overlap exactly at step {step}")]
    Singular { i: usize, j: usize, step: u64 },

    /// An operation that requires a live particle was given a dead one.
    #[error("particle {0} is inactive")]
    Inactive(usize),

    /// A kill was requested for a particle that already died; each particle
    /// can switch at most once.
    #[error("particle {0} is already dead")]
    AlreadyDead(usize),

    /// Stencil and grid disagree on the space dimension.
    #[error("dimension mismatch: stencil is {stencil}-d, field is {field}-d")]
    DimensionMismatch { stencil: usize, field: usize },

    /// The integrator was asked to step past the configured horizon.
    #[error("step overrun: time {time} already reached horizon {horizon}")]
    StepOverrun { time: f64, horizon: f64 },

    /// A statistical check was handed fewer samples than it needs.
    #[error("insufficient samples: got {got}, need at least {need}")]
    InsufficientSamples { got: usize, need: usize },
}

impl SimError {
    pub fn validation(field: &'static str, reason: impl Into<String>) -> Self {
        SimError::Validation { field, reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
