//! Simulation engine and verification harness for a finite system of
//! Brownian particles with three coupled mechanisms:
//!
//! * a singular Lennard-Jones pairwise drift with self-interactions excluded,
//!   integrated through a C^2 regularization of the potential;
//! * a nonlocal drift mediated by an environmental concentration field that
//!   the particles themselves deplete through a mass-action law;
//! * stochastic killing with field-dependent hazard intensity, realized by
//!   thinning against per-particle unit-exponential clocks.
//!
//! The core is generic over the floating point scalar (see [`Scalar`]);
//! concrete `f64` aliases are exported at the crate root. All randomness is
//! counter-based, so runs are bit-reproducible for a fixed seed regardless
//! of thread count.

pub mod diagnostics;
pub mod drift;
pub mod error;
pub mod field;
pub mod integrator;
pub mod lj;
pub mod params;
pub mod reaction;
pub mod rng;
pub mod scalar;
pub mod state;
pub mod stats;
pub mod vect;

pub use error::{Result, SimError};
pub use scalar::Scalar;

/// Default-precision aliases.
pub type ModelParams64 = params::ModelParams<f64>;
pub type Engine64 = integrator::Engine<f64>;
pub type SystemState64 = state::SystemState<f64>;
pub type FieldGrid64 = field::FieldGrid<f64>;
pub type LJKernel64 = lj::LJKernel<f64>;
pub type BallStencil64 = drift::BallStencil<f64>;
pub type Mollifier64 = field::Mollifier<f64>;
pub type EventLog64 = reaction::EventLog<f64>;
pub type DeathEvent64 = reaction::DeathEvent<f64>;
