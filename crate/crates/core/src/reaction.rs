//! Field-dependent killing.
//!
//! Each particle carries a unit-exponential clock `zeta` and accumulates the
//! hazard `Lambda(t) = lambda_tilde * int_0^t c(s, X_s) ds` along its path;
//! it dies when the hazard first crosses the clock. The crossing time within
//! a step is located by linear interpolation, which is exact while the
//! intensity is frozen over the step. A per-step acceptance variant of the
//! same law is kept solely as a distributional cross-check: the two are
//! equal in law but not pathwise.

use crate::error::{Result, SimError};
use crate::field::{EnvField, FieldGrid};
use crate::rng::{RandomStreams, StreamPurpose};
use crate::scalar::Scalar;
use crate::state::{ParticleState, SystemState};

/// One particle death.
#[derive(Debug, Clone, PartialEq)]
pub struct DeathEvent<F> {
    pub particle: usize,
    /// Estimated crossing time, inside the step where the crossing occurred.
    pub time: F,
    /// Step during which the crossing was detected.
    pub step: u64,
    /// Accumulated hazard at detection.
    pub hazard_at_death: F,
}

/// Ordered record of deaths; at most one entry per particle per run.
#[derive(Debug, Clone, PartialEq)]
pub struct EventLog<F> {
    events: Vec<DeathEvent<F>>,
}

impl<F> Default for EventLog<F> {
    fn default() -> Self {
        EventLog { events: Vec::new() }
    }
}

impl<F: Scalar> EventLog<F> {
    pub fn push(&mut self, ev: DeathEvent<F>) {
        self.events.push(ev);
    }

    pub fn events(&self) -> &[DeathEvent<F>] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// Increases the particle's hazard by `lambda_tilde * c(X) * dt` and returns
/// the new hazard value.
pub fn accumulate_hazard<F: Scalar>(
    p: &mut ParticleState<F>,
    i: usize,
    grid: &FieldGrid<F>,
    dt: F,
    lambda_tilde: F,
) -> Result<F> {
    let Some(x) = p.position else {
        return Err(SimError::Inactive(i));
    };
    p.hazard = p.hazard + lambda_tilde * grid.c_at(x) * dt;
    Ok(p.hazard)
}

/// Detects whether the hazard crossed the clock during the step that just
/// accumulated from `hazard_before` to `p.hazard`. The crossing time is
/// interpolated linearly within the step.
pub fn check_crossing<F: Scalar>(
    p: &ParticleState<F>,
    i: usize,
    hazard_before: F,
    t_step_start: F,
    dt: F,
    step: u64,
) -> Option<DeathEvent<F>> {
    if !p.active() || p.hazard < p.clock {
        return None;
    }
    let gained = p.hazard - hazard_before;
    let frac = if gained > F::zero() { ((p.clock - hazard_before) / gained).max(F::zero()) } else { F::zero() };
    Some(DeathEvent { particle: i, time: t_step_start + dt * frac, step, hazard_at_death: p.hazard })
}

/// Sends the particle to the cemetery and appends the event. Every other
/// particle is untouched.
pub fn kill<F: Scalar>(state: &mut SystemState<F>, ev: &DeathEvent<F>) -> Result<()> {
    let p = &mut state.particles[ev.particle];
    if !p.active() {
        return Err(SimError::AlreadyDead(ev.particle));
    }
    p.position = None;
    p.death_time = Some(ev.time);
    p.hazard = ev.hazard_at_death;
    state.events.push(ev.clone());
    Ok(())
}

/// Cross-validation killing mechanism: each active particle independently
/// dies during this step with probability `1 - exp(-lambda_i dt)` at rate
/// `lambda_i = lambda_tilde * c(t, X_i)`. Implemented by drawing a fresh
/// unit-exponential `E` per particle and step and accepting when
/// `E <= lambda_i dt`, which also yields the exact conditional death time
/// offset `E / lambda_i`. Never combined with the clock mechanism.
pub fn prm_step_acceptance<F: Scalar>(
    state: &SystemState<F>,
    grid: &FieldGrid<F>,
    dt: F,
    lambda_tilde: F,
    streams: &RandomStreams,
) -> Vec<DeathEvent<F>> {
    let mut deaths = Vec::new();
    for (i, p) in state.particles.iter().enumerate() {
        let Some(x) = p.position else { continue };
        let rate = lambda_tilde * grid.c_at(x);
        if rate <= F::zero() {
            continue;
        }
        let e: F = streams.exponential(i, StreamPurpose::Accept, state.step_index, 0);
        if e <= rate * dt {
            deaths.push(DeathEvent {
                particle: i,
                time: state.time + e / rate,
                step: state.step_index,
                hazard_at_death: p.hazard + e,
            });
        }
    }
    deaths
}
