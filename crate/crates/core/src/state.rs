//! Particle and system state.

use crate::reaction::EventLog;
use crate::scalar::Scalar;
use crate::vect::Point;

/// One particle: a position in `R^d` or the cemetery, its accumulated hazard,
/// and its private exponential clock.
///
/// `position == None` is the cemetery: the particle has reacted, stopped
/// contributing to every interaction, and its recorded state is frozen.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState<F> {
    /// Current position, or `None` once the particle has been killed.
    pub position: Option<Point<F>>,
    /// Accumulated hazard; nondecreasing while alive, frozen at death.
    pub hazard: F,
    /// Unit-exponential clock the hazard must cross for the particle to die.
    pub clock: F,
    /// Time of death, set exactly when the particle enters the cemetery.
    pub death_time: Option<F>,
}

impl<F: Scalar> ParticleState<F> {
    pub fn new(position: Point<F>, clock: F) -> Self {
        ParticleState { position: Some(position), hazard: F::zero(), clock, death_time: None }
    }

    /// Activity label: `true` while the particle takes part in the dynamics.
    #[inline]
    pub fn active(&self) -> bool {
        self.position.is_some()
    }
}

/// Full simulation state owned by a single logical driver.
#[derive(Debug, Clone)]
pub struct SystemState<F> {
    /// Current time.
    pub time: F,
    /// Index of the next step to execute; noise streams are keyed on it.
    pub step_index: u64,
    pub particles: Vec<ParticleState<F>>,
    pub events: EventLog<F>,
}

impl<F: Scalar> SystemState<F> {
    pub fn new(positions: Vec<Point<F>>, clocks: Vec<F>) -> Self {
        assert_eq!(positions.len(), clocks.len());
        let particles =
            positions.into_iter().zip(clocks).map(|(p, c)| ParticleState::new(p, c)).collect();
        SystemState { time: F::zero(), step_index: 0, particles, events: EventLog::default() }
    }

    pub fn active_count(&self) -> usize {
        self.particles.iter().filter(|p| p.active()).count()
    }

    /// Indices and positions of the active particles, in particle order.
    pub fn active_positions(&self) -> Vec<(usize, Point<F>)> {
        self.particles
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.position.map(|x| (i, x)))
            .collect()
    }

    /// Smallest pairwise distance among active particles, infinite when
    /// fewer than two are alive.
    pub fn min_pair_distance(&self) -> F {
        let active = self.active_positions();
        let mut best = F::infinity();
        for (k, &(_, xi)) in active.iter().enumerate() {
            for &(_, xj) in &active[k + 1..] {
                best = best.min(crate::vect::dist(xi, xj));
            }
        }
        best
    }
}
