//! Model parameters and their validation.

use crate::error::{Result, SimError};
use crate::scalar::Scalar;
use crate::vect::Point;

/// All physical and numerical constants of one run.
///
/// The pair potential is `V(x) = A |x|^-alpha - B |x|^-beta` with
/// `alpha > beta > 0`: hard repulsion at close range, weak attraction at
/// intermediate range. Its minimum sits at
/// `r* = (alpha A / (beta B))^(1/(alpha-beta))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<F> {
    /// Repulsion amplitude `A`.
    pub a: F,
    /// Attraction amplitude `B`.
    pub b: F,
    /// Repulsion exponent `alpha`.
    pub alpha: F,
    /// Attraction exponent `beta`.
    pub beta: F,
    /// Interaction radius of the nonlocal environmental drift.
    pub r_ball: F,
    /// Depletion rate of the environmental field.
    pub lambda: F,
    /// Hazard scale of the killing mechanism.
    pub lambda_tilde: F,
    /// Diffusion coefficient (constant, scalar).
    pub sigma: F,
    /// Mollifier bandwidth used for the regularized empirical density.
    pub kernel_bandwidth: F,
    /// Regularization radius of the pair potential.
    pub epsilon: F,
    /// Initial particle count.
    pub n_particles: usize,
    /// Normalization constant for the rescaled counting measure; at least
    /// `n_particles` and held fixed while particles die.
    pub n_tilde: usize,
    /// Time horizon.
    pub horizon: F,
    /// Step size.
    pub dt: F,
    /// Space dimension, 1 to 3.
    pub dim: usize,
    /// Lower corner of the field box.
    pub box_lo: Point<F>,
    /// Upper corner of the field box.
    pub box_hi: Point<F>,
    /// Target node spacing of the field grid.
    pub grid_spacing: F,
    /// Nodes per axis for the ball quadrature of the environmental drift.
    pub drift_quadrature_res: usize,
    /// Minimum pairwise gap enforced when sampling initial positions.
    /// Defaults to `max(2 epsilon, 0.8 r*)` so the explicit scheme starts
    /// outside the stiff part of the repulsion.
    pub init_min_gap: F,
    /// Master seed for every random stream of the run.
    pub seed: u64,
}

impl<F: Scalar> ModelParams<F> {
    /// Radius of the potential minimum, `(alpha A / (beta B))^(1/(alpha-beta))`.
    pub fn lj_min_radius(&self) -> F {
        ((self.alpha * self.a) / (self.beta * self.b)).powf(F::one() / (self.alpha - self.beta))
    }

    /// Number of uniform steps covering `[0, horizon]`.
    pub fn n_steps(&self) -> u64 {
        (self.horizon / self.dt).as_f64().round() as u64
    }
}

impl<F: Scalar> Default for ModelParams<F> {
    fn default() -> Self {
        let mut p = ModelParams {
            a: F::one(),
            b: F::one(),
            alpha: F::lit(12.0),
            beta: F::lit(6.0),
            r_ball: F::one(),
            lambda: F::one(),
            lambda_tilde: F::one(),
            sigma: F::lit(0.2),
            kernel_bandwidth: F::lit(0.2),
            epsilon: F::lit(0.05),
            n_particles: 50,
            n_tilde: 50,
            horizon: F::one(),
            dt: F::lit(1.0e-4),
            dim: 2,
            box_lo: [F::lit(-4.0), F::lit(-4.0), F::zero()],
            box_hi: [F::lit(4.0), F::lit(4.0), F::zero()],
            grid_spacing: F::lit(0.1),
            drift_quadrature_res: 100,
            init_min_gap: F::zero(),
            seed: 0,
        };
        p.init_min_gap = default_init_min_gap(&p);
        p
    }
}

/// `max(2 epsilon, 0.8 r*)`: wide enough that the initial pair forces stay
/// integrable at the default step size.
pub fn default_init_min_gap<F: Scalar>(p: &ModelParams<F>) -> F {
    (F::lit(2.0) * p.epsilon).max(F::lit(0.8) * p.lj_min_radius())
}

/// Checks every parameter invariant and returns the parameters unchanged when
/// they all hold. The first violated invariant is reported.
pub fn validate_params<F: Scalar>(p: ModelParams<F>) -> Result<ModelParams<F>> {
    fn positive<F: Scalar>(value: F, field: &'static str) -> Result<()> {
        if value > F::zero() && value.is_finite() {
            Ok(())
        } else {
            Err(SimError::validation(field, format!("must be positive, got {value}")))
        }
    }
    fn nonneg<F: Scalar>(value: F, field: &'static str) -> Result<()> {
        if value >= F::zero() && value.is_finite() {
            Ok(())
        } else {
            Err(SimError::validation(field, format!("must be nonnegative, got {value}")))
        }
    }

    positive(p.a, "a")?;
    positive(p.b, "b")?;
    positive(p.alpha, "alpha")?;
    positive(p.beta, "beta")?;
    if p.alpha <= p.beta {
        return Err(SimError::validation("alpha", "alpha must exceed beta"));
    }
    positive(p.r_ball, "r_ball")?;
    nonneg(p.lambda, "lambda")?;
    nonneg(p.lambda_tilde, "lambda_tilde")?;
    positive(p.sigma, "sigma")?;
    positive(p.kernel_bandwidth, "kernel_bandwidth")?;
    positive(p.epsilon, "epsilon")?;
    let r_star = p.lj_min_radius();
    if p.epsilon >= r_star {
        return Err(SimError::validation(
            "epsilon",
            format!("exceeds LJ minimum radius {r_star}"),
        ));
    }
    if p.n_particles < 2 {
        return Err(SimError::validation("n_particles", "need at least 2 particles"));
    }
    if p.n_tilde < p.n_particles {
        return Err(SimError::validation(
            "n_tilde",
            "normalization constant must be at least the particle count",
        ));
    }
    positive(p.horizon, "horizon")?;
    positive(p.dt, "dt")?;
    if p.dt >= p.horizon {
        return Err(SimError::validation("dt", "step size must be smaller than the horizon"));
    }
    if !(1..=3).contains(&p.dim) {
        return Err(SimError::validation("dim", "dimension must be 1, 2 or 3"));
    }
    for axis in 0..p.dim {
        if !(p.box_lo[axis] < p.box_hi[axis]) {
            return Err(SimError::validation(
                "box_lo",
                format!("box_lo must be below box_hi on axis {axis}"),
            ));
        }
    }
    positive(p.grid_spacing, "grid_spacing")?;
    if p.drift_quadrature_res < 8 {
        return Err(SimError::validation("drift_quadrature_res", "need at least 8 nodes per axis"));
    }
    nonneg(p.init_min_gap, "init_min_gap")?;
    Ok(p)
}
