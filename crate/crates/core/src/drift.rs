//! Nonlocal environmental drift.
//!
//! Active particles feel the vector field
//! `G[c](x) = int_{B_R(x)} (z-x)/|z-x| * (1 - c(z)/m0(z)) * e^{-|z-x|} dz`,
//! steering them toward regions where the field has been depleted the most.
//! The integral is evaluated with a precomputed midpoint stencil over the
//! ball: positive weights, point-reflection symmetry (so odd integrands
//! cancel exactly), and deterministic summation order.

use crate::error::{Result, SimError};
use crate::field::EnvField;
use crate::scalar::Scalar;
use crate::vect::{self, Point};

/// Midpoint quadrature stencil over `B_R(0)`.
#[derive(Debug, Clone)]
pub struct BallStencil<F> {
    dim: usize,
    radius: F,
    resolution: usize,
    offsets: Vec<Point<F>>,
    weights: Vec<F>,
    /// Fused per-offset factor `w_k * e^{-|o_k|} * o_k / |o_k|`.
    kernel: Vec<Point<F>>,
}

impl<F: Scalar> BallStencil<F> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> F {
        self.radius
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn offsets(&self) -> &[Point<F>] {
        &self.offsets
    }

    pub fn weights(&self) -> &[F] {
        &self.weights
    }

    pub fn total_weight(&self) -> F {
        self.weights.iter().copied().sum()
    }
}

/// Builds the stencil: a tensor grid of `res` cells per axis over the
/// bounding cube, keeping cell centers with `|offset| <= R` at weight equal
/// to the cell volume. Offsets shorter than `1e-12` are dropped; the
/// integrand direction is undefined there and the omitted set has measure
/// zero.
pub fn build_stencil<F: Scalar>(radius: F, resolution: usize, dim: usize) -> Result<BallStencil<F>> {
    if resolution < 8 {
        return Err(SimError::validation("drift_quadrature_res", "need at least 8 nodes per axis"));
    }
    if !(1..=3).contains(&dim) {
        return Err(SimError::validation("dim", "dimension must be 1, 2 or 3"));
    }
    let h = F::lit(2.0) * radius / F::from_usize(resolution).unwrap();
    let cell_volume = h.powi(dim as i32);
    let half_h = F::lit(0.5) * h;
    let r2 = radius * radius;
    let tiny = F::lit(1.0e-12);

    let axis_count = |axis: usize| if axis < dim { resolution } else { 1 };
    let mut offsets = Vec::new();
    let mut weights = Vec::new();
    let mut kernel = Vec::new();
    for iz in 0..axis_count(2) {
        for iy in 0..axis_count(1) {
            for ix in 0..axis_count(0) {
                let mut o = vect::zero();
                for (axis, idx) in [(0, ix), (1, iy), (2, iz)] {
                    if axis < dim {
                        // Center of cell `idx`, written as an odd multiple of
                        // h/2 so that reflected cells land on exact negations.
                        let k = 2 * idx as i64 + 1 - resolution as i64;
                        o[axis] = F::from_i64(k).unwrap() * half_h;
                    }
                }
                let d2 = vect::norm_sq(o);
                if d2 <= r2 && d2 > tiny * tiny {
                    let d = d2.sqrt();
                    offsets.push(o);
                    weights.push(cell_volume);
                    kernel.push(vect::scale(o, cell_volume * (-d).exp() / d));
                }
            }
        }
    }
    Ok(BallStencil { dim, radius, resolution, offsets, weights, kernel })
}

/// Environmental drift at `x`. Inactive particles are gated to the zero
/// vector; active particles receive the quadrature sum
/// `sum_k w_k (o_k/|o_k|) (1 - c(x+o_k)/m0(x+o_k)) e^{-|o_k|}`.
pub fn environmental_drift<F: Scalar>(
    stencil: &BallStencil<F>,
    field: &impl EnvField<F>,
    x: Point<F>,
    active: bool,
) -> Point<F> {
    if !active {
        return vect::zero();
    }
    let mut g = vect::zero();
    for (o, k) in stencil.offsets.iter().zip(&stencil.kernel) {
        let z = vect::add(x, *o);
        let depletion = F::one() - field.c_at(z) / field.m0_at(z);
        g = vect::add(g, vect::scale(*k, depletion));
    }
    g
}

/// Grid-backed variant that checks the dimensions agree.
pub fn environmental_drift_on_grid<F: Scalar>(
    stencil: &BallStencil<F>,
    grid: &crate::field::FieldGrid<F>,
    x: Point<F>,
    active: bool,
) -> Result<Point<F>> {
    if stencil.dim != grid.dim() {
        return Err(SimError::DimensionMismatch { stencil: stencil.dim, field: grid.dim() });
    }
    Ok(environmental_drift(stencil, grid, x, active))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FieldGrid, FnField};

    #[test]
    fn disk_weights_sum_to_area() {
        let s: BallStencil<f64> = build_stencil(1.0, 200, 2).unwrap();
        let total = s.total_weight();
        assert!(
            (total - std::f64::consts::PI).abs() / std::f64::consts::PI < 1e-3,
            "sum {total}"
        );
    }

    #[test]
    fn ball_weights_sum_to_volume() {
        let s: BallStencil<f64> = build_stencil(1.0, 100, 3).unwrap();
        let want = 4.0 * std::f64::consts::PI / 3.0;
        assert!((s.total_weight() - want).abs() < 1e-2, "sum {}", s.total_weight());
    }

    #[test]
    fn interval_weights_sum_to_length() {
        let s: BallStencil<f64> = build_stencil(1.0, 64, 1).unwrap();
        assert!((s.total_weight() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn stencil_is_reflection_symmetric() {
        let s: BallStencil<f64> = build_stencil(1.0, 24, 2).unwrap();
        for (o, w) in s.offsets().iter().zip(s.weights()) {
            let mirror = [-o[0], -o[1], -o[2]];
            let found = s
                .offsets()
                .iter()
                .zip(s.weights())
                .any(|(p, wp)| *p == mirror && wp == w);
            assert!(found, "offset {:?} has no mirror", o);
        }
    }

    #[test]
    fn too_coarse_resolution_rejected() {
        assert!(build_stencil::<f64>(1.0, 4, 2).is_err());
    }

    #[test]
    fn undepleted_field_gives_zero_drift() {
        let s: BallStencil<f64> = build_stencil(1.0, 48, 2).unwrap();
        let grid =
            FieldGrid::uniform(2, [-2.0, -2.0, 0.0], [2.0, 2.0, 0.0], 0.25, 1.0, 1.0).unwrap();
        let g = environmental_drift_on_grid(&s, &grid, [0.3, -0.2, 0.0], true).unwrap();
        assert_eq!(g, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn fully_depleted_field_cancels_by_symmetry() {
        let s: BallStencil<f64> = build_stencil(1.0, 48, 2).unwrap();
        let field = FnField::new(|_x| 0.0f64, |_x| 1.0f64);
        let g = environmental_drift(&s, &field, [0.0, 0.0, 0.0], true);
        assert!(vect::norm(g) < 1e-3, "drift {:?}", g);
    }

    #[test]
    fn inactive_particle_is_gated_to_zero() {
        let s: BallStencil<f64> = build_stencil(1.0, 48, 2).unwrap();
        let field = FnField::new(|_x| 0.0f64, |_x| 1.0f64);
        assert_eq!(environmental_drift(&s, &field, [0.4, 0.1, 0.0], false), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn half_plane_depletion_matches_closed_form() {
        // Depletion 1 for z1 > x1, 0 for z1 <= x1: the first component is
        // int_0^1 r e^-r dr * int_{-pi/2}^{pi/2} cos t dt = 2 (1 - 2/e).
        let s: BallStencil<f64> = build_stencil(1.0, 200, 2).unwrap();
        let x = [0.25, -0.75, 0.0];
        let field = FnField::new(move |z: Point<f64>| if z[0] > x[0] { 0.0 } else { 1.0 }, |_| 1.0f64);
        let g = environmental_drift(&s, &field, x, true);
        let want = 2.0 * (1.0 - 2.0 / std::f64::consts::E);
        assert!((g[0] - want).abs() < 1e-3, "g1 = {}, want {want}", g[0]);
        assert!(g[1].abs() < 1e-3, "g2 = {}", g[1]);
    }

    #[test]
    fn dimension_mismatch_detected() {
        let s: BallStencil<f64> = build_stencil(1.0, 16, 3).unwrap();
        let grid =
            FieldGrid::uniform(2, [-1.0, -1.0, 0.0], [1.0, 1.0, 0.0], 0.5, 1.0, 1.0).unwrap();
        assert!(matches!(
            environmental_drift_on_grid(&s, &grid, [0.0; 3], true),
            Err(SimError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn drift_bounded_by_ball_volume() {
        let s: BallStencil<f64> = build_stencil(1.0, 64, 2).unwrap();
        let streams = crate::rng::RandomStreams::new(23);
        // Adversarial bounded fields c/m0 in [0, 1].
        for trial in 0..50u64 {
            let phase = streams.uniform::<f64>(0, crate::rng::StreamPurpose::Init, trial, 0) * 10.0;
            let field = FnField::new(
                move |z: Point<f64>| (0.5 + 0.5 * (7.0 * z[0] + 3.0 * z[1] + phase).sin()).clamp(0.0, 1.0),
                |_| 1.0f64,
            );
            let x = [
                4.0 * streams.uniform::<f64>(1, crate::rng::StreamPurpose::Init, trial, 0) - 2.0,
                4.0 * streams.uniform::<f64>(1, crate::rng::StreamPurpose::Init, trial, 1) - 2.0,
                0.0,
            ];
            let g = environmental_drift(&s, &field, x, true);
            assert!(vect::norm(g) <= std::f64::consts::PI + 1e-3);
        }
    }
}
