//! Lennard-Jones pair interaction: potential, force, Laplacian, the C^2
//! regularization with bounded Hessian, and the aggregated pairwise drift.
//!
//! Everything is expressed through `W(s) = A s^(-alpha/2) - B s^(-beta/2)`
//! with `s = |x|^2`, so `V(x) = W(|x|^2)` and the regularization below the
//! radius `epsilon` is the second-order Taylor polynomial of `W` in `s` at
//! `s = epsilon^2`. That polynomial matches value, gradient and Hessian at
//! the seam and is smooth through the origin.

use std::collections::HashMap;

use crate::error::{Result, SimError};
use crate::scalar::Scalar;
use crate::state::SystemState;
use crate::vect::{self, Point};

/// Pair force magnitude below which the attractive tail is truncated by the
/// neighbor search.
pub const TAIL_FORCE_TOLERANCE: f64 = 1.0e-12;

/// Lennard-Jones kernel with cached smoothing coefficients at the seam.
#[derive(Debug, Clone)]
pub struct LJKernel<F> {
    pub a: F,
    pub b: F,
    pub alpha: F,
    pub beta: F,
    pub epsilon: F,
    /// `W(eps^2)`, `W'(eps^2)`, `W''(eps^2)`.
    w0: F,
    w1: F,
    w2: F,
}

impl<F: Scalar> LJKernel<F> {
    pub fn new(a: F, b: F, alpha: F, beta: F, epsilon: F) -> Self {
        let two = F::lit(2.0);
        let ha = alpha / two;
        let hb = beta / two;
        let s = epsilon * epsilon;
        let w0 = a * s.powf(-ha) - b * s.powf(-hb);
        let w1 = -ha * a * s.powf(-ha - F::one()) + hb * b * s.powf(-hb - F::one());
        let w2 = ha * (ha + F::one()) * a * s.powf(-ha - two)
            - hb * (hb + F::one()) * b * s.powf(-hb - two);
        LJKernel { a, b, alpha, beta, epsilon, w0, w1, w2 }
    }

    pub fn from_params(p: &crate::params::ModelParams<F>) -> Self {
        Self::new(p.a, p.b, p.alpha, p.beta, p.epsilon)
    }

    /// Radius of the potential minimum.
    pub fn min_radius(&self) -> F {
        ((self.alpha * self.a) / (self.beta * self.b)).powf(F::one() / (self.alpha - self.beta))
    }

    /// `V(x) = A |x|^-alpha - B |x|^-beta`.
    pub fn value(&self, x: Point<F>) -> Result<F> {
        let r2 = vect::norm_sq(x);
        if r2 == F::zero() {
            return Err(SimError::Singular { i: 0, j: 0, step: 0 });
        }
        let two = F::lit(2.0);
        Ok(self.a * r2.powf(-self.alpha / two) - self.b * r2.powf(-self.beta / two))
    }

    /// `F(x) = -grad V(x) = (alpha A |x|^(-alpha-2) - beta B |x|^(-beta-2)) x`.
    pub fn force(&self, x: Point<F>) -> Result<Point<F>> {
        let r2 = vect::norm_sq(x);
        if r2 == F::zero() {
            return Err(SimError::Singular { i: 0, j: 0, step: 0 });
        }
        let two = F::lit(2.0);
        let coef = self.alpha * self.a * r2.powf(-(self.alpha + two) / two)
            - self.beta * self.b * r2.powf(-(self.beta + two) / two);
        Ok(vect::scale(x, coef))
    }

    /// `Delta V(x)` for the radial potential: `p''(r) + (d-1) p'(r) / r`.
    pub fn laplacian(&self, x: Point<F>, dim: usize) -> Result<F> {
        let r = vect::norm(x);
        if r == F::zero() {
            return Err(SimError::Singular { i: 0, j: 0, step: 0 });
        }
        let one = F::one();
        let p1 = -self.alpha * self.a * r.powf(-self.alpha - one)
            + self.beta * self.b * r.powf(-self.beta - one);
        let p2 = self.alpha * (self.alpha + one) * self.a * r.powf(-self.alpha - F::lit(2.0))
            - self.beta * (self.beta + one) * self.b * r.powf(-self.beta - F::lit(2.0));
        Ok(p2 + F::from_usize(dim - 1).unwrap() * p1 / r)
    }

    /// Quadratic-in-`|x|^2` extension below the seam.
    #[inline]
    fn q(&self, s: F) -> F {
        let ds = s - self.epsilon * self.epsilon;
        self.w0 + self.w1 * ds + F::lit(0.5) * self.w2 * ds * ds
    }

    #[inline]
    fn q_prime(&self, s: F) -> F {
        self.w1 + self.w2 * (s - self.epsilon * self.epsilon)
    }

    /// `V_eps(x)`: identical to `V` for `|x| >= epsilon`, smooth inside.
    pub fn reg_value(&self, x: Point<F>) -> F {
        let r2 = vect::norm_sq(x);
        if r2 >= self.epsilon * self.epsilon {
            let two = F::lit(2.0);
            self.a * r2.powf(-self.alpha / two) - self.b * r2.powf(-self.beta / two)
        } else {
            self.q(r2)
        }
    }

    /// `-grad V_eps(x)`, defined on all of `R^d` with the zero vector at the
    /// origin.
    pub fn reg_force(&self, x: Point<F>) -> Point<F> {
        let r2 = vect::norm_sq(x);
        if r2 >= self.epsilon * self.epsilon {
            let two = F::lit(2.0);
            let coef = self.alpha * self.a * r2.powf(-(self.alpha + two) / two)
                - self.beta * self.b * r2.powf(-(self.beta + two) / two);
            vect::scale(x, coef)
        } else {
            vect::scale(x, -F::lit(2.0) * self.q_prime(r2))
        }
    }

    /// Separation beyond which the pair force magnitude stays below `tol`,
    /// used as the neighbor-search cutoff.
    pub fn tail_cutoff(&self, tol: F) -> F {
        let one = F::one();
        let rep = (self.alpha * self.a / tol).powf(one / (self.alpha + one));
        let att = (self.beta * self.b / tol).powf(one / (self.beta + one));
        rep.max(att)
    }
}

/// Cell list over a set of (index, position) pairs. Cells are cubes of the
/// cutoff side length; a neighbor query visits the 3^d surrounding cells in a
/// fixed lexicographic order, so force accumulation is deterministic.
#[derive(Debug)]
pub struct CellList<F> {
    cell_size: F,
    dim: usize,
    cells: HashMap<[i64; 3], Vec<(usize, Point<F>)>>,
}

impl<F: Scalar> CellList<F> {
    pub fn build(entries: &[(usize, Point<F>)], cell_size: F, dim: usize) -> Self {
        let mut cells: HashMap<[i64; 3], Vec<(usize, Point<F>)>> = HashMap::new();
        for &(idx, pos) in entries {
            cells.entry(Self::key(pos, cell_size)).or_default().push((idx, pos));
        }
        CellList { cell_size, dim, cells }
    }

    #[inline]
    fn key(pos: Point<F>, cell: F) -> [i64; 3] {
        let coord = |v: F| (v / cell).floor().as_f64() as i64;
        [coord(pos[0]), coord(pos[1]), coord(pos[2])]
    }

    /// Visits every entry within `cell_size` of `x` (plus cell-boundary
    /// slack), excluding index `exclude`.
    pub fn for_neighbors(&self, x: Point<F>, exclude: usize, mut visit: impl FnMut(usize, Point<F>)) {
        let center = Self::key(x, self.cell_size);
        let span = |axis: usize| if axis < self.dim { -1..=1 } else { 0..=0 };
        for dz in span(2) {
            for dy in span(1) {
                for dx in span(0) {
                    let key = [center[0] + dx, center[1] + dy, center[2] + dz];
                    if let Some(bucket) = self.cells.get(&key) {
                        for &(j, pos) in bucket {
                            if j != exclude {
                                visit(j, pos);
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Pairwise drift on particle `i`: `(1/n_tilde) * sum_{j active, j != i}
/// F_eps(x_i - x_j)`, with the attractive tail truncated at the cutoff where
/// the neglected pair force is below [`TAIL_FORCE_TOLERANCE`].
pub fn pairwise_drift<F: Scalar>(
    kernel: &LJKernel<F>,
    i: usize,
    state: &SystemState<F>,
    n_tilde: usize,
) -> Result<Point<F>> {
    if !state.particles[i].active() {
        return Err(SimError::Inactive(i));
    }
    let active = state.active_positions();
    let cutoff = kernel.tail_cutoff(F::lit(TAIL_FORCE_TOLERANCE));
    let list = CellList::build(&active, cutoff, 3);
    let xi = state.particles[i].position.expect("checked active");
    drift_from_list(kernel, i, xi, &list, cutoff, n_tilde)
}

fn drift_from_list<F: Scalar>(
    kernel: &LJKernel<F>,
    i: usize,
    xi: Point<F>,
    list: &CellList<F>,
    cutoff: F,
    n_tilde: usize,
) -> Result<Point<F>> {
    let cutoff_sq = cutoff * cutoff;
    let mut sum = vect::zero();
    let mut overlap = None;
    list.for_neighbors(xi, i, |j, xj| {
        let d = vect::sub(xi, xj);
        let r2 = vect::norm_sq(d);
        if r2 == F::zero() {
            overlap = Some(j);
        } else if r2 <= cutoff_sq {
            sum = vect::add(sum, kernel.reg_force(d));
        }
    });
    if let Some(j) = overlap {
        return Err(SimError::Singular { i, j, step: 0 });
    }
    Ok(vect::scale(sum, F::one() / F::from_usize(n_tilde).unwrap()))
}

/// Pairwise drift for every active particle, sharing one cell list. Entries
/// for dead particles are zero.
pub fn pairwise_drift_all<F: Scalar>(
    kernel: &LJKernel<F>,
    state: &SystemState<F>,
    n_tilde: usize,
) -> Result<Vec<Point<F>>> {
    use rayon::prelude::*;
    let active = state.active_positions();
    let cutoff = kernel.tail_cutoff(F::lit(TAIL_FORCE_TOLERANCE));
    let list = CellList::build(&active, cutoff, 3);
    let mut out = vec![vect::zero(); state.particles.len()];
    let drifts: Vec<(usize, Result<Point<F>>)> = active
        .par_iter()
        .map(|&(i, xi)| (i, drift_from_list(kernel, i, xi, &list, cutoff, n_tilde)))
        .collect();
    for (i, d) in drifts {
        out[i] = d?;
    }
    Ok(out)
}
