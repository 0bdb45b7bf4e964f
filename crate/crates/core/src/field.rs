//! Regularized empirical density and the environmental field.
//!
//! The field `c` lives on a regular Cartesian grid over a bounded box and is
//! depleted by the mass-action law `dc/dt = -lambda c u`, where `u` is the
//! mollified density of the active particles. Freezing `u` at the left
//! endpoint of each step gives the exact nodewise update
//! `c <- c * exp(-lambda u dt)`, which keeps `0 <= c <= m0` unconditionally.
//! Outside the box the field is treated as undepleted.

use rayon::prelude::*;

use crate::error::{Result, SimError};
use crate::scalar::Scalar;
use crate::state::SystemState;
use crate::vect::{self, Point};

/// Continuous view of the environment: concentration `c` and reference
/// profile `m0` evaluated anywhere in space.
pub trait EnvField<F: Scalar>: Sync {
    fn c_at(&self, x: Point<F>) -> F;
    fn m0_at(&self, x: Point<F>) -> F;

    /// `1 - c(x)/m0(x)`, the factor steering particles toward depleted
    /// regions. Implementations may fuse the two lookups.
    #[inline]
    fn depletion_at(&self, x: Point<F>) -> F {
        F::one() - self.c_at(x) / self.m0_at(x)
    }
}

/// Analytic environment backed by closures, used for quadrature oracles.
pub struct FnField<F, C, M>
where
    C: Fn(Point<F>) -> F + Sync,
    M: Fn(Point<F>) -> F + Sync,
{
    pub c: C,
    pub m0: M,
    _marker: std::marker::PhantomData<F>,
}

impl<F, C, M> FnField<F, C, M>
where
    F: Scalar,
    C: Fn(Point<F>) -> F + Sync,
    M: Fn(Point<F>) -> F + Sync,
{
    pub fn new(c: C, m0: M) -> Self {
        FnField { c, m0, _marker: std::marker::PhantomData }
    }
}

impl<F, C, M> EnvField<F> for FnField<F, C, M>
where
    F: Scalar,
    C: Fn(Point<F>) -> F + Sync,
    M: Fn(Point<F>) -> F + Sync,
{
    fn c_at(&self, x: Point<F>) -> F {
        (self.c)(x)
    }
    fn m0_at(&self, x: Point<F>) -> F {
        (self.m0)(x)
    }
}

/// Truncated Gaussian mollification kernel, normalized to unit mass over its
/// support.
#[derive(Debug, Clone)]
pub struct Mollifier<F> {
    pub bandwidth: F,
    pub cutoff: F,
    norm: F,
    dim: usize,
}

/// Default support truncation radius, in bandwidths.
pub const MOLLIFIER_CUTOFF_FACTOR: f64 = 4.0;

impl<F: Scalar> Mollifier<F> {
    pub fn new(bandwidth: F, dim: usize) -> Self {
        Self::with_cutoff(bandwidth, F::lit(MOLLIFIER_CUTOFF_FACTOR) * bandwidth, dim)
    }

    pub fn with_cutoff(bandwidth: F, cutoff: F, dim: usize) -> Self {
        assert!(bandwidth > F::zero() && cutoff > F::zero() && (1..=3).contains(&dim));
        // Mass of the un-normalized Gaussian over the truncated support,
        // by radial Simpson quadrature.
        let delta = bandwidth.as_f64();
        let rmax = cutoff.as_f64();
        let surface = match dim {
            1 => 2.0,
            2 => std::f64::consts::TAU,
            _ => 4.0 * std::f64::consts::PI,
        };
        let n = 4096usize;
        let h = rmax / n as f64;
        let f = |r: f64| surface * r.powi(dim as i32 - 1) * (-r * r / (2.0 * delta * delta)).exp();
        let mut mass = f(0.0) + f(rmax);
        for k in 1..n {
            mass += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        mass *= h / 3.0;
        Mollifier { bandwidth, cutoff, norm: F::lit(1.0 / mass), dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Kernel value at displacement `x`; zero beyond the cutoff.
    #[inline]
    pub fn eval(&self, x: Point<F>) -> F {
        let r2 = vect::norm_sq(x);
        if r2 > self.cutoff * self.cutoff {
            F::zero()
        } else {
            let two = F::lit(2.0);
            self.norm * (-r2 / (two * self.bandwidth * self.bandwidth)).exp()
        }
    }
}

/// Mollified density of the active particles at `x`:
/// `(1/norm) * sum_{j active, j != exclude} K(x - X_j)`.
pub fn empirical_density<F: Scalar>(
    kernel: &Mollifier<F>,
    state: &SystemState<F>,
    x: Point<F>,
    norm: usize,
    exclude: Option<usize>,
) -> F {
    let mut sum = F::zero();
    for (j, p) in state.particles.iter().enumerate() {
        if Some(j) == exclude {
            continue;
        }
        if let Some(xj) = p.position {
            sum = sum + kernel.eval(vect::sub(x, xj));
        }
    }
    sum / F::from_usize(norm).unwrap()
}

/// Regular Cartesian grid carrying the concentration `c` and the reference
/// profile `m0` over a bounded box.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid<F> {
    dim: usize,
    lo: Point<F>,
    hi: Point<F>,
    nodes_per_axis: [usize; 3],
    spacing: [F; 3],
    pub c: Vec<F>,
    pub m0: Vec<F>,
    outside_c: F,
    outside_m0: F,
}

impl<F: Scalar> FieldGrid<F> {
    /// Grid with nodewise initial values from the given profiles. `outside_c`
    /// and `outside_m0` define the (undepleted) field beyond the box.
    pub fn from_fn(
        dim: usize,
        lo: Point<F>,
        hi: Point<F>,
        target_spacing: F,
        m0_fn: impl Fn(Point<F>) -> F,
        c0_fn: impl Fn(Point<F>) -> F,
        outside_c: F,
        outside_m0: F,
    ) -> Result<Self> {
        assert!((1..=3).contains(&dim));
        let mut nodes_per_axis = [1usize; 3];
        let mut spacing = [F::one(); 3];
        for axis in 0..dim {
            let extent = hi[axis] - lo[axis];
            if !(extent > F::zero()) {
                return Err(SimError::validation("box_lo", "box must have positive extent"));
            }
            let cells = (extent / target_spacing).as_f64().round().max(1.0) as usize;
            nodes_per_axis[axis] = cells + 1;
            spacing[axis] = extent / F::from_usize(cells).unwrap();
        }
        let total: usize = nodes_per_axis.iter().product();
        let mut grid = FieldGrid {
            dim,
            lo,
            hi,
            nodes_per_axis,
            spacing,
            c: vec![F::zero(); total],
            m0: vec![F::zero(); total],
            outside_c,
            outside_m0,
        };
        for idx in 0..total {
            let x = grid.node_pos(idx);
            let m0 = m0_fn(x);
            let c0 = c0_fn(x);
            if !(m0 > F::zero()) {
                return Err(SimError::validation("m0", "reference profile must be uniformly positive"));
            }
            if c0 < F::zero() || c0 > m0 {
                return Err(SimError::validation("c0", "initial field must satisfy 0 <= c0 <= m0"));
            }
            grid.m0[idx] = m0;
            grid.c[idx] = c0;
        }
        if outside_c < F::zero() || outside_c > outside_m0 || !(outside_m0 > F::zero()) {
            return Err(SimError::validation("c0", "outside values must satisfy 0 <= c <= m0"));
        }
        Ok(grid)
    }

    /// Grid with constant profiles `c = c0`, `m0 = m0_value` inside and out.
    pub fn uniform(
        dim: usize,
        lo: Point<F>,
        hi: Point<F>,
        target_spacing: F,
        m0_value: F,
        c0_value: F,
    ) -> Result<Self> {
        Self::from_fn(dim, lo, hi, target_spacing, |_| m0_value, |_| c0_value, c0_value, m0_value)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_count(&self) -> usize {
        self.c.len()
    }

    pub fn nodes_per_axis(&self) -> [usize; 3] {
        self.nodes_per_axis
    }

    /// Multi-index of a flat node index (axis 0 fastest).
    pub fn node_multi_index(&self, idx: usize) -> [usize; 3] {
        let nx = self.nodes_per_axis[0];
        let ny = self.nodes_per_axis[1];
        [idx % nx, (idx / nx) % ny, idx / (nx * ny)]
    }

    pub fn node_pos(&self, idx: usize) -> Point<F> {
        let mi = self.node_multi_index(idx);
        let mut x = vect::zero();
        for axis in 0..self.dim {
            x[axis] = self.lo[axis] + F::from_usize(mi[axis]).unwrap() * self.spacing[axis];
        }
        x
    }

    fn flat_index(&self, mi: [usize; 3]) -> usize {
        (mi[2] * self.nodes_per_axis[1] + mi[1]) * self.nodes_per_axis[0] + mi[0]
    }

    fn is_outside(&self, x: Point<F>) -> bool {
        (0..self.dim).any(|axis| x[axis] < self.lo[axis] || x[axis] > self.hi[axis])
    }

    fn cell_of(&self, x: Point<F>) -> ([usize; 3], [F; 3]) {
        let mut base = [0usize; 3];
        let mut frac = [F::zero(); 3];
        for axis in 0..self.dim {
            let t = (x[axis] - self.lo[axis]) / self.spacing[axis];
            let max_cell = self.nodes_per_axis[axis] - 2;
            let i0 = t.floor().as_f64().min(max_cell as f64).max(0.0) as usize;
            base[axis] = i0;
            frac[axis] = t - F::from_usize(i0).unwrap();
        }
        (base, frac)
    }

    /// Multilinear interpolation of nodal `values` at `x`, assuming `x` is
    /// inside the box.
    fn interpolate(&self, values: &[F], x: Point<F>) -> F {
        let (base, frac) = self.cell_of(x);
        let corners = 1usize << self.dim;
        let mut acc = F::zero();
        for corner in 0..corners {
            let mut mi = base;
            let mut w = F::one();
            for axis in 0..self.dim {
                if corner >> axis & 1 == 1 {
                    mi[axis] += 1;
                    w = w * frac[axis];
                } else {
                    w = w * (F::one() - frac[axis]);
                }
            }
            acc = acc + w * values[self.flat_index(mi)];
        }
        acc
    }

    pub fn min_m0(&self) -> F {
        self.m0.iter().copied().fold(self.outside_m0, F::min)
    }

    pub fn max_m0(&self) -> F {
        self.m0.iter().copied().fold(self.outside_m0, F::max)
    }

    /// Reaction product per node: `g = m0 - c`.
    pub fn gypsum(&self) -> Vec<F> {
        self.m0.iter().zip(&self.c).map(|(&m, &c)| m - c).collect()
    }
}

impl<F: Scalar> EnvField<F> for FieldGrid<F> {
    fn c_at(&self, x: Point<F>) -> F {
        if self.is_outside(x) {
            self.outside_c
        } else {
            self.interpolate(&self.c, x)
        }
    }

    fn m0_at(&self, x: Point<F>) -> F {
        if self.is_outside(x) {
            self.outside_m0
        } else {
            self.interpolate(&self.m0, x)
        }
    }
}

/// Advances the field one step: every node is multiplied by
/// `exp(-lambda * u(node) * dt)` with the density `u` frozen at the current
/// particle configuration. All active particles contribute; `m0` is
/// untouched.
pub fn field_step<F: Scalar>(
    grid: &mut FieldGrid<F>,
    kernel: &Mollifier<F>,
    state: &SystemState<F>,
    dt: F,
    lambda: F,
    norm: usize,
) {
    if lambda == F::zero() {
        return;
    }
    let active = state.active_positions();
    let inv_norm = F::one() / F::from_usize(norm).unwrap();
    let updated: Vec<F> = (0..grid.node_count())
        .into_par_iter()
        .map(|idx| {
            let x = grid.node_pos(idx);
            let mut u = F::zero();
            for &(_, xj) in &active {
                u = u + kernel.eval(vect::sub(x, xj));
            }
            u = u * inv_norm;
            grid.c[idx] * (-lambda * u * dt).exp()
        })
        .collect();
    grid.c = updated;
}
