//! Verification of the model's provable properties at desk scale:
//! generator bounds along collision paths, drift estimates, attainment
//! statistics, and the hazard time-change law.

use rayon::prelude::*;

use crate::drift::{build_stencil, environmental_drift, BallStencil};
use crate::error::{Result, SimError};
use crate::field::FieldGrid;
use crate::lj::LJKernel;
use crate::params::ModelParams;
use crate::rng::{RandomStreams, StreamPurpose};
use crate::scalar::Scalar;
use crate::stats::{exponential_cdf, ks1_test, wilson_interval, KsOutcome};
use crate::vect::{self, Point};

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    /// Headline measured value (statistic, ratio, or bound).
    pub measured: f64,
    /// Tolerance or threshold the measurement was held against.
    pub tolerance: f64,
    pub sample_size: usize,
    /// Plain statement of the property under test.
    pub detail: String,
}

/// Collection of check outcomes.
#[derive(Debug, Clone, Default)]
pub struct DiagnosticsReport {
    pub checks: Vec<CheckResult>,
}

impl DiagnosticsReport {
    pub fn push(&mut self, check: CheckResult) {
        self.checks.push(check);
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn summary_lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "[{}] {}: measured {:.6e} vs tolerance {:.6e} (n = {}) - {}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.measured,
                    c.tolerance,
                    c.sample_size,
                    c.detail
                )
            })
            .collect()
    }
}

/// Generator of the particle system applied to the total interaction
/// potential `Phi = (1/n_tilde) sum_{i<j} V(x_i - x_j)`, evaluated at a
/// configuration:
/// `L Phi = -|grad Phi|^2 + (sigma^2/2) lap Phi + mu . grad Phi`,
/// with `mu_i` the environmental drift at `x_i` (zero when no field is
/// supplied, as for an undepleted environment).
pub fn lyapunov_probe<F: Scalar>(
    config: &[Point<F>],
    params: &ModelParams<F>,
    env: Option<(&BallStencil<F>, &FieldGrid<F>)>,
) -> Result<F> {
    let kernel = LJKernel::from_params(params);
    let n = config.len();
    let inv_nt = F::one() / F::from_usize(params.n_tilde).unwrap();
    let mut grad: Vec<Point<F>> = vec![vect::zero(); n];
    let mut lap = F::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = vect::sub(config[i], config[j]);
            // grad_i of V(x_i - x_j) is -F(d); grad_j is +F(d).
            let f = kernel.force(d)?;
            grad[i] = vect::sub(grad[i], vect::scale(f, inv_nt));
            grad[j] = vect::add(grad[j], vect::scale(f, inv_nt));
            lap = lap + F::lit(2.0) * inv_nt * kernel.laplacian(d, params.dim)?;
        }
    }
    let mut value = F::lit(0.5) * params.sigma * params.sigma * lap;
    for (i, g) in grad.iter().enumerate() {
        value = value - vect::norm_sq(*g);
        if let Some((stencil, grid)) = env {
            let mu = environmental_drift(stencil, grid, config[i], true);
            value = value + vect::dot(mu, *g);
        }
    }
    Ok(value)
}

/// Attainment statistics of one level.
#[derive(Debug, Clone)]
pub struct AttainmentStats<F> {
    pub epsilon: F,
    pub count: usize,
    pub frequency: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

/// Per-level fraction of runs whose minimal active pair distance ever
/// reached the level, with Wilson confidence intervals. Needs at least 30
/// independent runs.
pub fn collision_statistics<F: Scalar>(
    min_gaps: &[F],
    eps_levels: &[F],
) -> Result<Vec<AttainmentStats<F>>> {
    if min_gaps.len() < 30 {
        return Err(SimError::InsufficientSamples { got: min_gaps.len(), need: 30 });
    }
    let trials = min_gaps.len();
    Ok(eps_levels
        .iter()
        .map(|&eps| {
            let count = min_gaps.iter().filter(|&&g| g <= eps).count();
            let (lo, hi) = wilson_interval(count, trials);
            AttainmentStats {
                epsilon: eps,
                count,
                frequency: count as f64 / trials as f64,
                wilson_low: lo,
                wilson_high: hi,
            }
        })
        .collect())
}

/// One-sample KS test of the recorded hazards at death against the unit
/// exponential law. Needs at least 1000 deaths.
pub fn hazard_timechange_test<F: Scalar>(hazards_at_death: &[F]) -> Result<KsOutcome> {
    if hazards_at_death.len() < 1000 {
        return Err(SimError::InsufficientSamples { got: hazards_at_death.len(), need: 1000 });
    }
    let xs: Vec<f64> = hazards_at_death.iter().map(|h| h.as_f64()).collect();
    Ok(ks1_test(&xs, exponential_cdf(1.0)))
}

/// Configuration of the environmental-drift estimate suite.
#[derive(Debug, Clone)]
pub struct DriftSuiteConfig<F> {
    pub dim: usize,
    pub r_ball: F,
    /// Quadrature resolution for the bound and field-Lipschitz estimates.
    pub resolution: usize,
    /// Base resolution for the spatial-Lipschitz stability check (doubled
    /// internally).
    pub space_resolution: usize,
    pub samples: usize,
    pub m0_value: F,
    pub seed: u64,
}

impl<F: Scalar> Default for DriftSuiteConfig<F> {
    fn default() -> Self {
        DriftSuiteConfig {
            dim: 2,
            r_ball: F::one(),
            resolution: 200,
            space_resolution: 64,
            samples: 1000,
            m0_value: F::one(),
            seed: 20_240_601,
        }
    }
}

fn random_field<F: Scalar>(
    template: &FieldGrid<F>,
    streams: &RandomStreams,
    sample: usize,
    m0_value: F,
) -> FieldGrid<F> {
    let mut grid = template.clone();
    for idx in 0..grid.node_count() {
        let u: F = streams.uniform(sample, StreamPurpose::Init, idx as u64, 0);
        grid.c[idx] = u * m0_value;
    }
    grid
}

fn random_point<F: Scalar>(streams: &RandomStreams, sample: usize, tag: u64, dim: usize) -> Point<F> {
    let mut x = vect::zero();
    for axis in 0..dim {
        let u: F = streams.uniform(sample, StreamPurpose::Accept, tag, axis as u64);
        x[axis] = F::lit(2.0) * u - F::one();
    }
    x
}

/// Runs the three estimates on the environmental drift: the uniform bound by
/// the ball volume, Lipschitz continuity in the field with constant
/// `|B_R| / min m0`, and bounded, resolution-stable difference quotients in
/// space.
pub fn drift_estimate_suite<F: Scalar>(cfg: &DriftSuiteConfig<F>) -> Result<DiagnosticsReport> {
    let streams = RandomStreams::new(cfg.seed);
    let stencil = build_stencil(cfg.r_ball, cfg.resolution, cfg.dim)?;
    let volume = stencil.total_weight().as_f64();
    let mut lo = vect::zero();
    let mut hi = vect::zero();
    for axis in 0..cfg.dim {
        lo[axis] = F::lit(-2.0);
        hi[axis] = F::lit(2.0);
    }
    let template = FieldGrid::uniform(cfg.dim, lo, hi, F::lit(0.1), cfg.m0_value, cfg.m0_value)?;
    let mut report = DiagnosticsReport::default();

    // Vanishing integrand: an undepleted field gives exactly zero drift.
    let zero_norm = (0..20)
        .map(|s| {
            let x = random_point::<F>(&streams, s, 0, cfg.dim);
            vect::norm(environmental_drift(&stencil, &template, x, true)).as_f64()
        })
        .fold(0.0, f64::max);
    report.push(CheckResult {
        name: "drift_vanishes_undepleted".into(),
        pass: zero_norm == 0.0,
        measured: zero_norm,
        tolerance: 0.0,
        sample_size: 20,
        detail: "c = m0 everywhere forces G = 0 exactly".into(),
    });

    // Uniform bound by the ball volume.
    let max_norm = (0..cfg.samples)
        .into_par_iter()
        .map(|s| {
            let field = random_field(&template, &streams, s, cfg.m0_value);
            let x = random_point::<F>(&streams, s, 1, cfg.dim);
            vect::norm(environmental_drift(&stencil, &field, x, true)).as_f64()
        })
        .reduce(|| 0.0, f64::max);
    let bound_tol = volume + 1e-3;
    report.push(CheckResult {
        name: "drift_uniform_bound".into(),
        pass: max_norm <= bound_tol,
        measured: max_norm,
        tolerance: bound_tol,
        sample_size: cfg.samples,
        detail: "max |G| over admissible fields bounded by the ball volume".into(),
    });

    // Lipschitz continuity in the field, constant |B_R| / min m0.
    let min_m0 = template.min_m0().as_f64();
    let max_ratio = (0..cfg.samples)
        .into_par_iter()
        .map(|s| {
            let va = random_field(&template, &streams, s, cfg.m0_value);
            let mut vb = random_field(&template, &streams, s + cfg.samples, cfg.m0_value);
            let x = random_point::<F>(&streams, s, 2, cfg.dim);
            let ga = environmental_drift(&stencil, &va, x, true);
            let gb = environmental_drift(&stencil, &vb, x, true);
            let diff = va
                .c
                .iter()
                .zip(&vb.c)
                .map(|(a, b)| (*a - *b).abs().as_f64())
                .fold(0.0, f64::max);
            vb.c.clear();
            if diff > 0.0 {
                vect::dist(ga, gb).as_f64() / diff
            } else {
                0.0
            }
        })
        .reduce(|| 0.0, f64::max);
    let lip_tol = volume / min_m0 + 1e-3;
    report.push(CheckResult {
        name: "drift_field_lipschitz".into(),
        pass: max_ratio <= lip_tol,
        measured: max_ratio,
        tolerance: lip_tol,
        sample_size: cfg.samples,
        detail: "|G[v] - G[v']| / max|v - v'| bounded by ball volume over min m0".into(),
    });

    // Spatial difference quotients: bounded by a (d, R)-dependent constant
    // and stable under doubling the quadrature resolution. Nodal random
    // fields are piecewise multilinear, so their difference quotients carry
    // an extra factor from the grid spacing; the generous fixed bound below
    // covers it.
    let space_bound = 40.0 * cfg.r_ball.as_f64().max(1.0);
    let mut space_ratios = [0.0f64; 2];
    for (slot, res) in [(0usize, cfg.space_resolution), (1, cfg.space_resolution * 2)] {
        let st = build_stencil(cfg.r_ball, res, cfg.dim)?;
        space_ratios[slot] = (0..cfg.samples)
            .into_par_iter()
            .map(|s| {
                let field = random_field(&template, &streams, s, cfg.m0_value);
                let x = random_point::<F>(&streams, s, 3, cfg.dim);
                let mut y = random_point::<F>(&streams, s, 4, cfg.dim);
                // Keep the pair separated so quadrature noise does not
                // dominate the quotient.
                let gap = vect::dist(x, y).as_f64();
                if gap < 0.1 {
                    y[0] = y[0] + F::lit(0.25);
                }
                let gx = environmental_drift(&st, &field, x, true);
                let gy = environmental_drift(&st, &field, y, true);
                (vect::dist(gx, gy) / vect::dist(x, y)).as_f64()
            })
            .reduce(|| 0.0, f64::max);
    }
    let stable = (space_ratios[1] - space_ratios[0]).abs() <= 0.25 * space_ratios[0].max(1.0);
    report.push(CheckResult {
        name: "drift_space_lipschitz".into(),
        pass: space_ratios[0] <= space_bound && space_ratios[1] <= space_bound && stable,
        measured: space_ratios[1],
        tolerance: space_bound,
        sample_size: cfg.samples,
        detail: format!(
            "difference quotients bounded and resolution-stable ({:.4} at base, {:.4} doubled)",
            space_ratios[0], space_ratios[1]
        ),
    });

    Ok(report)
}
