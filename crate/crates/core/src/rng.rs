//! Counter-based random streams.
//!
//! Every variate is a pure function of `(master seed, particle, purpose,
//! step, draw index)`, so the simulation output is bit-identical no matter
//! how the work is split across threads, and a run can be resumed mid-stream
//! by re-deriving the same counters. Mixing is a splitmix64 chain, which is
//! more than enough statistical quality for Monte Carlo use.

use crate::scalar::Scalar;

/// What a stream is consumed for. Streams with different purposes are
/// independent even for the same particle and step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    /// Gaussian increments of the driving Brownian motions.
    Brownian,
    /// Unit-exponential killing clocks.
    Clock,
    /// Initial condition sampling.
    Init,
    /// Per-step acceptance draws of the cross-validation killing mechanism.
    Accept,
}

impl StreamPurpose {
    fn tag(self) -> u64 {
        match self {
            StreamPurpose::Brownian => 0x42524f574e49414e, // "BROWNIAN"
            StreamPurpose::Clock => 0x434c4f434b5f5f5f,    // "CLOCK___"
            StreamPurpose::Init => 0x494e49545f5f5f5f,     // "INIT____"
            StreamPurpose::Accept => 0x41434350545f5f5f,   // "ACCPT___"
        }
    }
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Stateless generator of independent per-(particle, purpose, step) streams.
#[derive(Debug, Clone, Copy)]
pub struct RandomStreams {
    master_seed: u64,
}

impl RandomStreams {
    pub fn new(master_seed: u64) -> Self {
        RandomStreams { master_seed }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    #[inline]
    fn bits(&self, particle: usize, purpose: StreamPurpose, step: u64, draw: u64) -> u64 {
        let mut z = splitmix64(self.master_seed);
        z = splitmix64(z ^ (particle as u64));
        z = splitmix64(z ^ purpose.tag());
        z = splitmix64(z ^ step);
        splitmix64(z ^ draw)
    }

    /// Uniform variate in `[0, 1)`.
    #[inline]
    pub fn uniform<F: Scalar>(&self, particle: usize, purpose: StreamPurpose, step: u64, draw: u64) -> F {
        let u = (self.bits(particle, purpose, step, draw) >> 11) as f64 * 1.1102230246251565e-16; // 2^-53
        F::lit(u)
    }

    /// Standard Gaussian variate via the Box-Muller cosine branch. Draw `k`
    /// consumes uniforms `2k` and `2k + 1`, so distinct `k` never overlap.
    #[inline]
    pub fn normal<F: Scalar>(&self, particle: usize, purpose: StreamPurpose, step: u64, draw: u64) -> F {
        // Shift into (0, 1] so the logarithm is finite.
        let u1 = ((self.bits(particle, purpose, step, 2 * draw) >> 11) as f64 + 1.0) * 1.1102230246251565e-16;
        let u2 = (self.bits(particle, purpose, step, 2 * draw + 1) >> 11) as f64 * 1.1102230246251565e-16;
        let mag = (-2.0 * u1.ln()).sqrt();
        F::lit(mag * (2.0 * std::f64::consts::PI * u2).cos())
    }

    /// Unit-exponential variate by inverse CDF.
    #[inline]
    pub fn exponential<F: Scalar>(&self, particle: usize, purpose: StreamPurpose, step: u64, draw: u64) -> F {
        let u = (self.bits(particle, purpose, step, draw) >> 11) as f64 * 1.1102230246251565e-16;
        F::lit(-(1.0 - u).ln())
    }
}

/// One unit-exponential killing clock per particle, reproducible from the
/// master seed alone.
pub fn draw_clocks<F: Scalar>(streams: &RandomStreams, n: usize) -> Vec<F> {
    (0..n).map(|i| streams.exponential(i, StreamPurpose::Clock, 0, 0)).collect()
}
