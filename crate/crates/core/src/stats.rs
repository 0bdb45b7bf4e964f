//! Statistical test machinery used by the diagnostics: Kolmogorov-Smirnov
//! one- and two-sample tests with the Numerical Recipes p-value
//! approximation, and Wilson score intervals for attainment frequencies.

/// Result of a Kolmogorov-Smirnov test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsOutcome {
    pub statistic: f64,
    pub p_value: f64,
    /// Effective sample size used for the p-value.
    pub effective_n: f64,
}

impl KsOutcome {
    pub fn passes(&self, level: f64) -> bool {
        self.p_value > level
    }
}

/// Complement of the Kolmogorov-Smirnov CDF, `Q(z) = 1 - CDF(z)`, via the
/// two power series of Press et al.
fn complement_ks_cdf(z: f64) -> f64 {
    assert!(z >= 0.0, "KS statistic argument must be nonnegative");
    if z == 0.0 {
        1.0
    } else if z < 1.18 {
        let factor = (2.0 * std::f64::consts::PI).sqrt() / z;
        let term = (-std::f64::consts::PI * std::f64::consts::PI / 8.0 / (z * z)).exp();
        1.0 - factor * (term + term.powi(9) + term.powi(25) + term.powi(49))
    } else {
        let term = (-2.0 * z * z).exp();
        2.0 * (term - term.powi(4) + term.powi(9))
    }
}

fn ks_outcome(stat: f64, effective_n: f64) -> KsOutcome {
    let sqrt_n = effective_n.sqrt();
    let arg = (sqrt_n + 0.12 + 0.11 / sqrt_n) * stat;
    KsOutcome { statistic: stat, p_value: complement_ks_cdf(arg), effective_n }
}

/// One-sample KS test of `samples` against the reference CDF.
pub fn ks1_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> KsOutcome {
    assert!(!samples.is_empty());
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("samples must be comparable"));
    let n = sorted.len() as f64;
    let mut stat: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        stat = stat.max((f - i as f64 / n).abs()).max((f - (i + 1) as f64 / n).abs());
    }
    ks_outcome(stat, n)
}

/// Two-sample KS test.
pub fn ks2_test(a: &[f64], b: &[f64]) -> KsOutcome {
    assert!(!a.is_empty() && !b.is_empty());
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|u, v| u.partial_cmp(v).unwrap());
    ys.sort_by(|u, v| u.partial_cmp(v).unwrap());
    let (n1, n2) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut stat: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let (x, y) = (xs[i], ys[j]);
        if x <= y {
            i += 1;
        }
        if y <= x {
            j += 1;
        }
        stat = stat.max((i as f64 / n1 - j as f64 / n2).abs());
    }
    ks_outcome(stat, n1 * n2 / (n1 + n2))
}

/// CDF of the exponential law with the given rate.
pub fn exponential_cdf(rate: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| if x <= 0.0 { 0.0 } else { 1.0 - (-rate * x).exp() }
}

/// 95% Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    assert!(trials > 0);
    let z = 1.959963984540054_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}
