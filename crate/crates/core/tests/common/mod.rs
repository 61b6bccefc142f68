#![allow(dead_code)]

use fptlab::normal;

/// Shift of a discretely monitored barrier that matches continuous
/// monitoring to first order: `beta sqrt(dt)`, `beta = -zeta(1/2)/sqrt(2 pi)`.
pub const BGK_BETA: f64 = 0.582_597_157_939_010_7;

pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Two-sided Kolmogorov–Smirnov distance of a sample from `cdf`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs()).max((f - (i + 1) as f64 / n).abs());
    }
    d
}

pub fn rayleigh_cdf(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else {
        -(-0.5 * y * y).exp_m1()
    }
}

/// `P(sup_{s<=t} W_s >= a)` for standard Brownian motion.
pub fn level_cdf(a: f64, t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        2.0 * normal::sf(a / t.sqrt())
    }
}

/// Allowance for a histogram bin `(lo, hi]` of first-passage times recorded
/// on a grid of step `dt`, for a crossing law `cdf(level, t)`: the
/// discrete-monitoring shift of the level plus the up-to-one-step delay of
/// the recorded time.
pub fn bin_mass_allowance(cdf: impl Fn(f64, f64) -> f64, level: f64, dt: f64, lo: f64, hi: f64) -> f64 {
    let shifted = level + BGK_BETA * dt.sqrt();
    let exact = cdf(level, hi) - cdf(level, lo);
    let monitored = cdf(shifted, hi) - cdf(shifted, lo);
    let delay = (cdf(level, hi) - cdf(level, hi - dt)).abs() + (cdf(level, lo) - cdf(level, (lo - dt).max(0.0))).abs();
    (exact - monitored).abs() + delay
}
