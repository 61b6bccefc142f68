//! Standard normal density, distribution and tail functions.
//!
//! `cdf` and `sf` go through the complementary error function so both tails
//! keep full relative precision; `sf` is the one to use for large positive
//! arguments.

use std::f64::consts::FRAC_1_SQRT_2;

/// `sqrt(2 * pi)`.
pub const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// `Phi(x)`.
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// `1 - Phi(x)`.
pub fn sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Mills ratio `(1 - Phi(x)) / phi(x)` for `x >= 0`.
///
/// Direct ratio below 30, Laplace continued fraction above, where `phi`
/// underflows.
pub fn mills_ratio(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x < 30.0 {
        return sf(x) / pdf(x);
    }
    // x + 1/(x + 2/(x + 3/(x + ...))) evaluated bottom-up
    let mut tail = x;
    for k in (1..=60).rev() {
        tail = x + k as f64 / tail;
    }
    1.0 / tail
}

/// `e^{x^2/2} (1 - Phi(x))`, finite for all `x` where the result is
/// representable.
pub fn scaled_sf(x: f64) -> f64 {
    if x >= 0.0 {
        mills_ratio(x) / SQRT_2PI
    } else {
        (0.5 * x * x).exp() * sf(x)
    }
}

/// Inverse of `cdf` by Newton iteration from a rational starting guess.
pub fn quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    // Tukey-lambda style initial guess, then Halley steps
    let q = if p < 0.5 { p } else { 1.0 - p };
    let t = (-2.0 * q.ln()).sqrt();
    let mut x = -(t - (2.515517 + 0.802853 * t + 0.010328 * t * t)
        / (1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t));
    for _ in 0..4 {
        let e = cdf(x) - q;
        let d = pdf(x);
        if d == 0.0 {
            break;
        }
        let u = e / d;
        x -= u / (1.0 + 0.5 * x * u);
    }
    if p < 0.5 {
        x
    } else {
        -x
    }
}
