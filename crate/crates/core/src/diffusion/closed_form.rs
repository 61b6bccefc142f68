//! Closed-form densities and probabilities for Brownian motion.

use super::boundary::{check_daniels, daniels_value};
use crate::error::{ensure, Result};
use crate::normal::{self, SQRT_2PI};

/// Gaussian transition kernel `q(t, x, z) = (2 pi t)^{-1/2} exp(-(z-x)^2 / 2t)`.
pub fn bm_transition_density(t: f64, x: f64, z: f64) -> Result<f64> {
    ensure(t > 0.0, || format!("transition density needs t > 0, got {t}"))?;
    Ok(q(t, x, z))
}

#[inline]
pub(crate) fn q(t: f64, x: f64, z: f64) -> f64 {
    let d = z - x;
    (-d * d / (2.0 * t)).exp() / (SQRT_2PI * t.sqrt())
}

/// Probability that a Brownian bridge from `x` at time 0 to `z` at time `t`
/// stays below the line through `(0, g0)` and `(t, gt)`:
/// `1 - exp(-2 (g0 - x)(gt - z) / t)`.
pub fn linear_noncross_prob(x: f64, g0: f64, gt: f64, t: f64, z: f64) -> Result<f64> {
    ensure(g0 > x, || format!("start {x} must lie below the boundary {g0}"))?;
    ensure(t > 0.0, || format!("bridge horizon must be positive, got {t}"))?;
    ensure(z <= gt, || format!("end point {z} already exceeds the boundary {gt}"))?;
    Ok(-(-2.0 * (g0 - x) * (gt - z) / t).exp_m1())
}

/// `e^{-2ab} Phi(c)` without overflow when `ab` is very negative.
fn exp_times_cdf(log_factor: f64, c: f64) -> f64 {
    if c > -5.0 {
        log_factor.exp() * normal::cdf(c)
    } else {
        // Phi(c) = phi(c) * R(-c)
        (log_factor - 0.5 * c * c).exp() * normal::mills_ratio(-c) / SQRT_2PI
    }
}

/// Probability that standard Brownian motion started at 0 stays below
/// `a + b s` on `[0, horizon]`.
pub fn linear_survival(a: f64, b: f64, horizon: f64) -> Result<f64> {
    ensure(a > 0.0, || format!("boundary intercept must be positive, got {a}"))?;
    ensure(horizon > 0.0, || format!("horizon must be positive, got {horizon}"))?;
    let rt = horizon.sqrt();
    let first = normal::cdf((a + b * horizon) / rt);
    let second = exp_times_cdf(-2.0 * a * b, (b * horizon - a) / rt);
    Ok((first - second).clamp(0.0, 1.0))
}

/// First-passage density of standard Brownian motion over `a + b s`:
/// `a / (sqrt(2 pi) t^{3/2}) exp(-(a + b t)^2 / 2t)`.
pub fn linear_fpt_density(a: f64, b: f64, t: f64) -> Result<f64> {
    ensure(a > 0.0, || format!("boundary intercept must be positive, got {a}"))?;
    ensure(t > 0.0, || format!("time must be positive, got {t}"))?;
    Ok(linear_fpt_density_unchecked(a, b, t))
}

#[inline]
pub(crate) fn linear_fpt_density_unchecked(a: f64, b: f64, t: f64) -> f64 {
    a / t * q(t, 0.0, a + b * t)
}

/// Distribution function `P(tau <= t)` of the same first-passage time.
pub fn linear_fpt_cdf(a: f64, b: f64, t: f64) -> Result<f64> {
    if t <= 0.0 {
        ensure(a > 0.0, || format!("boundary intercept must be positive, got {a}"))?;
        return Ok(0.0);
    }
    Ok(1.0 - linear_survival(a, b, t)?)
}

/// Survival on `[0, 1]` and first-passage density at `t` for the boundary
/// `a + b s`. Other horizons follow from [`linear_survival`] or Brownian
/// scaling `(a, b, T) -> (a / sqrt(T), b sqrt(T), 1)`.
pub fn linear_boundary_closed_forms(a: f64, b: f64, t: f64) -> Result<(f64, f64)> {
    Ok((linear_survival(a, b, 1.0)?, linear_fpt_density(a, b, t)?))
}

/// Brownian rescaling of `a + b s` on `[0, T]` to the unit horizon.
pub fn rescale_linear_to_unit_horizon(a: f64, b: f64, horizon: f64) -> (f64, f64) {
    let r = horizon.sqrt();
    (a / r, b * r)
}

/// Kendall's identity for a constant level `y > x`:
/// `p_tau(t) = (y - x)/t * p(t, x, y)`.
pub fn kendall_fpt_density<P>(y: f64, x: f64, t: f64, transition_density: P) -> Result<f64>
where
    P: Fn(f64, f64, f64) -> f64,
{
    ensure(x < y, || format!("start {x} must lie below the level {y}"))?;
    ensure(t > 0.0, || format!("time must be positive, got {t}"))?;
    Ok((y - x) / t * transition_density(t, x, y))
}

/// Kendall's identity with the Gaussian kernel.
pub fn kendall_bm(y: f64, x: f64, t: f64) -> Result<f64> {
    kendall_fpt_density(y, x, t, q)
}

/// First-passage density of Brownian motion from 0 over the Daniels
/// boundary.
pub fn daniels_fpt_density(delta: f64, k1: f64, k2: f64, t: f64) -> Result<f64> {
    check_daniels(delta, k1, k2)?;
    ensure(t > 0.0, || format!("time must be positive, got {t}"))?;
    let g = daniels_value(delta, k1, k2, t);
    let a = g - 2.0 * delta;
    let b = g - 4.0 * delta;
    Ok((delta * k1 * (-a * a / (2.0 * t)).exp() + 2.0 * delta * k2 * (-b * b / (2.0 * t)).exp())
        / (SQRT_2PI * t * t.sqrt()))
}

/// Crossing-asymptotic coefficient `f(t, x)` for the Daniels boundary:
/// `(2/t) (delta k1 e^{-(2d - x)(2d + x - 2g)/2t} + 2 delta k2 e^{-(4d - x)(4d + x - 2g)/2t})`.
pub fn daniels_f(delta: f64, k1: f64, k2: f64, t: f64, x: f64) -> Result<f64> {
    check_daniels(delta, k1, k2)?;
    ensure(t > 0.0, || format!("time must be positive, got {t}"))?;
    let g = daniels_value(delta, k1, k2, t);
    let d2 = 2.0 * delta;
    let d4 = 4.0 * delta;
    let e1 = (-(d2 - x) * (d2 + x - 2.0 * g) / (2.0 * t)).exp();
    let e2 = (-(d4 - x) * (d4 + x - 2.0 * g) / (2.0 * t)).exp();
    Ok(2.0 / t * (delta * k1 * e1 + 2.0 * delta * k2 * e2))
}
