//! Brownian meander densities.
//!
//! The endpoint of the standard meander on `[0, 1]` is Rayleigh distributed.
//! The pinned meander (meander conditioned to end at `a > 0`) is a Markov
//! process whose transition densities are those of the Brownian bridge to
//! `a`, reweighted by linear-boundary non-crossing probabilities.

use crate::error::{ensure, Result};
use crate::normal::{self, SQRT_2PI};

/// `y exp(-y^2 / 2)` for `y > 0`, zero otherwise.
pub fn meander_endpoint_density(y: f64) -> f64 {
    if y > 0.0 {
        y * (-0.5 * y * y).exp()
    } else {
        0.0
    }
}

/// `E exp(lambda W_1^+) = 1 + sqrt(2 pi) lambda e^{lambda^2/2} Phi(lambda)`.
pub fn meander_laplace(lambda: f64) -> f64 {
    if lambda < 0.0 {
        // sqrt(2 pi) e^{l^2/2} Phi(l) is the Mills ratio at -l
        1.0 + lambda * normal::mills_ratio(-lambda)
    } else {
        1.0 + SQRT_2PI * lambda * (0.5 * lambda * lambda).exp() * normal::cdf(lambda)
    }
}

/// Density at `z` of the Brownian bridge from `(s, y)` to `(1, a)`,
/// evaluated at time `t`.
fn pinned_bm_density(a: f64, s: f64, y: f64, t: f64, z: f64) -> f64 {
    let mean = y + (a - y) * (t - s) / (1.0 - s);
    let var = (t - s) * (1.0 - t) / (1.0 - s);
    let d = z - mean;
    (-d * d / (2.0 * var)).exp() / (SQRT_2PI * var.sqrt())
}

/// `1 - exp(-u)` for `u >= 0`.
#[inline]
fn one_minus_exp(u: f64) -> f64 {
    -(-u).exp_m1()
}

/// Transition density of the meander pinned at `a` at time 1.
///
/// From the origin (`s = 0`, `y = 0`, `0 < t < 1`):
/// `z / (t a) (1 - e^{-2 z a / (1-t)}) Pr(W^a_t in dz)`.
/// From `(s, y)` with `0 < s < t < 1`, `y > 0`:
/// `(1 - e^{-2zy/(t-s)})(1 - e^{-2za/(1-t)}) / (1 - e^{-2ay/(1-s)}) Pr(W^a_t in dz | W^a_s = y)`.
pub fn meander_transition_density(a: f64, s: f64, y: f64, t: f64, z: f64) -> Result<f64> {
    ensure(a > 0.0, || format!("pinning level must be positive, got {a}"))?;
    ensure(z > 0.0, || format!("meander density needs z > 0, got {z}"))?;
    ensure(t > 0.0 && t < 1.0, || format!("need 0 < t < 1, got {t}"))?;
    if s == 0.0 {
        ensure(y == 0.0, || format!("from s = 0 the meander starts at 0, got y = {y}"))?;
        let w = z / (t * a) * one_minus_exp(2.0 * z * a / (1.0 - t));
        return Ok(w * pinned_bm_density(a, 0.0, 0.0, t, z));
    }
    ensure(s > 0.0 && s < t, || format!("need 0 < s < t, got s = {s}, t = {t}"))?;
    ensure(y > 0.0, || format!("need y > 0, got {y}"))?;
    let num = one_minus_exp(2.0 * z * y / (t - s)) * one_minus_exp(2.0 * z * a / (1.0 - t));
    let den = one_minus_exp(2.0 * a * y / (1.0 - s));
    Ok(num / den * pinned_bm_density(a, s, y, t, z))
}
