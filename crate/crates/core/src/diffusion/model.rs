use std::cell::Cell;
use std::fmt;
use std::sync::Arc;

use crate::error::{ensure, Error, Result};
use crate::quadrature::{integrate, QuadOptions};

/// Shared real function.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };
    pub const POSITIVE: Interval = Interval { lo: 0.0, hi: f64::INFINITY };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        ensure(lo < hi && !lo.is_nan() && !hi.is_nan(), || {
            format!("empty interval ({lo}, {hi})")
        })?;
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, y: f64) -> bool {
        y > self.lo && y < self.hi
    }

    /// Points spread over the interval, `y0` included, used to probe
    /// coefficients for sign violations.
    fn probes(&self, y0: f64, count: usize) -> Vec<f64> {
        let mut out = vec![y0];
        for k in 1..=count {
            let frac = k as f64 / (count + 1) as f64;
            let up = if self.hi.is_finite() {
                y0 + (self.hi - y0) * frac
            } else {
                y0 + (2f64.powf(8.0 * frac) - 1.0) * (1.0 + y0.abs())
            };
            let down = if self.lo.is_finite() {
                y0 - (y0 - self.lo) * frac
            } else {
                y0 - (2f64.powf(8.0 * frac) - 1.0) * (1.0 + y0.abs())
            };
            out.push(up);
            out.push(down);
        }
        out
    }
}

/// Diffusion `dU = nu(U) ds + sigma(U) dW` on its diffusion interval.
#[derive(Clone)]
pub struct DiffusionModel {
    nu: RealFn,
    sigma: RealFn,
    sigma_prime: RealFn,
    interval: Interval,
}

impl DiffusionModel {
    pub fn new(nu: RealFn, sigma: RealFn, sigma_prime: RealFn, interval: Interval) -> Result<Self> {
        Interval::new(interval.lo, interval.hi)?;
        Ok(Self { nu, sigma, sigma_prime, interval })
    }

    pub fn nu(&self, y: f64) -> f64 {
        (self.nu)(y)
    }

    pub fn sigma(&self, y: f64) -> f64 {
        (self.sigma)(y)
    }

    pub fn sigma_prime(&self, y: f64) -> f64 {
        (self.sigma_prime)(y)
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }
}

impl fmt::Debug for DiffusionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffusionModel").field("interval", &self.interval).finish_non_exhaustive()
    }
}

/// Unit-diffusion process `dX = mu(X) ds + dW` obtained from a
/// [`DiffusionModel`] by `X = F(U)`, together with the antiderivative `G` of
/// `mu` (normalised so `G(F(y0)) = G(0) = 0`).
///
/// `constant_potential` is set when `mu' + mu^2` is known to be constant,
/// which lets the samplers skip per-path Girsanov integrals.
#[derive(Clone)]
pub struct TransformedModel {
    mu: RealFn,
    mu_prime: RealFn,
    antiderivative: RealFn,
    to_unit: RealFn,
    from_unit: RealFn,
    y0: f64,
    constant_potential: Option<f64>,
    label: String,
}

impl fmt::Debug for TransformedModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransformedModel")
            .field("label", &self.label)
            .field("y0", &self.y0)
            .field("constant_potential", &self.constant_potential)
            .finish_non_exhaustive()
    }
}

fn identity() -> RealFn {
    Arc::new(|y| y)
}

impl TransformedModel {
    /// Standard Brownian motion.
    pub fn brownian() -> Self {
        Self::constant_drift(0.0).with_label("bm")
    }

    /// Brownian motion with drift `c`.
    pub fn constant_drift(c: f64) -> Self {
        Self {
            mu: Arc::new(move |_| c),
            mu_prime: Arc::new(|_| 0.0),
            antiderivative: Arc::new(move |x| c * x),
            to_unit: identity(),
            from_unit: identity(),
            y0: 0.0,
            constant_potential: Some(c * c),
            label: format!("drift:{c}"),
        }
    }

    /// Ornstein–Uhlenbeck `dX = -theta X ds + dW`.
    pub fn ornstein_uhlenbeck(theta: f64) -> Self {
        Self {
            mu: Arc::new(move |x| -theta * x),
            mu_prime: Arc::new(move |_| -theta),
            antiderivative: Arc::new(move |x| -0.5 * theta * x * x),
            to_unit: identity(),
            from_unit: identity(),
            y0: 0.0,
            constant_potential: if theta == 0.0 { Some(0.0) } else { None },
            label: format!("ou:{theta}"),
        }
    }

    /// Unit-diffusion model given directly by its drift, drift derivative and
    /// drift antiderivative.
    pub fn from_unit_drift(mu: RealFn, mu_prime: RealFn, antiderivative: RealFn) -> Self {
        Self {
            mu,
            mu_prime,
            antiderivative,
            to_unit: identity(),
            from_unit: identity(),
            y0: 0.0,
            constant_potential: None,
            label: "custom".into(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn mu(&self, x: f64) -> f64 {
        (self.mu)(x)
    }

    pub fn mu_prime(&self, x: f64) -> f64 {
        (self.mu_prime)(x)
    }

    /// `G(x)`, the antiderivative of `mu`.
    pub fn drift_antiderivative(&self, x: f64) -> f64 {
        (self.antiderivative)(x)
    }

    /// `mu'(x) + mu(x)^2`, the integrand of the Girsanov path functional.
    pub fn girsanov_potential(&self, x: f64) -> f64 {
        if let Some(c) = self.constant_potential {
            return c;
        }
        let m = self.mu(x);
        self.mu_prime(x) + m * m
    }

    pub fn constant_potential(&self) -> Option<f64> {
        self.constant_potential
    }

    /// `F(y)`.
    pub fn transform(&self, y: f64) -> f64 {
        (self.to_unit)(y)
    }

    /// `F^{-1}(x)`.
    pub fn inverse_transform(&self, x: f64) -> f64 {
        (self.from_unit)(x)
    }

    pub fn reference_point(&self) -> f64 {
        self.y0
    }
}

const TRANSFORM_TOL: f64 = 1e-10;

fn quad_opts() -> QuadOptions {
    QuadOptions { abs_tol: TRANSFORM_TOL, rel_tol: 1e-13, max_panels: 2000 }
}

/// `F(y) = int_{y0}^{y} dz / sigma(z)`. Returns NaN if `sigma` is not
/// positive and finite at some quadrature node.
fn lamperti_integral(sigma: &RealFn, y0: f64, y: f64, bad_node: &Cell<bool>) -> f64 {
    integrate(
        |z| {
            let s = sigma(z);
            if s > 0.0 && s.is_finite() {
                1.0 / s
            } else {
                bad_node.set(true);
                f64::NAN
            }
        },
        y0,
        y,
        quad_opts(),
    )
    .value
}

/// Solves `F(y) = x` on the diffusion interval. `F` is strictly increasing
/// with derivative `1 / sigma`, so Newton steps are safeguarded by a
/// bracketing bisection.
fn invert_monotone(
    f: &dyn Fn(f64) -> f64,
    f_prime: &dyn Fn(f64) -> f64,
    x: f64,
    y0: f64,
    interval: Interval,
) -> f64 {
    if x == 0.0 {
        return y0;
    }
    // Bracket: walk away from y0 with doubling steps, approaching finite
    // interval ends geometrically.
    let (mut lo, mut hi) = (y0, y0);
    let mut step = 1.0_f64.max(y0.abs() * 0.1);
    for _ in 0..200 {
        if x > 0.0 {
            let cand = if interval.hi.is_finite() {
                hi + 0.5 * (interval.hi - hi)
            } else {
                hi + step
            };
            if f(cand) >= x {
                lo = hi;
                hi = cand;
                break;
            }
            hi = cand;
        } else {
            let cand = if interval.lo.is_finite() {
                lo - 0.5 * (lo - interval.lo)
            } else {
                lo - step
            };
            if f(cand) <= x {
                hi = lo;
                lo = cand;
                break;
            }
            lo = cand;
        }
        step *= 2.0;
    }
    let mut y = 0.5 * (lo + hi);
    for _ in 0..200 {
        let val = f(y) - x;
        if !val.is_finite() {
            return f64::NAN;
        }
        if val.abs() <= 1e-15 * (1.0 + x.abs()) {
            return y;
        }
        if val > 0.0 {
            hi = y;
        } else {
            lo = y;
        }
        let d = f_prime(y);
        let newton = y - val / d;
        y = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (hi - lo).abs() <= 1e-15 * (1.0 + y.abs()) {
            break;
        }
    }
    y
}

/// Lamperti transform of a diffusion to unit diffusion coefficient.
///
/// `F` is evaluated by adaptive quadrature of `1/sigma` from `y0`, `F^{-1}`
/// by safeguarded Newton iteration, `mu(F(y)) = nu(y)/sigma(y) - sigma'(y)/2`,
/// `mu'` by five-point central differences of `mu`, and
/// `G(x) = int_{y0}^{F^{-1}(x)} mu(F(y)) / sigma(y) dy`.
pub fn lamperti_transform(model: &DiffusionModel, y0: f64) -> Result<TransformedModel> {
    let interval = model.interval();
    ensure(interval.contains(y0), || {
        format!("reference point {y0} is outside the diffusion interval ({}, {})", interval.lo, interval.hi)
    })?;

    let bad_node = Cell::new(false);
    for p in interval.probes(y0, 16) {
        let s = model.sigma(p);
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::invalid(format!("sigma({p}) = {s} is not positive")));
        }
        let _ = lamperti_integral(&model.sigma, y0, p, &bad_node);
        if bad_node.get() {
            return Err(Error::invalid(format!(
                "sigma is not positive at a quadrature node between {y0} and {p}"
            )));
        }
    }

    let sigma = model.sigma.clone();
    let to_unit: RealFn = {
        let sigma = sigma.clone();
        Arc::new(move |y| {
            if !interval.contains(y) {
                return f64::NAN;
            }
            lamperti_integral(&sigma, y0, y, &Cell::new(false))
        })
    };
    let from_unit: RealFn = {
        let to_unit = to_unit.clone();
        let sigma = sigma.clone();
        Arc::new(move |x| {
            let f = |y: f64| to_unit(y);
            let fp = |y: f64| 1.0 / sigma(y);
            invert_monotone(&f, &fp, x, y0, interval)
        })
    };
    let drift_in_state = {
        let m = model.clone();
        move |y: f64| m.nu(y) / m.sigma(y) - 0.5 * m.sigma_prime(y)
    };
    let mu: RealFn = {
        let from_unit = from_unit.clone();
        let d = drift_in_state.clone();
        Arc::new(move |x| d(from_unit(x)))
    };
    let mu_prime: RealFn = {
        let mu = mu.clone();
        Arc::new(move |x| {
            let h = 1e-3 * x.abs().max(1.0);
            (-mu(x + 2.0 * h) + 8.0 * mu(x + h) - 8.0 * mu(x - h) + mu(x - 2.0 * h)) / (12.0 * h)
        })
    };
    let antiderivative: RealFn = {
        let from_unit = from_unit.clone();
        let m = model.clone();
        let d = drift_in_state;
        Arc::new(move |x| {
            let y = from_unit(x);
            integrate(|z| d(z) / m.sigma(z), y0, y, quad_opts()).value
        })
    };

    Ok(TransformedModel {
        mu,
        mu_prime,
        antiderivative,
        to_unit,
        from_unit,
        y0,
        constant_potential: None,
        label: "lamperti".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(c: f64) -> RealFn {
        Arc::new(move |_| c)
    }

    #[test]
    fn brownian_motion_is_a_fixed_point() {
        let m = DiffusionModel::new(constant(0.0), constant(1.0), constant(0.0), Interval::REAL_LINE)
            .unwrap();
        let tm = lamperti_transform(&m, 0.0).unwrap();
        for &y in &[-3.0, -0.5, 0.0, 0.7, 4.0] {
            assert!((tm.transform(y) - y).abs() < 1e-10);
            assert!(tm.mu(y).abs() < 1e-12);
            assert!(tm.drift_antiderivative(y).abs() < 1e-10);
        }
    }

    #[test]
    fn unit_sigma_keeps_the_drift() {
        let m = DiffusionModel::new(Arc::new(|y| -y), constant(1.0), constant(0.0), Interval::REAL_LINE)
            .unwrap();
        let tm = lamperti_transform(&m, 0.0).unwrap();
        for &y in &[-2.0, -0.3, 0.5, 1.5] {
            assert!((tm.mu(y) + y).abs() < 1e-9, "mu({y})");
            assert!((tm.drift_antiderivative(y) + 0.5 * y * y).abs() < 1e-9, "G({y})");
            assert!((tm.mu_prime(y) + 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn geometric_diffusion_becomes_log() {
        // nu = 0, sigma(y) = y on (0, inf): F = log, mu = -1/2
        let m = DiffusionModel::new(constant(0.0), Arc::new(|y| y), constant(1.0), Interval::POSITIVE)
            .unwrap();
        let tm = lamperti_transform(&m, 1.0).unwrap();
        for &y in &[0.05, 0.5, 1.0, 3.0, 40.0] {
            assert!((tm.transform(y) - y.ln()).abs() < 1e-9, "F({y})");
            let x = y.ln();
            assert!((tm.mu(x) + 0.5).abs() < 1e-9);
            assert!((tm.inverse_transform(x) - y).abs() < 1e-8 * y.max(1.0));
        }
        // pointwise drift identity mu(F(y)) = nu/sigma - sigma'/2
        for &y in &[0.2, 2.0, 7.0] {
            let lhs = tm.mu(tm.transform(y));
            assert!((lhs - (0.0 / y - 0.5)).abs() < 1e-9);
        }
    }

    #[test]
    fn inverse_round_trip_on_a_curved_sigma() {
        let m = DiffusionModel::new(
            Arc::new(|y: f64| 0.3 * y.sin()),
            Arc::new(|y: f64| 1.0 + 0.5 * y * y),
            Arc::new(|y: f64| y),
            Interval::REAL_LINE,
        )
        .unwrap();
        let tm = lamperti_transform(&m, 0.2).unwrap();
        assert_eq!(tm.transform(0.2), 0.0);
        let mut prev = f64::NEG_INFINITY;
        for k in -40..=40 {
            let y = 0.1 * k as f64;
            let x = tm.transform(y);
            assert!(x > prev, "F not increasing at {y}");
            prev = x;
            assert!((tm.inverse_transform(x) - y).abs() < 1e-8, "round trip at {y}");
        }
    }

    #[test]
    fn antiderivative_differentiates_to_drift() {
        let m = DiffusionModel::new(
            Arc::new(|y: f64| 1.0 - y),
            Arc::new(|y: f64| (1.0 + y * y).sqrt()),
            Arc::new(|y: f64| y / (1.0 + y * y).sqrt()),
            Interval::REAL_LINE,
        )
        .unwrap();
        let tm = lamperti_transform(&m, 0.0).unwrap();
        for &x in &[-1.0, 0.3, 1.2] {
            let h = 1e-4;
            let dg = (tm.drift_antiderivative(x + h) - tm.drift_antiderivative(x - h)) / (2.0 * h);
            assert!((dg - tm.mu(x)).abs() < 1e-6, "G' != mu at {x}");
        }
    }

    #[test]
    fn reference_point_outside_interval() {
        let m = DiffusionModel::new(constant(0.0), Arc::new(|y| y), constant(1.0), Interval::POSITIVE)
            .unwrap();
        assert!(matches!(lamperti_transform(&m, -1.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn non_positive_sigma_is_rejected() {
        let m = DiffusionModel::new(constant(0.0), Arc::new(|y: f64| y), constant(1.0), Interval::REAL_LINE)
            .unwrap();
        assert!(matches!(lamperti_transform(&m, 1.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn presets_have_consistent_potentials() {
        let ou = TransformedModel::ornstein_uhlenbeck(1.0);
        assert_eq!(ou.girsanov_potential(3.0), 8.0);
        let c = TransformedModel::constant_drift(0.7);
        assert!((c.girsanov_potential(-5.0) - 0.49).abs() < 1e-15);
        assert_eq!(TransformedModel::brownian().constant_potential(), Some(0.0));
    }
}
