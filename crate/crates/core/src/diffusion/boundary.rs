use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::model::RealFn;
use crate::error::{ensure, Result};

/// Structural description of a boundary, used to pick closed forms and fast
/// paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryKind {
    Linear { a: f64, b: f64 },
    Daniels { delta: f64, k1: f64, k2: f64 },
    PiecewisePolynomial,
    Custom,
}

/// A twice-differentiable boundary `g` on `[0, horizon]`.
///
/// Derivatives fall back to five-point central differences with step
/// `1e-5 * max(1, |t|)` when no closed form is supplied. `k_plus` and
/// `k_minus` are one-sided Lipschitz constants: `-k_minus h <= g(t+h) - g(t)
/// <= k_plus h`.
#[derive(Clone)]
pub struct Boundary {
    g: RealFn,
    g_prime: Option<RealFn>,
    g_second: Option<RealFn>,
    horizon: f64,
    k_plus: f64,
    k_minus: f64,
    kind: BoundaryKind,
}

impl fmt::Debug for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Boundary")
            .field("kind", &self.kind)
            .field("horizon", &self.horizon)
            .field("k_plus", &self.k_plus)
            .field("k_minus", &self.k_minus)
            .finish_non_exhaustive()
    }
}

fn fd_step(t: f64) -> f64 {
    1e-5 * t.abs().max(1.0)
}

impl Boundary {
    /// Boundary from user closures. Missing derivatives are replaced by
    /// finite differences; the Lipschitz envelope is estimated from `g'` on
    /// a 2001-point grid.
    pub fn custom(
        g: RealFn,
        g_prime: Option<RealFn>,
        g_second: Option<RealFn>,
        horizon: f64,
    ) -> Result<Self> {
        Self::build(g, g_prime, g_second, horizon, BoundaryKind::Custom)
    }

    fn build(
        g: RealFn,
        g_prime: Option<RealFn>,
        g_second: Option<RealFn>,
        horizon: f64,
        kind: BoundaryKind,
    ) -> Result<Self> {
        ensure(horizon > 0.0 && horizon.is_finite(), || format!("horizon must be positive, got {horizon}"))?;
        let mut b = Self { g, g_prime, g_second, horizon, k_plus: 0.0, k_minus: 0.0, kind };
        let (kp, km) = b.estimate_lipschitz(2001);
        b.k_plus = kp;
        b.k_minus = km;
        Ok(b)
    }

    /// `g(t) = a + b t`.
    pub fn linear(a: f64, b: f64, horizon: f64) -> Result<Self> {
        ensure(a.is_finite() && b.is_finite(), || "linear boundary coefficients must be finite".into())?;
        ensure(horizon > 0.0 && horizon.is_finite(), || format!("horizon must be positive, got {horizon}"))?;
        Ok(Self {
            g: Arc::new(move |t| a + b * t),
            g_prime: Some(Arc::new(move |_| b)),
            g_second: Some(Arc::new(|_| 0.0)),
            horizon,
            k_plus: b.max(0.0),
            k_minus: (-b).max(0.0),
            kind: BoundaryKind::Linear { a, b },
        })
    }

    pub fn constant(level: f64, horizon: f64) -> Result<Self> {
        Self::linear(level, 0.0, horizon)
    }

    /// Piecewise polynomial boundary; see [`PiecewisePolynomial`].
    pub fn piecewise_polynomial(poly: PiecewisePolynomial, horizon: f64) -> Result<Self> {
        let p = Arc::new(poly);
        let (p0, p1, p2) = (p.clone(), p.clone(), p);
        Self::build(
            Arc::new(move |t| p0.eval(t, 0)),
            Some(Arc::new(move |t| p1.eval(t, 1))),
            Some(Arc::new(move |t| p2.eval(t, 2))),
            horizon,
            BoundaryKind::PiecewisePolynomial,
        )
    }

    /// `t -> scale * self(t)`.
    pub fn scaled(&self, scale: f64) -> Self {
        let g = self.g.clone();
        let gp = self.g_prime.clone();
        let gs = self.g_second.clone();
        let (k_plus, k_minus) = if scale >= 0.0 {
            (scale * self.k_plus, scale * self.k_minus)
        } else {
            (-scale * self.k_minus, -scale * self.k_plus)
        };
        let kind = match self.kind {
            BoundaryKind::Linear { a, b } => BoundaryKind::Linear { a: scale * a, b: scale * b },
            _ => BoundaryKind::Custom,
        };
        Self {
            g: Arc::new(move |t| scale * g(t)),
            g_prime: gp.map(|f| Arc::new(move |t| scale * f(t)) as RealFn),
            g_second: gs.map(|f| Arc::new(move |t| scale * f(t)) as RealFn),
            horizon: self.horizon,
            k_plus,
            k_minus,
            kind,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        (self.g)(t)
    }

    pub fn slope(&self, t: f64) -> f64 {
        match &self.g_prime {
            Some(f) => f(t),
            None => {
                let h = fd_step(t);
                let g = &self.g;
                (-g(t + 2.0 * h) + 8.0 * g(t + h) - 8.0 * g(t - h) + g(t - 2.0 * h)) / (12.0 * h)
            }
        }
    }

    pub fn curvature(&self, t: f64) -> f64 {
        match &self.g_second {
            Some(f) => f(t),
            None => {
                let h = fd_step(t);
                let g = &self.g;
                (-g(t + 2.0 * h) + 16.0 * g(t + h) - 30.0 * g(t) + 16.0 * g(t - h) - g(t - 2.0 * h))
                    / (12.0 * h * h)
            }
        }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn kind(&self) -> &BoundaryKind {
        &self.kind
    }

    /// True when `g'' = 0` identically.
    pub fn is_linear(&self) -> bool {
        matches!(self.kind, BoundaryKind::Linear { .. })
    }

    /// `(K+, K-)`.
    pub fn lipschitz(&self) -> (f64, f64) {
        (self.k_plus, self.k_minus)
    }

    pub fn values_on(&self, times: &[f64]) -> Vec<f64> {
        times.iter().map(|&t| self.value(t)).collect()
    }

    fn estimate_lipschitz(&self, n: usize) -> (f64, f64) {
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::INFINITY;
        for i in 0..n {
            let t = self.horizon * i as f64 / (n - 1) as f64;
            let s = self.slope(t);
            if s.is_finite() {
                hi = hi.max(s);
                lo = lo.min(s);
            }
        }
        (hi.max(0.0), (-lo).max(0.0))
    }
}

/// Daniels boundary
/// `g(s) = delta - s/(2 delta) log(k1/2 + sqrt(k1^2/4 + k2 exp(-4 delta^2 / s)))`,
/// with its `s -> 0` limit `delta`.
pub fn daniels_value(delta: f64, k1: f64, k2: f64, s: f64) -> f64 {
    if s < 1e-8 {
        return delta - s / (2.0 * delta) * k1.ln();
    }
    let e = (-4.0 * delta * delta / s).exp();
    let r = (0.25 * k1 * k1 + k2 * e).sqrt();
    delta - s / (2.0 * delta) * (0.5 * k1 + r).ln()
}

fn daniels_derivatives(delta: f64, k1: f64, k2: f64, s: f64) -> (f64, f64) {
    if s < 1e-8 {
        return (-k1.ln() / (2.0 * delta), 0.0);
    }
    let c = 4.0 * delta * delta;
    let e = (-c / s).exp();
    let e1 = e * c / (s * s);
    let e2 = e1 * c / (s * s) - 2.0 * e * c / (s * s * s);
    let r = (0.25 * k1 * k1 + k2 * e).sqrt();
    let r1 = k2 * e1 / (2.0 * r);
    let r2 = k2 * e2 / (2.0 * r) - k2 * e1 * r1 / (2.0 * r * r);
    let d = 0.5 * k1 + r;
    let l = d.ln();
    let l1 = r1 / d;
    let l2 = r2 / d - r1 * r1 / (d * d);
    let g1 = -(l + s * l1) / (2.0 * delta);
    let g2 = -(2.0 * l1 + s * l2) / (2.0 * delta);
    (g1, g2)
}

pub(crate) fn check_daniels(delta: f64, k1: f64, k2: f64) -> Result<()> {
    ensure(delta != 0.0 && delta.is_finite(), || "Daniels delta must be non-zero".into())?;
    ensure(k1 > 0.0 && k1.is_finite(), || format!("Daniels kappa1 must be positive, got {k1}"))?;
    ensure(k2.is_finite() && k1 * k1 + 4.0 * k2 > 0.0, || {
        format!("Daniels parameters need kappa1^2 + 4 kappa2 > 0, got {k1}, {k2}")
    })
}

/// Daniels boundary with closed-form first and second derivatives.
pub fn daniels_boundary(delta: f64, k1: f64, k2: f64, horizon: f64) -> Result<Boundary> {
    check_daniels(delta, k1, k2)?;
    Boundary::build(
        Arc::new(move |s| daniels_value(delta, k1, k2, s)),
        Some(Arc::new(move |s| daniels_derivatives(delta, k1, k2, s).0)),
        Some(Arc::new(move |s| daniels_derivatives(delta, k1, k2, s).1)),
        horizon,
        BoundaryKind::Daniels { delta, k1, k2 },
    )
}

/// Piecewise polynomial `g(t) = sum_j c_j (t - t0)^j` on each `[t0, t1]`.
/// Evaluation outside the covered range extends the nearest piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePolynomial {
    pub pieces: Vec<PolyPiece>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyPiece {
    pub start: f64,
    pub end: f64,
    pub coeffs: Vec<f64>,
}

impl PiecewisePolynomial {
    pub fn new(mut pieces: Vec<PolyPiece>) -> Result<Self> {
        ensure(!pieces.is_empty(), || "piecewise polynomial needs at least one piece".into())?;
        pieces.sort_by(|a, b| a.start.total_cmp(&b.start));
        for p in &pieces {
            ensure(p.start < p.end, || format!("piece [{}, {}] is empty", p.start, p.end))?;
            ensure(!p.coeffs.is_empty(), || "piece without coefficients".into())?;
        }
        for w in pieces.windows(2) {
            ensure((w[0].end - w[1].start).abs() < 1e-12, || {
                format!("pieces must be contiguous: gap between {} and {}", w[0].end, w[1].start)
            })?;
        }
        Ok(Self { pieces })
    }

    /// Parses a coefficient table: one piece per line, `start end c0 c1 ...`,
    /// whitespace or comma separated; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pieces = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let nums: std::result::Result<Vec<f64>, _> =
                line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).map(str::parse).collect();
            let nums = nums.map_err(|e| crate::Error::invalid(format!("line {}: {e}", lineno + 1)))?;
            ensure(nums.len() >= 3, || format!("line {}: expected start end c0 [c1 ...]", lineno + 1))?;
            pieces.push(PolyPiece { start: nums[0], end: nums[1], coeffs: nums[2..].to_vec() });
        }
        Self::new(pieces)
    }

    fn eval(&self, t: f64, derivative: u32) -> f64 {
        let idx = self.pieces.partition_point(|p| p.end < t).min(self.pieces.len() - 1);
        let p = &self.pieces[idx];
        let u = t - p.start;
        // Horner on the differentiated coefficients
        let mut acc = 0.0;
        for (j, &c) in p.coeffs.iter().enumerate().rev() {
            if (j as u32) < derivative {
                break;
            }
            let factor: f64 = ((j as u32 - derivative + 1)..=(j as u32)).map(f64::from).product();
            acc = acc * u + c * factor;
        }
        acc
    }
}
