//! Adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Error estimates are the plain `|K15 - G7|` difference per panel, which is
//! conservative. Panels with the largest estimate are bisected until the
//! summed estimate meets the tolerance or the panel budget runs out.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 0.0, max_panels: 4000 }
    }
}

impl QuadOptions {
    pub fn abs(abs_tol: f64) -> Self {
        Self { abs_tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl QuadResult {
    /// Turns an unconverged result into a `Numerical` error.
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::numerical(format!(
                "quadrature did not reach tolerance (estimate {:e}, error {:e}, {} evaluations)",
                self.value, self.abs_error, self.evaluations
            )))
        }
    }
}

/// One G7/K15 panel on `[a, b]`.
#[derive(Debug, Clone, Copy)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    pub kronrod: f64,
    pub gauss: f64,
}

impl Panel {
    pub fn error(&self) -> f64 {
        (self.kronrod - self.gauss).abs()
    }
}

pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    Panel { a, b, kronrod: k * h, gauss: g * h }
}

/// The 15 Kronrod abscissae on `[a, b]` with their Kronrod and Gauss weights
/// (Gauss weight zero at Kronrod-only nodes).
pub fn gk15_nodes(a: f64, b: f64) -> [(f64, f64, f64); 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [(0.0, 0.0, 0.0); 15];
    for j in 0..7 {
        let dx = h * XGK[j];
        let wg = if j % 2 == 1 { WG[j / 2] * h } else { 0.0 };
        out[2 * j] = (c - dx, WGK[j] * h, wg);
        out[2 * j + 1] = (c + dx, WGK[j] * h, wg);
    }
    out[14] = (c, WGK[7] * h, WG[3] * h);
    out
}

/// Adaptive refinement of `[a, b]`; returns the final panels in ascending
/// order together with the total result.
pub fn adaptive_panels<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    opts: QuadOptions,
) -> (Vec<Panel>, QuadResult) {
    let mut panels = vec![gk15(f, a, b)];
    let mut evaluations = 15;
    let converged = loop {
        let total: f64 = panels.iter().map(|p| p.kronrod).sum();
        let err: f64 = panels.iter().map(Panel::error).sum();
        let tol = opts.abs_tol.max(opts.rel_tol * total.abs());
        if err <= tol {
            break true;
        }
        if panels.len() >= opts.max_panels || !err.is_finite() {
            break false;
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error().total_cmp(&y.1.error()))
            .expect("non-empty");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            // Interval no longer splittable in floating point.
            panels.push(p);
            break false;
        }
        panels.push(gk15(f, p.a, mid));
        panels.push(gk15(f, mid, p.b));
        evaluations += 30;
    };
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = crate::sum::compensated_sum(panels.iter().map(|p| p.kronrod));
    let abs_error = panels.iter().map(Panel::error).sum();
    (panels, QuadResult { value, abs_error, evaluations, converged })
}

/// Integral of `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, abs_error: 0.0, evaluations: 0, converged: true };
    }
    if b < a {
        let r = integrate(f, b, a, opts);
        return QuadResult { value: -r.value, ..r };
    }
    adaptive_panels(&f, a, b, opts).1
}

/// Integral of `f` over `[a, inf)` through the map `x = a + u / (1 - u)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, opts: QuadOptions) -> QuadResult {
    let g = |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let one_minus = 1.0 - u;
        let x = a + u / one_minus;
        let v = f(x) / (one_minus * one_minus);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    adaptive_panels(&g, 0.0, 1.0, opts).1
}

/// Integral of `f` over the whole real line, split at `centre`.
pub fn integrate_real_line<F: Fn(f64) -> f64>(f: F, centre: f64, opts: QuadOptions) -> QuadResult {
    let half = QuadOptions { abs_tol: 0.5 * opts.abs_tol, ..opts };
    let right = integrate_to_infinity(&f, centre, half);
    let left = integrate_to_infinity(|x| f(2.0 * centre - x), centre, half);
    QuadResult {
        value: left.value + right.value,
        abs_error: left.abs_error + right.abs_error,
        evaluations: left.evaluations + right.evaluations,
        converged: left.converged && right.converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_up_to_degree_22_are_exact_on_one_panel() {
        let p = gk15(&|x: f64| x.powi(22), -1.0, 1.0);
        assert!((p.kronrod - 2.0 / 23.0).abs() < 1e-15);
        // G7 is exact only to degree 13
        let p = gk15(&|x: f64| x.powi(12), 0.0, 1.0);
        assert!((p.gauss - 1.0 / 13.0).abs() < 1e-15);
    }

    #[test]
    fn nodes_reproduce_panel_sums() {
        let f = |x: f64| (3.0 * x).sin() + x * x;
        let p = gk15(&f, 0.2, 1.7);
        let nodes = gk15_nodes(0.2, 1.7);
        let k: f64 = nodes.iter().map(|&(x, w, _)| w * f(x)).sum();
        let g: f64 = nodes.iter().map(|&(x, _, w)| w * f(x)).sum();
        assert!((k - p.kronrod).abs() < 1e-14);
        assert!((g - p.gauss).abs() < 1e-14);
    }

    #[test]
    fn endpoint_singularity() {
        let r = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, QuadOptions::abs(1e-9));
        assert!(r.converged);
        assert!((r.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn gaussian_over_real_line() {
        let r = integrate_real_line(|x: f64| (-0.5 * x * x).exp(), 0.3, QuadOptions::abs(1e-12));
        assert!((r.value - crate::normal::SQRT_2PI).abs() < 1e-11);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let a = integrate(|x: f64| x.exp(), 0.0, 1.0, QuadOptions::default());
        let b = integrate(|x: f64| x.exp(), 1.0, 0.0, QuadOptions::default());
        assert_eq!(a.value, -b.value);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 0.0, max_panels: 3 };
        let r = integrate(|x: f64| (1.0 / x).sin(), 1e-4, 1.0, opts);
        assert!(!r.converged);
        assert!(r.require_converged().is_err());
    }
}
