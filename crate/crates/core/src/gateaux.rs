//! Directional (Gâteaux) derivative of the boundary non-crossing probability
//! on `[0, 1]`:
//!
//! ```text
//! D_h = lim (P(g + eps h) - P(g)) / eps
//!     = sqrt(2/pi) int_0^1 h(1-u) / sqrt(u) Pr(1 - tau in du)
//!       E exp{ G(g(1) - sqrt(u) W+_1) - G(g(1-u)) + sqrt(u) W+_1 g'(1) + Nbar_u }
//! ```
//!
//! where `W+` is a Brownian meander on `[0, 1]` and, with `s = 1 - u + u r`,
//!
//! ```text
//! Nbar_u = -u/2 int_0^1 (mu' + mu^2)(g(s) - sqrt(u) W+_r) dr
//!          - u^{3/2} int_0^1 g''(s) W+_r dr - u/2 int_0^1 g'(s)^2 dr.
//! ```
//!
//! One meander sample set is shared by every `u` through Brownian scaling.
//! The `u`-integral runs either over Gauss–Kronrod nodes placed for a
//! closed-form law of `tau`, or over sampled crossing times.

use std::sync::Arc;

use serde::Serialize;

use crate::diffusion::{
    check_growth_condition, linear_fpt_cdf, linear_fpt_density_unchecked, meander_laplace, Boundary,
    TransformedModel,
};
use crate::error::{ensure, Error, Result};
use crate::fpt::{empirical_density, DensityMethod, FptDistribution, FptSource};
use crate::normal::{self, SQRT_2PI};
use crate::quadrature::{adaptive_panels, gk15_nodes, integrate, QuadOptions, QuadResult};
use crate::sim::{draw_meander_endpoint, map_paths, meander_path, path_rng, PathGrid};
use crate::sum::{compensated_sum, KahanSum};

const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;
const CHUNK: usize = 4096;

#[derive(Debug, Clone, Serialize)]
pub struct GateauxResult {
    pub value: f64,
    /// Total Monte-Carlo standard error (meander and, for sampled crossing
    /// times, the crossing-time sampling error).
    pub mc_stderr: f64,
    pub meander_stderr: f64,
    pub fpt_stderr: f64,
    /// `|Kronrod - Gauss|` over the quadrature panels; zero for sampled
    /// crossing times.
    pub quadrature_error: f64,
    /// Crossing times with `1 - tau < t_min_truncation` are dropped.
    pub t_min_truncation: f64,
    pub truncation_bound: f64,
    pub n_meander: usize,
    pub excluded: usize,
    pub nodes: usize,
    pub seed: u64,
    pub warnings: Vec<String>,
}

impl GateauxResult {
    /// `3 mc_stderr + quadrature_error + truncation_bound`.
    pub fn tolerance(&self) -> f64 {
        3.0 * self.mc_stderr + self.quadrature_error + self.truncation_bound
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GateauxOptions {
    pub t_min: f64,
    /// Tolerance for placing quadrature panels under a closed-form law.
    pub quad_tol: f64,
    pub max_excluded_fraction: f64,
    /// Range scanned for the growth-condition warning.
    pub growth_scan: (f64, f64),
}

impl Default for GateauxOptions {
    fn default() -> Self {
        Self { t_min: 1e-4, quad_tol: 1e-4, max_excluded_fraction: 1e-3, growth_scan: (-10.0, 10.0) }
    }
}

/// Gâteaux derivative of the non-crossing probability of `g` on `[0, 1]`
/// in direction `h`, for the unit-diffusion model started at 0. `fpt` is the
/// law of the first crossing of `g` on `[0, 1]`; `grid` is the meander grid
/// on `[0, 1]`.
#[allow(clippy::too_many_arguments)]
pub fn gateaux_derivative(
    tm: &TransformedModel,
    g: &Boundary,
    h: &Boundary,
    fpt: &FptDistribution,
    n_meander: usize,
    grid: &PathGrid,
    t_min: f64,
    seed: u64,
) -> Result<GateauxResult> {
    let opts = GateauxOptions { t_min, ..GateauxOptions::default() };
    gateaux_derivative_with(tm, g, h, fpt, n_meander, grid, seed, opts)
}

struct Node {
    u: f64,
    /// Weight without `h`: Kronrod and Gauss rules.
    base_k: f64,
    base_g: f64,
    /// Number of crossing samples at this node (sampled law only).
    multiplicity: usize,
}

#[allow(clippy::too_many_arguments)]
pub fn gateaux_derivative_with(
    tm: &TransformedModel,
    g: &Boundary,
    h: &Boundary,
    fpt: &FptDistribution,
    n_meander: usize,
    grid: &PathGrid,
    seed: u64,
    opts: GateauxOptions,
) -> Result<GateauxResult> {
    let t_min = opts.t_min;
    ensure((0.0..1.0).contains(&t_min), || format!("t_min must lie in [0, 1), got {t_min}"))?;
    ensure(n_meander >= 2, || format!("need at least 2 meander paths, got {n_meander}"))?;
    ensure((grid.t_end() - 1.0).abs() < 1e-12, || format!("meander grid must end at 1, got {}", grid.t_end()))?;
    ensure((fpt.horizon() - 1.0).abs() < 1e-12, || format!("crossing law must be on [0, 1], got horizon {}", fpt.horizon()))?;
    ensure(g.horizon() >= 1.0 && h.horizon() >= 1.0, || "boundaries must be defined on [0, 1]".into())?;
    ensure(g.value(0.0) > 0.0, || format!("start 0 must lie below g(0) = {}", g.value(0.0)))?;

    let mut warnings = Vec::new();
    let (lo, hi) = opts.growth_scan;
    let diag = check_growth_condition(tm, 1.0, lo, hi, 401)?;
    if !diag.passes_gateaux {
        warnings.push(format!(
            "growth condition not met on [{lo}, {hi}]: sup Q(y)/y^2 = {} exceeds 1",
            diag.limsup_ratio
        ));
    }

    let (nodes, sampled) = match fpt.source() {
        FptSource::ClosedForm { density, .. } => (closed_form_nodes(density.as_ref(), t_min, opts.quad_tol)?, false),
        FptSource::Empirical => (sampled_nodes(fpt, t_min)?, true),
    };

    let coef_k: Vec<f64> = nodes.iter().map(|n| h.value(1.0 - n.u) * n.base_k).collect();
    let coef_g: Vec<f64> = nodes.iter().map(|n| h.value(1.0 - n.u) * n.base_g).collect();

    let us: Vec<f64> = nodes.iter().map(|n| n.u).collect();
    let mc = meander_expectations(tm, g, &us, &coef_k, &coef_g, grid, n_meander, seed, opts.max_excluded_fraction)?;

    let value = mc.mean_k;
    let quadrature_error = if sampled { 0.0 } else { (mc.mean_k - mc.mean_g).abs() };

    let fpt_stderr = if sampled {
        // Each crossing sample contributes sqrt(2/pi) h(1-u)/sqrt(u) E(u); the
        // others (censored, truncated) contribute zero.
        let total = fpt.total() as f64;
        let mut s = KahanSum::default();
        let mut s2 = KahanSum::default();
        for (k, n) in nodes.iter().enumerate() {
            let z = coef_k[k] / n.base_k * SQRT_2_OVER_PI / n.u.sqrt() * mc.node_means[k];
            let m = n.multiplicity as f64;
            s.add(m * z);
            s2.add(m * z * z);
        }
        let mean = s.value() / total;
        let var = (s2.value() / total - mean * mean).max(0.0) * total / (total - 1.0).max(1.0);
        (var / total).sqrt()
    } else {
        0.0
    };

    let truncation_bound = truncation_bound(fpt, h, &nodes, &mc.node_means, t_min)?;
    let mc_stderr = (mc.stderr_k * mc.stderr_k + fpt_stderr * fpt_stderr).sqrt();
    Ok(GateauxResult {
        value,
        mc_stderr,
        meander_stderr: mc.stderr_k,
        fpt_stderr,
        quadrature_error,
        t_min_truncation: t_min,
        truncation_bound,
        n_meander: mc.used,
        excluded: mc.excluded,
        nodes: nodes.len(),
        seed,
        warnings,
    })
}

/// Nodes in `v = sqrt(u)` on `[sqrt(t_min), 1]`, where the integrand
/// `2 h(1 - v^2) p_tau(1 - v^2) E(v^2)` has no endpoint singularity. Panels
/// are refined on the `h`-free weight `2 p_tau(1 - v^2)`.
fn closed_form_nodes(density: &(dyn Fn(f64) -> f64 + Send + Sync), t_min: f64, tol: f64) -> Result<Vec<Node>> {
    let weight = |v: f64| {
        let tau = (1.0 - v) * (1.0 + v);
        if tau <= 0.0 {
            return 0.0;
        }
        let d = density(tau);
        if d.is_finite() {
            2.0 * d
        } else {
            0.0
        }
    };
    let opts = QuadOptions { abs_tol: 0.1 * tol, rel_tol: 1e-6, max_panels: 2000 };
    let (panels, res) = adaptive_panels(&weight, t_min.sqrt(), 1.0, opts);
    res.require_converged()?;
    let mut nodes = Vec::with_capacity(15 * panels.len());
    for p in &panels {
        for (v, wk, wg) in gk15_nodes(p.a, p.b) {
            let w = weight(v);
            nodes.push(Node { u: v * v, base_k: SQRT_2_OVER_PI * w * wk, base_g: SQRT_2_OVER_PI * w * wg, multiplicity: 0 });
        }
    }
    Ok(nodes)
}

/// One node per distinct `u = 1 - tau >= t_min`, weighted by its share of
/// all paths.
fn sampled_nodes(fpt: &FptDistribution, t_min: f64) -> Result<Vec<Node>> {
    let total = fpt.total();
    ensure(total > 0, || "crossing law has no paths".into())?;
    let mut us: Vec<f64> = fpt.samples().iter().map(|&t| 1.0 - t).filter(|&u| u >= t_min && u > 0.0).collect();
    if us.is_empty() {
        return Err(Error::numerical(format!("no crossing times remain after truncation at t_min = {t_min}")));
    }
    us.sort_by(f64::total_cmp);
    let mut nodes: Vec<Node> = Vec::new();
    for u in us {
        match nodes.last_mut() {
            Some(last) if last.u == u => last.multiplicity += 1,
            _ => nodes.push(Node { u, base_k: 0.0, base_g: 0.0, multiplicity: 1 }),
        }
    }
    for n in &mut nodes {
        n.base_k = SQRT_2_OVER_PI / n.u.sqrt() * n.multiplicity as f64 / total as f64;
        n.base_g = n.base_k;
    }
    Ok(nodes)
}

struct MeanderSums {
    node_means: Vec<f64>,
    mean_k: f64,
    mean_g: f64,
    stderr_k: f64,
    used: usize,
    excluded: usize,
}

/// Path-independent pieces of the exponent for one node.
struct NodeTerms {
    sqrt_u: f64,
    /// `g(1 - u + u r_i)` on the meander grid.
    g_path: Vec<f64>,
    /// `u^{3/2} g''(1 - u + u r_i)` times trapezoid weights.
    curvature: Vec<f64>,
    /// `-G(g(1 - u)) - u/2 int g'^2`.
    constant: f64,
    /// `u/2` times trapezoid weights is `half_u * tw[i]`.
    half_u: f64,
}

#[allow(clippy::too_many_arguments)]
fn meander_expectations(
    tm: &TransformedModel,
    g: &Boundary,
    us: &[f64],
    coef_k: &[f64],
    coef_g: &[f64],
    grid: &PathGrid,
    n: usize,
    seed: u64,
    max_excluded_fraction: f64,
) -> Result<MeanderSums> {
    let g1 = g.value(1.0);
    let gp1 = g.slope(1.0);
    let potential = tm.constant_potential();
    let antideriv = |x: f64| tm.drift_antiderivative(x);

    let linear_slope = match g.kind() {
        crate::diffusion::BoundaryKind::Linear { b, .. } => Some(*b),
        _ => None,
    };

    // Endpoint-only evaluation: constant potential and g'' = 0.
    let fast = match (potential, linear_slope) {
        (Some(c), Some(b)) => Some((c, b)),
        _ => None,
    };

    let times = grid.times();
    let m = times.len() - 1;
    let mut tw = vec![0.0; m + 1];
    for i in 0..m {
        let d = 0.5 * (times[i + 1] - times[i]);
        tw[i] += d;
        tw[i + 1] += d;
    }

    let terms: Vec<NodeTerms> = if fast.is_some() {
        Vec::new()
    } else {
        us.iter()
            .map(|&u| {
                let s: Vec<f64> = times.iter().map(|&r| 1.0 - u + u * r).collect();
                let g_path = s.iter().map(|&si| g.value(si)).collect();
                let u32 = u * u.sqrt();
                let curvature = s.iter().zip(&tw).map(|(&si, &w)| u32 * g.curvature(si) * w).collect();
                let slope_sq = compensated_sum(s.iter().zip(&tw).map(|(&si, &w)| {
                    let d = g.slope(si);
                    d * d * w
                }));
                NodeTerms {
                    sqrt_u: u.sqrt(),
                    g_path,
                    curvature,
                    constant: -antideriv(g.value(1.0 - u)) - 0.5 * u * slope_sq,
                    half_u: 0.5 * u,
                }
            })
            .collect()
    };
    let fast_constants: Vec<f64> = match fast {
        Some((c, b)) => us.iter().map(|&u| -antideriv(g.value(1.0 - u)) - 0.5 * u * (c + b * b)).collect(),
        None => Vec::new(),
    };

    let evaluate = |scratch: &mut (Vec<f64>, Vec<f64>), index: u64| -> Option<Vec<f64>> {
        let mut rng = path_rng(seed, index);
        let mut out = Vec::with_capacity(us.len());
        if fast.is_some() {
            let r = draw_meander_endpoint(&mut rng);
            for (k, &u) in us.iter().enumerate() {
                let su = u.sqrt();
                let e = antideriv(g1 - su * r) + su * r * gp1 + fast_constants[k];
                let v = e.exp();
                if !v.is_finite() {
                    return None;
                }
                out.push(v);
            }
        } else {
            let (path, tmp) = scratch;
            meander_path(grid, &mut rng, path, tmp);
            let w1 = path[m];
            for nt in &terms {
                let su = nt.sqrt_u;
                let mut e = antideriv(g1 - su * w1) + su * w1 * gp1 + nt.constant;
                let mut curv = KahanSum::default();
                for (c, w) in nt.curvature.iter().zip(path.iter()) {
                    curv.add(c * w);
                }
                e -= curv.value();
                match potential {
                    Some(c) => e -= nt.half_u * c,
                    None => {
                        let mut acc = KahanSum::default();
                        for i in 0..=m {
                            acc.add(tw[i] * tm.girsanov_potential(nt.g_path[i] - su * path[i]));
                        }
                        e -= nt.half_u * acc.value();
                    }
                }
                let v = e.exp();
                if !v.is_finite() {
                    return None;
                }
                out.push(v);
            }
        }
        Some(out)
    };

    let mut node_sums: Vec<KahanSum> = (0..us.len()).map(|_| KahanSum::default()).collect();
    let mut yk = Vec::with_capacity(n);
    let mut yg_sum = KahanSum::default();
    let mut excluded = 0usize;
    let mut start = 0usize;
    while start < n {
        let len = CHUNK.min(n - start);
        let chunk = map_paths(start as u64, len, || (Vec::new(), Vec::new()), evaluate);
        for res in chunk {
            match res {
                Some(vals) => {
                    let mut k_acc = KahanSum::default();
                    let mut g_acc = KahanSum::default();
                    for (k, &v) in vals.iter().enumerate() {
                        node_sums[k].add(v);
                        k_acc.add(coef_k[k] * v);
                        g_acc.add(coef_g[k] * v);
                    }
                    yk.push(k_acc.value());
                    yg_sum.add(g_acc.value());
                }
                None => excluded += 1,
            }
        }
        start += len;
    }
    if excluded as f64 > max_excluded_fraction * n as f64 {
        return Err(Error::numerical(format!("{excluded} of {n} meander paths gave a non-finite exponent")));
    }
    let used = yk.len();
    ensure(used >= 2, || "fewer than two usable meander paths".into())?;
    let nu = used as f64;
    let mean_k = compensated_sum(yk.iter().copied()) / nu;
    let var = compensated_sum(yk.iter().map(|y| (y - mean_k) * (y - mean_k))) / (nu - 1.0);
    Ok(MeanderSums {
        node_means: node_sums.iter().map(|s| s.value() / nu).collect(),
        mean_k,
        mean_g: yg_sum.value() / nu,
        stderr_k: (var / nu).sqrt(),
        used,
        excluded,
    })
}

/// Bound on the dropped part `u < t_min`:
/// `sqrt(2/pi) max|h| c 2 sqrt(t_min) E_max`, with `c` 1.2 times the
/// largest crossing density near `tau = 1` (closed form) or 1.2 times the
/// largest histogram value (samples), and `E_max` the largest meander
/// expectation over the nodes closest to `u = 0`.
fn truncation_bound(fpt: &FptDistribution, h: &Boundary, nodes: &[Node], node_means: &[f64], t_min: f64) -> Result<f64> {
    if t_min == 0.0 {
        return Ok(0.0);
    }
    let h_max = (0..=20)
        .map(|i| h.value(1.0 - t_min * i as f64 / 20.0).abs())
        .fold(0.0, f64::max);
    let c = match fpt.source() {
        FptSource::ClosedForm { density, .. } => {
            let d = (0..=20).map(|i| density(1.0 - t_min * i as f64 / 20.0)).filter(|v| v.is_finite()).fold(0.0, f64::max);
            1.2 * d
        }
        FptSource::Empirical => {
            if fpt.total() >= 100 {
                let curve = empirical_density(fpt, DensityMethod::default())?;
                1.2 * curve.values.iter().copied().fold(0.0, f64::max)
            } else {
                1.2 * fpt.crossing_fraction() / fpt.horizon()
            }
        }
    };
    let u_small = nodes.iter().map(|n| n.u).fold(f64::INFINITY, f64::min);
    let e_max = nodes
        .iter()
        .zip(node_means)
        .filter(|(n, _)| n.u <= (100.0 * t_min).max(u_small))
        .map(|(_, &e)| e)
        .fold(0.0, f64::max);
    Ok(SQRT_2_OVER_PI * h_max * c * 2.0 * t_min.sqrt() * e_max)
}

/// `e^{l} Phi(c)` without overflow for very negative `c`.
fn exp_times_cdf(l: f64, c: f64) -> f64 {
    if c > -5.0 {
        l.exp() * normal::cdf(c)
    } else {
        (l - 0.5 * c * c).exp() * normal::mills_ratio(-c) / SQRT_2PI
    }
}

/// Closed-form derivative for Brownian motion, `g = a1 + b1 t`,
/// `h = a2 + b2 t` on `[0, 1]`:
/// `a2 sqrt(2/pi) e^{-(a1+b1)^2/2} + 2 (a2 b1 + a1 b2) e^{-2 a1 b1} Phi(b1 - a1)`.
pub fn bm_linear_gateaux_closed_lhs(a1: f64, a2: f64, b1: f64, b2: f64) -> Result<f64> {
    ensure(a1 > 0.0, || format!("a1 must be positive, got {a1}"))?;
    let s = a1 + b1;
    Ok(a2 * SQRT_2_OVER_PI * (-0.5 * s * s).exp() + 2.0 * (a2 * b1 + a1 * b2) * exp_times_cdf(-2.0 * a1 * b1, b1 - a1))
}

/// The same derivative as a one-dimensional integral over the crossing
/// law with the meander Laplace transform in closed form:
/// `(a1/pi) int_0^1 (a2 + b2(1-t)) / (sqrt(t) (1-t)^{3/2})
///  exp{-(a1 + b1(1-t))^2 / (2(1-t)) - b1^2 t / 2} L(sqrt(t) b1) dt`,
/// integrated in `v = sqrt(t)`.
pub fn bm_linear_gateaux_quadrature_rhs(a1: f64, a2: f64, b1: f64, b2: f64, tol: f64) -> Result<QuadResult> {
    ensure(a1 > 0.0, || format!("a1 must be positive, got {a1}"))?;
    ensure(tol > 0.0, || format!("tolerance must be positive, got {tol}"))?;
    let integrand = |v: f64| {
        let one_minus = (1.0 - v) * (1.0 + v);
        if one_minus <= 0.0 {
            return 0.0;
        }
        let t = v * v;
        let c = a1 + b1 * one_minus;
        let expo = -c * c / (2.0 * one_minus) - 0.5 * b1 * b1 * t;
        let val = 2.0 * (a2 + b2 * one_minus) / (one_minus * one_minus.sqrt()) * expo.exp() * meander_laplace(v * b1);
        if val.is_finite() {
            val
        } else {
            0.0
        }
    };
    let res = integrate(integrand, 0.0, 1.0, QuadOptions { abs_tol: tol * std::f64::consts::PI / a1, rel_tol: 0.0, max_panels: 4000 });
    let scale = a1 / std::f64::consts::PI;
    let res = QuadResult { value: scale * res.value, abs_error: scale * res.abs_error, ..res };
    res.require_converged()
}

/// How to represent the crossing law of Brownian motion over `a1 + b1 t`
/// on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FptRepresentation {
    ClosedForm,
    /// `n` inverse-CDF samples from stream family `seed`.
    Samples { n: usize, seed: u64 },
}

pub fn fpt_distribution_bm_linear(a1: f64, b1: f64, repr: FptRepresentation) -> Result<FptDistribution> {
    ensure(a1 > 0.0, || format!("a1 must be positive, got {a1}"))?;
    let density = Arc::new(move |t: f64| if t > 0.0 { linear_fpt_density_unchecked(a1, b1, t) } else { 0.0 });
    let cdf = Arc::new(move |t: f64| linear_fpt_cdf(a1, b1, t).unwrap_or(f64::NAN));
    match repr {
        FptRepresentation::ClosedForm => {
            FptDistribution::closed_form(format!("bm_linear:{a1},{b1}"), density, cdf, 1.0)
        }
        FptRepresentation::Samples { n, seed } => {
            ensure(n >= 1, || "need at least one sample".into())?;
            let mass = linear_fpt_cdf(a1, b1, 1.0)?;
            let draws = map_paths(0, n, || (), |_, index| {
                use rand::Rng;
                let u: f64 = path_rng(seed, index).random();
                if u >= mass {
                    return None;
                }
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if cdf(mid) < u {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Some(hi)
            });
            let censored = draws.iter().filter(|d| d.is_none()).count();
            let samples = draws.into_iter().flatten().collect();
            FptDistribution::empirical(samples, censored, 0, 1.0)
        }
    }
}
