//! First-passage densities: the identity `p_tau(t) = f(t, x) p(t, x, g(t)) / 2`
//! and its variants for the original diffusion and for pinned processes,
//! plus empirical density curves from sampled crossing times.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::diffusion::{Boundary, RealFn, TransformedModel};
use crate::error::{ensure, Error, Result};
use crate::normal::SQRT_2PI;
use crate::sim::{estimate_f_regression, FEstimate, PathGrid, RegressionOptions};

/// Transition density `p(t, x, z)` of the unit-diffusion process.
pub type KernelFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum FptSource {
    Empirical,
    /// Known law of `tau`: density and distribution function on `(0, horizon]`.
    ClosedForm { label: String, density: RealFn, cdf: RealFn },
}

impl fmt::Debug for FptSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FptSource::Empirical => f.write_str("Empirical"),
            FptSource::ClosedForm { label, .. } => write!(f, "ClosedForm({label})"),
        }
    }
}

/// Law of the first crossing time `tau` on `[0, horizon]`, either as
/// samples (crossing times plus a count of paths that never crossed) or in
/// closed form.
#[derive(Debug, Clone)]
pub struct FptDistribution {
    samples: Vec<f64>,
    censored: usize,
    excluded: usize,
    horizon: f64,
    source: FptSource,
}

impl FptDistribution {
    pub fn empirical(samples: Vec<f64>, censored: usize, excluded: usize, horizon: f64) -> Result<Self> {
        ensure(horizon > 0.0, || format!("horizon must be positive, got {horizon}"))?;
        if let Some(bad) = samples.iter().find(|&&t| !(t > 0.0 && t <= horizon)) {
            return Err(Error::invalid(format!("crossing time {bad} outside (0, {horizon}]")));
        }
        Ok(Self { samples, censored, excluded, horizon, source: FptSource::Empirical })
    }

    pub fn closed_form(label: impl Into<String>, density: RealFn, cdf: RealFn, horizon: f64) -> Result<Self> {
        ensure(horizon > 0.0, || format!("horizon must be positive, got {horizon}"))?;
        Ok(Self {
            samples: Vec::new(),
            censored: 0,
            excluded: 0,
            horizon,
            source: FptSource::ClosedForm { label: label.into(), density, cdf },
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn censored(&self) -> usize {
        self.censored
    }

    pub fn excluded(&self) -> usize {
        self.excluded
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn source(&self) -> &FptSource {
        &self.source
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self.source, FptSource::ClosedForm { .. })
    }

    /// Paths in the law: crossings plus censored paths.
    pub fn total(&self) -> usize {
        self.samples.len() + self.censored
    }

    /// `P(tau <= horizon)`.
    pub fn crossing_fraction(&self) -> f64 {
        match &self.source {
            FptSource::ClosedForm { cdf, .. } => cdf(self.horizon),
            FptSource::Empirical if self.total() == 0 => 0.0,
            FptSource::Empirical => self.samples.len() as f64 / self.total() as f64,
        }
    }

    /// Closed-form density at `t`, if known.
    pub fn density(&self, t: f64) -> Option<f64> {
        match &self.source {
            FptSource::ClosedForm { density, .. } => Some(density(t)),
            FptSource::Empirical => None,
        }
    }
}

/// Density evaluations on a time grid with per-point standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityCurve {
    pub ts: Vec<f64>,
    pub values: Vec<f64>,
    pub stderrs: Vec<f64>,
    /// How the values were obtained.
    pub meta: String,
}

impl DensityCurve {
    pub fn new(ts: Vec<f64>, values: Vec<f64>, stderrs: Vec<f64>, meta: impl Into<String>) -> Result<Self> {
        ensure(ts.len() == values.len() && ts.len() == stderrs.len(), || {
            "density curve columns differ in length".into()
        })?;
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::numerical(format!("density value {v} is negative or not finite")));
        }
        Ok(Self { ts, values, stderrs, meta: meta.into() })
    }

    /// CSV with header `t,value,stderr`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,value,stderr\n");
        for i in 0..self.ts.len() {
            out.push_str(&format!("{},{},{}\n", self.ts[i], self.values[i], self.stderrs[i]));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("density curve serialises")
    }
}

/// `p_tau(t) = f(t, x) p(t, x, g(t)) / 2`.
pub fn fpt_density_from_f(f_t_x: f64, p_txz: f64) -> Result<f64> {
    ensure(f_t_x >= 0.0 && p_txz >= 0.0, || format!("inputs must be non-negative, got f = {f_t_x}, p = {p_txz}"))?;
    Ok(0.5 * f_t_x * p_txz)
}

/// First-passage density of the original diffusion `U` over its boundary:
/// `f sigma(g(t))^2 p_U(t, u0, g(t)) / 2`, with `f` the coefficient of the
/// transformed process.
pub fn original_fpt_density(f_t_u: f64, sigma_at_g: f64, p_u: f64) -> Result<f64> {
    ensure(f_t_u >= 0.0 && sigma_at_g >= 0.0 && p_u >= 0.0, || {
        format!("inputs must be non-negative, got f = {f_t_u}, sigma = {sigma_at_g}, p = {p_u}")
    })?;
    Ok(0.5 * f_t_u * sigma_at_g * sigma_at_g * p_u)
}

/// First-passage density of the process pinned at `X_T = y`:
/// `p_tau^y(t) = p(T - t, g(t), y) / p(T, x, y) * p_tau(t)`.
pub fn bridge_fpt_density(ptau_t: f64, p_tmt_gt_y: f64, p_t_x_y: f64) -> Result<f64> {
    ensure(p_t_x_y > 0.0, || format!("pinning density p(T, x, y) must be positive, got {p_t_x_y}"))?;
    ensure(ptau_t >= 0.0 && p_tmt_gt_y >= 0.0, || "densities must be non-negative".into())?;
    Ok(p_tmt_gt_y / p_t_x_y * ptau_t)
}

/// Pinned transition density `p^y(0, x, t, g(t)) = p(t, x, g(t)) p(T - t, g(t), y) / p(T, x, y)`.
pub fn bridge_kernel(p_t_x_gt: f64, p_tmt_gt_y: f64, p_t_x_y: f64) -> Result<f64> {
    ensure(p_t_x_y > 0.0, || format!("pinning density p(T, x, y) must be positive, got {p_t_x_y}"))?;
    ensure(p_t_x_gt >= 0.0 && p_tmt_gt_y >= 0.0, || "densities must be non-negative".into())?;
    Ok(p_t_x_gt * p_tmt_gt_y / p_t_x_y)
}

/// Pinned first-passage density in kernel form `f(t, x) p^y(0, x, t, g(t)) / 2`.
pub fn bridge_fpt_density_from_f(f_t_x: f64, bridge_kernel_value: f64) -> Result<f64> {
    fpt_density_from_f(f_t_x, bridge_kernel_value)
}

/// One point of [`fpt_density_via_regression`].
#[derive(Debug, Clone, Serialize)]
pub struct RegressionDensityPoint {
    pub t: f64,
    pub f: FEstimate,
    pub kernel: f64,
    pub density: f64,
    pub stderr: f64,
}

/// Settings for [`fpt_density_via_regression`].
#[derive(Debug, Clone)]
pub struct RegressionDensityOptions {
    pub window: f64,
    pub offsets: Vec<f64>,
    pub n_per_offset: usize,
    pub regression: RegressionOptions,
}

/// `p_tau(t)` at each requested time by estimating `f(t, x)` by regression
/// and multiplying by the transition density `kernel(t, x, g(t))`. Time `k`
/// uses seed `seed + k`; `grid_for(t)` supplies the simulation grid on
/// `[0, t]`.
pub fn fpt_density_via_regression<G>(
    tm: &TransformedModel,
    boundary: &Boundary,
    x: f64,
    ts: &[f64],
    kernel: &KernelFn,
    grid_for: G,
    opts: &RegressionDensityOptions,
    seed: u64,
) -> Result<(DensityCurve, Vec<RegressionDensityPoint>)>
where
    G: Fn(f64) -> Result<PathGrid>,
{
    ensure(!ts.is_empty(), || "no evaluation times given".into())?;
    let mut points = Vec::with_capacity(ts.len());
    for (k, &t) in ts.iter().enumerate() {
        ensure(t > 0.0 && t <= boundary.horizon(), || format!("time {t} outside (0, {}]", boundary.horizon()))?;
        let grid = grid_for(t)?;
        let f = estimate_f_regression(
            tm,
            boundary,
            t,
            x,
            opts.window,
            &opts.offsets,
            opts.n_per_offset,
            &grid,
            seed.wrapping_add(k as u64),
            opts.regression,
        )?;
        let p = kernel(t, x, boundary.value(t));
        // The slope may dip below zero through noise; the density may not.
        let density = fpt_density_from_f(f.slope.max(0.0), p)?;
        let stderr = 0.5 * f.slope_stderr * p;
        points.push(RegressionDensityPoint { t, f, kernel: p, density, stderr });
    }
    let curve = DensityCurve::new(
        points.iter().map(|p| p.t).collect(),
        points.iter().map(|p| p.density).collect(),
        points.iter().map(|p| p.stderr).collect(),
        "monte_carlo:regression",
    )?;
    Ok((curve, points))
}

/// How to turn crossing times into a density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityMethod {
    /// Histogram on `[0, horizon]`; `None` picks the Freedman–Diaconis bin
    /// count, at least 20.
    Histogram { bins: Option<usize> },
    /// Gaussian kernel estimate, reflected at 0 and at the horizon, on
    /// `points` equally spaced times. `None` uses Silverman's bandwidth.
    Kernel { bandwidth: Option<f64>, points: usize },
}

impl Default for DensityMethod {
    fn default() -> Self {
        DensityMethod::Histogram { bins: None }
    }
}

const MIN_BINS: usize = 20;
const MAX_BINS: usize = 10_000;
const MIN_PATHS: usize = 100;

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn quantile_sorted(v: &[f64], p: f64) -> f64 {
    let pos = p * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

fn freedman_diaconis_bins(samples: &[f64], horizon: f64) -> usize {
    if samples.len() < 4 {
        return MIN_BINS;
    }
    let v = sorted(samples);
    let iqr = quantile_sorted(&v, 0.75) - quantile_sorted(&v, 0.25);
    let width = 2.0 * iqr / (v.len() as f64).cbrt();
    if !(width > 0.0) {
        return MIN_BINS;
    }
    ((horizon / width).ceil() as usize).clamp(MIN_BINS, MAX_BINS)
}

/// Density curve of `tau`. Histogram and kernel estimates are normalised by
/// all paths (censored included), so they integrate to the crossing
/// fraction. A closed-form source is evaluated at bin midpoints (or the
/// kernel grid) with zero standard error.
pub fn empirical_density(dist: &FptDistribution, method: DensityMethod) -> Result<DensityCurve> {
    let horizon = dist.horizon();
    if let FptSource::ClosedForm { density, label, .. } = dist.source() {
        let ts = match method {
            DensityMethod::Histogram { bins } => {
                let m = bins.unwrap_or(200).max(1);
                (0..m).map(|i| horizon * (i as f64 + 0.5) / m as f64).collect::<Vec<_>>()
            }
            DensityMethod::Kernel { points, .. } => kernel_times(horizon, points)?,
        };
        let values = ts.iter().map(|&t| density(t)).collect();
        let stderrs = vec![0.0; ts.len()];
        return DensityCurve::new(ts, values, stderrs, format!("closed_form:{label}"));
    }
    let total = dist.total();
    ensure(total >= MIN_PATHS, || format!("empirical density needs at least {MIN_PATHS} paths, got {total}"))?;
    match method {
        DensityMethod::Histogram { bins } => {
            let m = match bins {
                Some(b) => {
                    ensure(b >= 1, || "histogram needs at least one bin".into())?;
                    b
                }
                None => freedman_diaconis_bins(dist.samples(), horizon),
            };
            histogram(dist, m)
        }
        DensityMethod::Kernel { bandwidth, points } => kernel_density(dist, bandwidth, points),
    }
}

fn histogram(dist: &FptDistribution, m: usize) -> Result<DensityCurve> {
    let horizon = dist.horizon();
    let width = horizon / m as f64;
    let mut counts = vec![0usize; m];
    for &t in dist.samples() {
        let k = ((t / width).ceil() as usize).clamp(1, m) - 1;
        counts[k] += 1;
    }
    let n = dist.total() as f64;
    let ts = (0..m).map(|i| width * (i as f64 + 0.5)).collect();
    let values = counts.iter().map(|&c| c as f64 / (n * width)).collect();
    let stderrs = counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            (p * (1.0 - p) / n).sqrt() / width
        })
        .collect();
    DensityCurve::new(ts, values, stderrs, format!("monte_carlo:histogram:{m}"))
}

fn kernel_times(horizon: f64, points: usize) -> Result<Vec<f64>> {
    ensure(points >= 2, || format!("kernel grid needs at least 2 points, got {points}"))?;
    Ok((0..points).map(|i| horizon * i as f64 / (points - 1) as f64).collect())
}

fn kernel_density(dist: &FptDistribution, bandwidth: Option<f64>, points: usize) -> Result<DensityCurve> {
    let horizon = dist.horizon();
    let ts = kernel_times(horizon, points)?;
    let samples = dist.samples();
    let n_total = dist.total() as f64;
    if samples.len() < 2 {
        let zeros = vec![0.0; ts.len()];
        return DensityCurve::new(ts, zeros.clone(), zeros, "monte_carlo:kernel");
    }
    let h = match bandwidth {
        Some(h) => {
            ensure(h > 0.0, || format!("bandwidth must be positive, got {h}"))?;
            h
        }
        None => {
            let v = sorted(samples);
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let sd = (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt();
            let iqr = quantile_sorted(&v, 0.75) - quantile_sorted(&v, 0.25);
            let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
            let h = 0.9 * spread * n.powf(-0.2);
            if !(h > 0.0) {
                return Err(Error::numerical("crossing times have no spread; give a bandwidth"));
            }
            h
        }
    };
    let kernel = |d: f64| (-0.5 * d * d / (h * h)).exp() / (SQRT_2PI * h);
    let values: Vec<f64> = ts
        .iter()
        .map(|&t| {
            let s: f64 = samples
                .iter()
                .map(|&x| kernel(t - x) + kernel(t + x) + kernel(2.0 * horizon - t - x))
                .sum();
            s / n_total
        })
        .collect();
    // Pointwise variance f R(K) / (n h), R(K) = 1 / (2 sqrt(pi)).
    let rk = 0.5 / std::f64::consts::PI.sqrt();
    let stderrs = values.iter().map(|&v| (v * rk / (n_total * h)).sqrt()).collect();
    DensityCurve::new(ts, values, stderrs, format!("monte_carlo:kernel:{h}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{kendall_bm, q};

    #[test]
    fn scalar_identities() {
        assert!((fpt_density_from_f(2.0, q(1.0, 0.0, 1.0)).unwrap() - kendall_bm(1.0, 0.0, 1.0).unwrap()).abs() < 1e-16);
        assert_eq!(fpt_density_from_f(0.0, 0.3).unwrap(), 0.0);
        assert!(fpt_density_from_f(-1.0, 0.3).is_err());
        assert_eq!(original_fpt_density(1.7, 1.0, 0.2).unwrap(), fpt_density_from_f(1.7, 0.2).unwrap());
        assert_eq!(original_fpt_density(0.0, 2.0, 0.2).unwrap(), 0.0);
        assert!(bridge_fpt_density(0.2, 0.3, 0.0).is_err());
    }

    #[test]
    fn bridge_ratio_of_one_returns_free_density() {
        assert_eq!(bridge_fpt_density(0.37, 0.5, 0.5).unwrap(), 0.37);
    }

    #[test]
    fn histogram_integrates_to_crossing_fraction() {
        let samples: Vec<f64> = (1..=300).map(|i| i as f64 / 400.0).collect();
        let d = FptDistribution::empirical(samples, 100, 0, 1.0).unwrap();
        let c = empirical_density(&d, DensityMethod::default()).unwrap();
        let w = c.ts[1] - c.ts[0];
        let mass: f64 = c.values.iter().map(|v| v * w).sum();
        assert!((mass - 0.75).abs() < 1e-12);
        assert!(c.ts.len() >= MIN_BINS);
    }

    #[test]
    fn censored_only_gives_zero_curve() {
        let d = FptDistribution::empirical(vec![], 500, 0, 1.0).unwrap();
        let c = empirical_density(&d, DensityMethod::default()).unwrap();
        assert!(c.values.iter().all(|&v| v == 0.0));
        assert_eq!(d.crossing_fraction(), 0.0);
        let k = empirical_density(&d, DensityMethod::Kernel { bandwidth: None, points: 11 }).unwrap();
        assert!(k.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn too_few_paths() {
        let d = FptDistribution::empirical(vec![0.5; 10], 10, 0, 1.0).unwrap();
        assert!(empirical_density(&d, DensityMethod::default()).is_err());
        assert!(FptDistribution::empirical(vec![1.5], 0, 0, 1.0).is_err());
    }

    #[test]
    fn closed_form_passes_through() {
        let dens: RealFn = Arc::new(|t| kendall_bm(1.0, 0.0, t).unwrap());
        let cdf: RealFn = Arc::new(|t| crate::diffusion::linear_fpt_cdf(1.0, 0.0, t).unwrap());
        let d = FptDistribution::closed_form("kendall", dens, cdf, 1.0).unwrap();
        let c = empirical_density(&d, DensityMethod::Histogram { bins: Some(10) }).unwrap();
        for (t, v) in c.ts.iter().zip(&c.values) {
            assert_eq!(*v, kendall_bm(1.0, 0.0, *t).unwrap());
        }
    }

    #[test]
    fn kernel_estimate_mass() {
        let samples: Vec<f64> = (0..400).map(|i| 0.3 + 0.4 * ((i as f64 * 0.618_034) % 1.0)).collect();
        let d = FptDistribution::empirical(samples, 400, 0, 1.0).unwrap();
        let c = empirical_density(&d, DensityMethod::Kernel { bandwidth: None, points: 401 }).unwrap();
        let h = 1.0 / 400.0;
        let mass: f64 = c.values.windows(2).map(|w| 0.5 * (w[0] + w[1]) * h).sum();
        assert!((mass - 0.5).abs() < 5e-3, "mass {mass}");
    }

    #[test]
    fn csv_layout() {
        let c = DensityCurve::new(vec![0.5], vec![0.25], vec![0.0], "x").unwrap();
        assert_eq!(c.to_csv(), "t,value,stderr\n0.5,0.25,0\n");
        assert!(c.to_json().contains("\"meta\""));
    }
}
