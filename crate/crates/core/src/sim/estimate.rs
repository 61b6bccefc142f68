use serde::Serialize;

use super::grid::PathGrid;
use super::paths::{bridge_from_brownian, fill_brownian};
use super::stream::{map_paths, path_rng};
use crate::diffusion::{Boundary, TransformedModel};
use crate::error::{ensure, Error, Result};
use crate::sum::KahanSum;

/// Monte-Carlo estimate with its standard error and the settings that
/// produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MCEstimate {
    pub value: f64,
    pub stderr: f64,
    /// Samples that entered the estimate.
    pub n: usize,
    pub seed: u64,
    pub grid_step: f64,
    /// Samples dropped for a non-finite weight.
    pub excluded: usize,
}

/// Knobs shared by the path estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Multiply each surviving path by the probability that the Brownian
    /// bridge between consecutive grid points stays below the chord of the
    /// boundary. Removes the discrete-monitoring bias for Brownian motion and
    /// linear boundaries.
    pub bridge_correction: bool,
    /// Run fails when more than this fraction of samples is excluded.
    pub max_excluded_fraction: f64,
    /// Euler paths with `|X|` above this are treated as exploded.
    pub explosion_guard: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { bridge_correction: false, max_excluded_fraction: 1e-3, explosion_guard: 1e8 }
    }
}

enum PathOutcome {
    Weighted { log_weight: f64, value: f64 },
    Excluded,
}

/// Weighted ratio estimate `sum w y / sum w` with delta-method standard
/// error. Weights are exponentiated relative to their maximum, so equal log
/// weights give weights of exactly one.
fn ratio_estimate(outcomes: &[PathOutcome], seed: u64, grid_step: f64, max_excluded_fraction: f64) -> Result<MCEstimate> {
    let total = outcomes.len();
    let mut max_lw = f64::NEG_INFINITY;
    let mut included = 0usize;
    for o in outcomes {
        if let PathOutcome::Weighted { log_weight, .. } = o {
            max_lw = max_lw.max(*log_weight);
            included += 1;
        }
    }
    let excluded = total - included;
    if excluded as f64 > max_excluded_fraction * total as f64 {
        return Err(Error::numerical(format!(
            "{excluded} of {total} paths had non-finite Girsanov weights"
        )));
    }
    ensure(included >= 1, || "no usable paths".into())?;

    let mut sw = KahanSum::default();
    let mut swy = KahanSum::default();
    for o in outcomes {
        if let PathOutcome::Weighted { log_weight, value } = o {
            let w = (log_weight - max_lw).exp();
            sw.add(w);
            swy.add(w * value);
        }
    }
    let value = swy.value() / sw.value();
    let mut ss = KahanSum::default();
    for o in outcomes {
        if let PathOutcome::Weighted { log_weight, value: y } = o {
            let w = (log_weight - max_lw).exp();
            let d = w * (y - value);
            ss.add(d * d);
        }
    }
    let n = included as f64;
    let stderr = if included > 1 {
        (ss.value() * n / (n - 1.0)).sqrt() / sw.value()
    } else {
        0.0
    };
    Ok(MCEstimate { value, stderr, n: included, seed, grid_step, excluded })
}

/// `Pr_x(sup_{s <= t} (X_s - g(s)) < 0 | X_t = z)` for the unit-diffusion
/// model, as the ratio `E[e^{N(t)} 1_A] / E[e^{N(t)}]` over Brownian bridges
/// from `x` to `z`, where `N(t) = -1/2 int_0^t (mu' + mu^2)(X_u) du` by the
/// trapezoidal rule. The constant factor relating the bridge law to the
/// pinned diffusion cancels in the ratio.
pub fn estimate_cond_noncross_prob(
    tm: &TransformedModel,
    boundary: &Boundary,
    t: f64,
    x: f64,
    z: f64,
    grid: &PathGrid,
    n: usize,
    seed: u64,
) -> Result<MCEstimate> {
    estimate_cond_noncross_prob_with(tm, boundary, t, x, z, grid, n, seed, 0, SimOptions::default())
}

/// As [`estimate_cond_noncross_prob`], drawing paths `first_path..first_path + n`
/// of the stream family `seed`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_cond_noncross_prob_with(
    tm: &TransformedModel,
    boundary: &Boundary,
    t: f64,
    x: f64,
    z: f64,
    grid: &PathGrid,
    n: usize,
    seed: u64,
    first_path: u64,
    opts: SimOptions,
) -> Result<MCEstimate> {
    ensure(n >= 1, || "need at least one path".into())?;
    ensure((grid.t_end() - t).abs() <= 1e-12 * t.max(1.0), || {
        format!("grid ends at {} but the bridge horizon is {t}", grid.t_end())
    })?;
    let g = boundary.values_on(grid.times());
    ensure(x < g[0], || format!("start {x} must lie below g(0) = {}", g[0]))?;
    ensure(z <= g[g.len() - 1], || format!("end point {z} exceeds g(t) = {}", g[g.len() - 1]))?;

    let times = grid.times();
    let sqrt_steps = grid.sqrt_steps();
    let constant_potential = tm.constant_potential();
    // Constant potential: every path carries the same weight, computed once.
    let fixed_log_weight = constant_potential.map(|c| -0.5 * c * t);

    let outcomes = map_paths(first_path, n, Vec::new, |w: &mut Vec<f64>, index| {
        let mut rng = path_rng(seed, index);
        fill_brownian(&mut rng, sqrt_steps, w);
        bridge_from_brownian(times, x, z, w);

        let survives = w.iter().zip(&g).all(|(b, gb)| b < gb);
        let mut value = if survives { 1.0 } else { 0.0 };
        if survives && opts.bridge_correction {
            for i in 0..w.len() - 1 {
                let d0 = g[i] - w[i];
                let d1 = g[i + 1] - w[i + 1];
                let dt = times[i + 1] - times[i];
                value *= -(-2.0 * d0 * d1 / dt).exp_m1();
            }
        }
        let log_weight = match fixed_log_weight {
            Some(lw) => lw,
            None => {
                let mut acc = KahanSum::default();
                let mut prev = tm.girsanov_potential(w[0]);
                for i in 0..w.len() - 1 {
                    let next = tm.girsanov_potential(w[i + 1]);
                    acc.add(0.5 * (prev + next) * (times[i + 1] - times[i]));
                    prev = next;
                }
                -0.5 * acc.value()
            }
        };
        if log_weight.is_finite() {
            PathOutcome::Weighted { log_weight, value }
        } else {
            PathOutcome::Excluded
        }
    });
    ratio_estimate(&outcomes, seed, grid.coarsest_step(), opts.max_excluded_fraction)
}

/// One regression point: offset `g(t) - z` and the estimate there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegressionPoint {
    pub offset: f64,
    pub estimate: MCEstimate,
}

/// Regression estimate of `f(t, x)` from conditional non-crossing
/// probabilities near the boundary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FEstimate {
    pub slope: f64,
    pub slope_stderr: f64,
    /// Present for free-intercept fits.
    pub intercept: Option<f64>,
    pub window: f64,
    pub points: Vec<RegressionPoint>,
    pub through_origin: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionOptions {
    pub through_origin: bool,
    pub sim: SimOptions,
}

impl Default for RegressionOptions {
    fn default() -> Self {
        Self { through_origin: true, sim: SimOptions::default() }
    }
}

/// `offsets` evenly spaced `window / count, ..., window`.
pub fn default_offsets(window: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|k| window * k as f64 / count as f64).collect()
}

/// Estimates `f(t, x)` as the slope of `Pr(no crossing | X_t = g(t) - d)`
/// against `d` over the given offsets, by least squares weighted with
/// `1 / stderr^2`. Offset `k` uses paths `k n .. (k + 1) n` of the seed's
/// stream family, so points are independent.
#[allow(clippy::too_many_arguments)]
pub fn estimate_f_regression(
    tm: &TransformedModel,
    boundary: &Boundary,
    t: f64,
    x: f64,
    window: f64,
    offsets: &[f64],
    n_per_offset: usize,
    grid: &PathGrid,
    seed: u64,
    opts: RegressionOptions,
) -> Result<FEstimate> {
    ensure(window > 0.0, || format!("window must be positive, got {window}"))?;
    ensure(!offsets.is_empty(), || "no offsets given".into())?;
    for &d in offsets {
        ensure(d > 0.0 && d <= window * (1.0 + 1e-12), || format!("offset {d} is outside (0, {window}]"))?;
    }
    if !opts.through_origin && offsets.len() < 2 {
        return Err(Error::numerical("free-intercept fit needs at least two offsets"));
    }
    let gt = boundary.value(t);
    let mut points = Vec::with_capacity(offsets.len());
    for (k, &d) in offsets.iter().enumerate() {
        let est = estimate_cond_noncross_prob_with(
            tm,
            boundary,
            t,
            x,
            gt - d,
            grid,
            n_per_offset,
            seed,
            (k * n_per_offset) as u64,
            opts.sim,
        )?;
        points.push(RegressionPoint { offset: d, estimate: est });
    }
    fit_points(points, window, opts.through_origin)
}

fn point_variance(p: &RegressionPoint) -> f64 {
    let e = p.estimate;
    if e.stderr > 0.0 {
        return e.stderr * e.stderr;
    }
    // All paths agreed: smoothed binomial variance instead of zero.
    let n = e.n as f64;
    let pt = (e.value * n + 0.5) / (n + 1.0);
    pt * (1.0 - pt) / n
}

pub(crate) fn fit_points(points: Vec<RegressionPoint>, window: f64, through_origin: bool) -> Result<FEstimate> {
    let mut sw = 0.0;
    let mut swx = 0.0;
    let mut swy = 0.0;
    let mut swxx = 0.0;
    let mut swxy = 0.0;
    for p in &points {
        let w = 1.0 / point_variance(p);
        let (x, y) = (p.offset, p.estimate.value);
        sw += w;
        swx += w * x;
        swy += w * y;
        swxx += w * x * x;
        swxy += w * x * y;
    }
    let (slope, slope_stderr, intercept) = if through_origin {
        (swxy / swxx, (1.0 / swxx).sqrt(), None)
    } else {
        let det = sw * swxx - swx * swx;
        if !(det > 0.0) {
            return Err(Error::numerical("degenerate regression: offsets do not spread"));
        }
        let slope = (sw * swxy - swx * swy) / det;
        let intercept = (swxx * swy - swx * swxy) / det;
        (slope, (sw / det).sqrt(), Some(intercept))
    };
    if !slope.is_finite() {
        return Err(Error::numerical("regression slope is not finite"));
    }
    Ok(FEstimate { slope, slope_stderr, intercept, window, points, through_origin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn bm_setup() -> (TransformedModel, Boundary, PathGrid) {
        (TransformedModel::brownian(), Boundary::constant(1.0, 1.0).unwrap(), PathGrid::uniform(1.0, 200).unwrap())
    }

    #[test]
    fn pinned_on_the_boundary_gives_zero() {
        let (tm, b, grid) = bm_setup();
        let e = estimate_cond_noncross_prob(&tm, &b, 1.0, 0.0, 1.0, &grid, 500, 3).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn constant_drift_matches_driftless_on_identical_seeds() {
        let (bm, b, grid) = bm_setup();
        let base = estimate_cond_noncross_prob(&bm, &b, 1.0, 0.0, 0.2, &grid, 2000, 9).unwrap();
        let drift = TransformedModel::constant_drift(0.8);
        let e = estimate_cond_noncross_prob(&drift, &b, 1.0, 0.0, 0.2, &grid, 2000, 9).unwrap();
        assert_eq!(base, e);
        // Same drift, no constant-potential shortcut: weights are computed
        // per path but agree exactly, so the ratio is unchanged.
        let generic = TransformedModel::from_unit_drift(Arc::new(|_| 0.8), Arc::new(|_| 0.0), Arc::new(|x| 0.8 * x));
        let e = estimate_cond_noncross_prob(&generic, &b, 1.0, 0.0, 0.2, &grid, 2000, 9).unwrap();
        assert_eq!(base.value, e.value);
        assert_eq!(base.stderr, e.stderr);
    }

    #[test]
    fn preconditions() {
        let (tm, b, grid) = bm_setup();
        assert!(estimate_cond_noncross_prob(&tm, &b, 1.0, 0.0, 1.5, &grid, 10, 0).is_err());
        assert!(estimate_cond_noncross_prob(&tm, &b, 1.0, 1.5, 0.0, &grid, 10, 0).is_err());
        assert!(estimate_cond_noncross_prob(&tm, &b, 0.5, 0.0, 0.0, &grid, 10, 0).is_err());
    }

    #[test]
    fn exploding_weights_fail_the_run() {
        let (_, b, grid) = bm_setup();
        let tm = TransformedModel::from_unit_drift(
            Arc::new(|_| 0.0),
            Arc::new(|x: f64| if x < -0.5 { f64::NAN } else { 0.0 }),
            Arc::new(|_| 0.0),
        );
        let r = estimate_cond_noncross_prob(&tm, &b, 1.0, 0.0, 0.0, &grid, 1000, 1);
        assert!(matches!(r, Err(Error::Numerical(_))));
    }

    #[test]
    fn single_offset_regression_is_ratio() {
        let est = MCEstimate { value: 0.02, stderr: 0.001, n: 100, seed: 0, grid_step: 0.01, excluded: 0 };
        let f = fit_points(vec![RegressionPoint { offset: 0.01, estimate: est }], 0.01, true).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!(fit_points(vec![RegressionPoint { offset: 0.01, estimate: est }], 0.01, false).is_err());
    }

    #[test]
    fn weighted_fit_recovers_an_exact_line() {
        let pts: Vec<_> = (1..=5)
            .map(|k| {
                let d = 0.02 * k as f64;
                let est = MCEstimate { value: 0.1 + 1.5 * d, stderr: 0.01 * k as f64, n: 10, seed: 0, grid_step: 0.1, excluded: 0 };
                RegressionPoint { offset: d, estimate: est }
            })
            .collect();
        let f = fit_points(pts, 0.1, false).unwrap();
        assert!((f.slope - 1.5).abs() < 1e-12);
        assert!((f.intercept.unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn offsets_outside_window_are_rejected() {
        let (tm, b, grid) = bm_setup();
        let r = estimate_f_regression(&tm, &b, 1.0, 0.0, 0.1, &[0.05, 0.2], 10, &grid, 0, RegressionOptions::default());
        assert!(r.is_err());
    }
}
