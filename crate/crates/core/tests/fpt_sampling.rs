mod common;

use std::sync::Arc;

use common::{bin_mass_allowance, level_cdf, BGK_BETA};
use fptlab::diffusion::{kendall_bm, linear_survival, Boundary, DiffusionModel, Interval, TransformedModel};
use fptlab::fpt::{empirical_density, original_fpt_density, DensityMethod};
use fptlab::normal;
use fptlab::sim::{sample_fpt, sample_fpt_original, PathGrid, SimOptions};

#[test]
fn histogram_against_kendall() {
    let dt = 1e-3;
    let tm = TransformedModel::brownian();
    let g = Boundary::constant(1.0, 1.0).unwrap();
    let grid = PathGrid::with_step(1.0, dt).unwrap();
    let dist = sample_fpt(&tm, &g, 0.0, &grid, 100_000, 12).unwrap();
    let curve = empirical_density(&dist, DensityMethod::Histogram { bins: Some(25) }).unwrap();
    let w = 1.0 / 25.0;
    for i in 0..25 {
        let (lo, hi) = (i as f64 * w, (i + 1) as f64 * w);
        let mass = curve.values[i] * w;
        let exact = level_cdf(1.0, hi) - level_cdf(1.0, lo);
        let allowance = bin_mass_allowance(level_cdf, 1.0, dt, lo, hi);
        // Empty bins have a zero sample stderr; use the oracle's binomial one.
        let se = (curve.stderrs[i] * w).max((exact * (1.0 - exact) / dist.total() as f64).sqrt());
        assert!(
            (mass - exact).abs() < 3.0 * se + allowance,
            "bin {i}: {mass} vs {exact} (se {se}, allowance {allowance})"
        );
    }
    // Midpoint density near the peak also sits near Kendall's value.
    let k = kendall_bm(1.0, 0.0, curve.ts[12]).unwrap();
    assert!((curve.values[12] - k).abs() < 0.05 * k);
}

#[test]
fn crossing_fraction_for_a_sloped_boundary() {
    let dt = 1e-3;
    let tm = TransformedModel::brownian();
    let g = Boundary::linear(1.0, 1.0, 1.0).unwrap();
    let grid = PathGrid::with_step(1.0, dt).unwrap();
    let n = 50_000;
    let dist = sample_fpt(&tm, &g, 0.0, &grid, n, 4).unwrap();
    let p = dist.crossing_fraction();
    let se = (p * (1.0 - p) / n as f64).sqrt();
    let exact = 1.0 - linear_survival(1.0, 1.0, 1.0).unwrap();
    let monitored = 1.0 - linear_survival(1.0 + BGK_BETA * dt.sqrt(), 1.0, 1.0).unwrap();
    assert!((p - exact).abs() < 3.0 * se + (exact - monitored).abs(), "{p} vs {exact}");
}

#[test]
fn bridge_correction_debiases_crossing_fraction() {
    let tm = TransformedModel::brownian();
    let g = Boundary::linear(1.0, 1.0, 1.0).unwrap();
    let grid = PathGrid::with_step(1.0, 1e-2).unwrap();
    let opts = SimOptions { bridge_correction: true, ..SimOptions::default() };
    let n = 50_000;
    let dist = fptlab::sim::sample_fpt_with(&tm, &g, 0.0, &grid, n, 6, opts).unwrap();
    let p = dist.crossing_fraction();
    let se = (p * (1.0 - p) / n as f64).sqrt();
    let exact = 1.0 - linear_survival(1.0, 1.0, 1.0).unwrap();
    assert!((p - exact).abs() < 3.0 * se, "{p} vs {exact}");
}

#[test]
fn geometric_diffusion_through_the_original_density() {
    // dU = U dW from 1, level 2. X = log U has drift -1/2 and level log 2;
    // pinned X is a Brownian bridge, so f_X = 2 log 2 / t and the U-space
    // coefficient is f_X / sigma(2).
    let model = DiffusionModel::new(Arc::new(|_| 0.0), Arc::new(|y| y), Arc::new(|_| 1.0), Interval::POSITIVE).unwrap();
    let level = 2.0f64;
    let l = level.ln();
    let density = |t: f64| {
        let f_u = 2.0 * l / t / level;
        let p_x = (-(l + 0.5 * t).powi(2) / (2.0 * t)).exp() / (2.0 * std::f64::consts::PI * t).sqrt();
        let p_u = p_x / level;
        original_fpt_density(f_u, level, p_u).unwrap()
    };
    // Closed-form crossing law of BM with drift -1/2 over log 2.
    let cdf = |a: f64, t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let rt = t.sqrt();
        normal::sf((a + 0.5 * t) / rt) + (-a).exp() * normal::cdf((-a + 0.5 * t) / rt)
    };
    // The identity against the closed form.
    let quad = fptlab::quadrature::integrate(|t| if t > 0.0 { density(t) } else { 0.0 }, 0.0, 1.0, fptlab::quadrature::QuadOptions::abs(1e-12));
    assert!((quad.value - cdf(l, 1.0)).abs() < 1e-9);

    let dt = 1e-4;
    let grid = PathGrid::with_step(1.0, dt).unwrap();
    let g = Boundary::constant(level, 1.0).unwrap();
    let dist = sample_fpt_original(&model, &g, 1.0, &grid, 20_000, 19, SimOptions::default()).unwrap();
    let n = dist.total() as f64;
    for (lo, hi) in [(0.0, 0.25), (0.25, 0.5), (0.5, 0.75), (0.75, 1.0)] {
        let mass = fptlab::quadrature::integrate(|t| if t > 0.0 { density(t) } else { 0.0 }, lo, hi, fptlab::quadrature::QuadOptions::abs(1e-12)).value;
        let count = dist.samples().iter().filter(|&&t| t > lo && t <= hi).count() as f64;
        let p = count / n;
        let se = (p * (1.0 - p) / n).sqrt();
        // Monitoring shift is applied in log space, where the noise is unit.
        let allowance = bin_mass_allowance(cdf, l, dt, lo, hi);
        assert!((p - mass).abs() < 3.0 * se + allowance, "({lo},{hi}]: {p} vs {mass}");
    }
}

#[test]
fn far_level_is_never_reached() {
    let tm = TransformedModel::brownian();
    let g = Boundary::linear(10.0, 0.0, 1.0).unwrap();
    let grid = PathGrid::with_step(1.0, 1e-2).unwrap();
    let d = sample_fpt(&tm, &g, 0.0, &grid, 10_000, 0).unwrap();
    assert_eq!(d.crossing_fraction(), 0.0);
}
