mod common;

use std::sync::Arc;

use common::BGK_BETA;
use fptlab::diffusion::{linear_noncross_prob, Boundary, TransformedModel};
use fptlab::sim::{
    default_offsets, estimate_cond_noncross_prob, estimate_cond_noncross_prob_with, estimate_f_regression, path_rng,
    PathGrid, RegressionOptions, SimOptions,
};
use rand::Rng;
use rand_distr::StandardNormal;

fn exact_level_one() -> f64 {
    linear_noncross_prob(0.0, 1.0, 1.0, 1.0, 0.0).unwrap()
}

/// Discrete-monitoring excess for the unit level, bridge 0 -> 0 on [0, 1].
fn bias(dt: f64) -> f64 {
    let s = 1.0 + BGK_BETA * dt.sqrt();
    linear_noncross_prob(0.0, s, s, 1.0, 0.0).unwrap() - exact_level_one()
}

#[test]
fn brownian_bridge_estimate_against_closed_form() {
    let tm = TransformedModel::brownian();
    let g = Boundary::constant(1.0, 1.0).unwrap();
    let exact = exact_level_one();
    let mut prev: Option<fptlab::sim::MCEstimate> = None;
    for &dt in &[1e-2, 1e-3, 1e-4] {
        let grid = PathGrid::with_step(1.0, dt).unwrap();
        let e = estimate_cond_noncross_prob(&tm, &g, 1.0, 0.0, 0.0, &grid, 10_000, 5).unwrap();
        let err = (e.value - exact).abs();
        assert!(err < 3.0 * e.stderr + bias(dt), "dt={dt}: {} vs {exact}", e.value);
        if let Some(p) = prev {
            let se = (p.stderr * p.stderr + e.stderr * e.stderr).sqrt();
            assert!(p.value >= e.value - 3.0 * se, "bias not monotone at dt={dt}");
        }
        prev = Some(e);
    }
    assert!(bias(1e-2) > bias(1e-3) && bias(1e-3) > bias(1e-4));
}

#[test]
fn bridge_correction_removes_the_monitoring_bias() {
    let tm = TransformedModel::brownian();
    let g = Boundary::linear(1.0, -0.5, 1.0).unwrap();
    let grid = PathGrid::uniform(1.0, 20).unwrap();
    let opts = SimOptions { bridge_correction: true, ..SimOptions::default() };
    let e = estimate_cond_noncross_prob_with(&tm, &g, 1.0, 0.0, 0.2, &grid, 40_000, 2, 0, opts).unwrap();
    let exact = linear_noncross_prob(0.0, 1.0, 0.5, 1.0, 0.2).unwrap();
    assert!((e.value - exact).abs() < 3.0 * e.stderr, "{} vs {exact}", e.value);
}

#[test]
fn constant_drift_is_invisible_to_the_pinned_law() {
    let g = Boundary::linear(0.8, 0.4, 1.0).unwrap();
    let grid = PathGrid::uniform(1.0, 500).unwrap();
    let base = estimate_cond_noncross_prob(&TransformedModel::brownian(), &g, 1.0, 0.0, 0.5, &grid, 5000, 77).unwrap();
    for &c in &[-2.0, 0.3, 5.0] {
        let e = estimate_cond_noncross_prob(&TransformedModel::constant_drift(c), &g, 1.0, 0.0, 0.5, &grid, 5000, 77).unwrap();
        assert_eq!(e, base);
    }
}

/// Exact Ornstein–Uhlenbeck bridge from 0 to `z` on the grid: an exact OU
/// path conditioned on its endpoint by Gaussian regression.
fn ou_bridge_noncross(theta: f64, z: f64, level: f64, grid: &PathGrid, n: u64, seed: u64) -> (f64, f64) {
    let times = grid.times();
    let t = grid.t_end();
    let var_t = -(-2.0 * theta * t).exp_m1() / (2.0 * theta);
    let coef: Vec<f64> = times
        .iter()
        .map(|&s| (-theta * (t - s)).exp() * -(-2.0 * theta * s).exp_m1() / (2.0 * theta) / var_t)
        .collect();
    let mut hits = 0.0;
    let mut path = vec![0.0; times.len()];
    for i in 0..n {
        let mut rng = path_rng(seed, i);
        for k in 1..times.len() {
            let dt = times[k] - times[k - 1];
            let a = (-theta * dt).exp();
            let sd = (-(-2.0 * theta * dt).exp_m1() / (2.0 * theta)).sqrt();
            let e: f64 = rng.sample(StandardNormal);
            path[k] = a * path[k - 1] + sd * e;
        }
        let end = path[times.len() - 1];
        if path.iter().zip(&coef).all(|(&x, &c)| x + c * (z - end) < level) {
            hits += 1.0;
        }
    }
    let p = hits / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

#[test]
fn weighted_bridges_reproduce_the_ou_bridge() {
    let theta = 1.5;
    let grid = PathGrid::uniform(1.0, 400).unwrap();
    let g = Boundary::constant(0.8, 1.0).unwrap();
    let (oracle, se_o) = ou_bridge_noncross(theta, -0.5, 0.8, &grid, 40_000, 1234);
    for tm in [
        TransformedModel::ornstein_uhlenbeck(theta),
        TransformedModel::from_unit_drift(Arc::new(move |x| -theta * x), Arc::new(move |_| -theta), Arc::new(move |x| -0.5 * theta * x * x)),
    ] {
        let e = estimate_cond_noncross_prob(&tm, &g, 1.0, 0.0, -0.5, &grid, 40_000, 99).unwrap();
        let se = (e.stderr * e.stderr + se_o * se_o).sqrt();
        assert!((e.value - oracle).abs() < 3.0 * se, "{} vs OU oracle {oracle}", e.value);
    }
    // Without the weights the answer is the Brownian one, which differs.
    let bm = estimate_cond_noncross_prob(&TransformedModel::brownian(), &g, 1.0, 0.0, -0.5, &grid, 40_000, 99).unwrap();
    assert!((bm.value - oracle).abs() > 3.0 * bm.stderr);
}

#[test]
fn results_do_not_depend_on_the_thread_count() {
    let tm = TransformedModel::ornstein_uhlenbeck(0.7);
    let g = Boundary::linear(1.0, 0.2, 1.0).unwrap();
    let grid = PathGrid::uniform(1.0, 200).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| estimate_cond_noncross_prob(&tm, &g, 1.0, 0.0, 0.3, &grid, 3000, 31).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
}

#[test]
fn regression_slope_for_the_unit_level() {
    // Bridge-corrected probabilities are exact for a constant level, so the
    // through-origin fit sees 1 - exp(-2d); its slope sits just below 2.
    let tm = TransformedModel::brownian();
    let g = Boundary::constant(1.0, 1.0).unwrap();
    let grid = PathGrid::uniform(1.0, 100).unwrap();
    let opts = RegressionOptions { through_origin: true, sim: SimOptions { bridge_correction: true, ..SimOptions::default() } };
    let f = estimate_f_regression(&tm, &g, 1.0, 0.0, 0.02, &default_offsets(0.02, 10), 40_000, &grid, 8, opts).unwrap();
    assert!((f.slope / 2.0 - 1.0).abs() < 0.05, "slope {} +- {}", f.slope, f.slope_stderr);
    assert!(f.points.iter().all(|p| p.offset > 0.0 && p.offset <= 0.02));
}
