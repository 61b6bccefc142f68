mod common;

use common::{ks_distance, mean_and_se, rayleigh_cdf};
use fptlab::diffusion::{meander_endpoint_density, meander_laplace, meander_transition_density};
use fptlab::quadrature::{integrate_to_infinity, QuadOptions};
use fptlab::sim::{meander_endpoint, sample_brownian_bridge, sample_brownian_bridge_indexed, sample_meander_indexed, PathGrid};

#[test]
fn bridge_pins_both_ends() {
    let grid = PathGrid::uniform(2.0, 37).unwrap();
    for seed in 0..20 {
        let p = sample_brownian_bridge(0.3, 0.3, &grid, seed);
        assert_eq!(p.values[0], 0.3);
        assert_eq!(*p.values.last().unwrap(), 0.3);
        assert_eq!(p.values.len(), 38);
    }
}

#[test]
fn bridge_marginal_and_covariance() {
    let grid = PathGrid::uniform(1.0, 4).unwrap();
    let n = 100_000;
    let mut mid = Vec::with_capacity(n);
    let mut prod = Vec::with_capacity(n);
    for i in 0..n as u64 {
        let v = sample_brownian_bridge_indexed(0.0, 0.0, &grid, 17, i).values;
        mid.push(v[2]);
        prod.push(v[1] * v[3]);
    }
    let (m, se) = mean_and_se(&mid);
    assert!(m.abs() < 3.0 * se, "mean {m} se {se}");
    let sq: Vec<f64> = mid.iter().map(|x| x * x).collect();
    let (var, se_var) = mean_and_se(&sq);
    assert!((var - 0.25).abs() < 3.0 * se_var, "var {var} se {se_var}");
    let (cov, se_cov) = mean_and_se(&prod);
    assert!((cov - 0.0625).abs() < 3.0 * se_cov, "cov {cov} se {se_cov}");
}

#[test]
fn meander_endpoint_law() {
    let n = 100_000;
    let ends: Vec<f64> = (0..n as u64).map(|i| meander_endpoint(3, i)).collect();
    let ks = ks_distance(&ends, rayleigh_cdf);
    assert!(ks < 1.63 / (n as f64).sqrt(), "KS {ks}");
    let (m, se) = mean_and_se(&ends);
    assert!((m - (std::f64::consts::PI / 2.0).sqrt()).abs() < 3.0 * se);
    let e: Vec<f64> = ends.iter().map(|y| y.exp()).collect();
    let (m, se) = mean_and_se(&e);
    assert!((m - meander_laplace(1.0)).abs() < 3.0 * se, "{m} vs {}", meander_laplace(1.0));
}

#[test]
fn meander_paths_are_positive_and_share_the_endpoint_stream() {
    let grid = PathGrid::uniform(1.0, 64).unwrap();
    for i in 0..2000 {
        let p = sample_meander_indexed(&grid, 8, i).values;
        assert_eq!(p[0], 0.0);
        assert!(p[1..].iter().all(|&v| v > 0.0));
        assert_eq!(*p.last().unwrap(), meander_endpoint(8, i));
    }
}

#[test]
fn meander_marginal_matches_the_pinned_densities() {
    // E W+_{1/2} and P(W+_{1/2} <= 0.5) from the endpoint law mixed over the
    // pinned transition densities, against sampled paths.
    let opts = QuadOptions { abs_tol: 1e-9, rel_tol: 1e-9, max_panels: 2000 };
    let inner = |a: f64, f: &dyn Fn(f64) -> f64| {
        integrate_to_infinity(|z| if z > 0.0 { f(z) * meander_transition_density(a, 0.0, 0.0, 0.5, z).unwrap() } else { 0.0 }, 0.0, opts).value
    };
    let mean = integrate_to_infinity(|a| if a > 0.0 { meander_endpoint_density(a) * inner(a, &|z| z) } else { 0.0 }, 0.0, opts).value;
    let below = integrate_to_infinity(
        |a| if a > 0.0 { meander_endpoint_density(a) * inner(a, &|z| if z <= 0.5 { 1.0 } else { 0.0 }) } else { 0.0 },
        0.0,
        opts,
    )
    .value;

    let grid = PathGrid::uniform(1.0, 2).unwrap();
    let mids: Vec<f64> = (0..100_000).map(|i| sample_meander_indexed(&grid, 21, i).values[1]).collect();
    let (m, se) = mean_and_se(&mids);
    assert!((m - mean).abs() < 3.0 * se, "mean {m} vs {mean}");
    let ind: Vec<f64> = mids.iter().map(|&z| if z <= 0.5 { 1.0 } else { 0.0 }).collect();
    let (p, se) = mean_and_se(&ind);
    assert!((p - below).abs() < 3.0 * se, "P {p} vs {below}");
}
