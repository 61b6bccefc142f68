use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::grid::PathGrid;
use super::stream::{path_rng, PathRng};

/// A realised path on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct PathSample {
    pub grid: PathGrid,
    pub values: Vec<f64>,
}

/// Fills `w` with a standard Brownian path on the grid (`w[0] = 0`).
#[inline]
pub(crate) fn fill_brownian(rng: &mut PathRng, sqrt_steps: &[f64], w: &mut Vec<f64>) {
    w.clear();
    w.reserve(sqrt_steps.len() + 1);
    let mut acc = 0.0;
    w.push(0.0);
    for &s in sqrt_steps {
        let z: f64 = rng.sample(StandardNormal);
        acc += s * z;
        w.push(acc);
    }
}

/// Turns a Brownian path `w` in place into the bridge from `x` to `z`:
/// `B_s = x + (s/t)((z - x) - W_t) + W_s`.
#[inline]
pub(crate) fn bridge_from_brownian(times: &[f64], x: f64, z: f64, w: &mut [f64]) {
    let n = w.len() - 1;
    let t = times[n];
    let shift = (z - x) - w[n];
    for (wi, &ti) in w.iter_mut().zip(times) {
        *wi += x + (ti / t) * shift;
    }
    w[0] = x;
    w[n] = z;
}

pub(crate) fn brownian_bridge_path(x: f64, z: f64, grid: &PathGrid, rng: &mut PathRng) -> Vec<f64> {
    let mut w = Vec::new();
    fill_brownian(rng, grid.sqrt_steps(), &mut w);
    bridge_from_brownian(grid.times(), x, z, &mut w);
    w
}

/// Brownian bridge from `x` at 0 to `z` at `grid.t_end()`, built from one
/// Brownian path on the grid. Path `index` of the stream family `seed`.
pub fn sample_brownian_bridge_indexed(x: f64, z: f64, grid: &PathGrid, seed: u64, index: u64) -> PathSample {
    let mut rng = path_rng(seed, index);
    PathSample { grid: grid.clone(), values: brownian_bridge_path(x, z, grid, &mut rng) }
}

pub fn sample_brownian_bridge(x: f64, z: f64, grid: &PathGrid, seed: u64) -> PathSample {
    sample_brownian_bridge_indexed(x, z, grid, seed, 0)
}

/// Rayleigh endpoint of the meander on `[0, 1]`.
#[inline]
pub(crate) fn draw_meander_endpoint(rng: &mut PathRng) -> f64 {
    let u: f64 = rng.random();
    (-2.0 * (1.0 - u).ln()).sqrt()
}

/// Meander on `[0, t_end]`: Rayleigh endpoint scaled by `sqrt(t_end)`, path
/// the Euclidean norm of a 3-d Brownian bridge from the origin to
/// `(r, 0, 0)` (a Bessel(3) bridge), which is the meander's conditional law
/// given its endpoint. The endpoint is drawn first, so endpoint-only
/// consumers see the same value as full-path ones.
pub(crate) fn meander_path(grid: &PathGrid, rng: &mut PathRng, out: &mut Vec<f64>, scratch: &mut Vec<f64>) {
    let times = grid.times();
    let t_end = grid.t_end();
    let n = times.len() - 1;
    let r = t_end.sqrt() * draw_meander_endpoint(rng);
    out.clear();
    out.resize(n + 1, 0.0);
    for coord in 0..3 {
        let target = if coord == 0 { r } else { 0.0 };
        fill_brownian(rng, grid.sqrt_steps(), scratch);
        let shift = target - scratch[n];
        for i in 0..=n {
            let b = (times[i] / t_end) * shift + scratch[i];
            out[i] += b * b;
        }
    }
    for v in out.iter_mut() {
        *v = v.sqrt();
    }
    out[0] = 0.0;
    out[n] = r;
}

pub fn sample_meander_indexed(grid: &PathGrid, seed: u64, index: u64) -> PathSample {
    let mut rng = path_rng(seed, index);
    let mut values = Vec::new();
    let mut scratch = Vec::new();
    meander_path(grid, &mut rng, &mut values, &mut scratch);
    PathSample { grid: grid.clone(), values }
}

pub fn sample_meander(grid: &PathGrid, seed: u64) -> PathSample {
    sample_meander_indexed(grid, seed, 0)
}

/// Meander endpoint (at `t_end = 1`) of path `index`, consistent with
/// [`sample_meander_indexed`] on any grid ending at 1.
pub fn meander_endpoint(seed: u64, index: u64) -> f64 {
    draw_meander_endpoint(&mut path_rng(seed, index))
}
