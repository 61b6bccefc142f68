use rand::Rng;
use rand_distr::StandardNormal;

use super::estimate::SimOptions;
use super::grid::PathGrid;
use super::stream::{map_paths, path_rng};
use crate::diffusion::{Boundary, DiffusionModel, TransformedModel};
use crate::error::{ensure, Error, Result};
use crate::fpt::FptDistribution;

enum Crossing {
    At(f64),
    Censored,
    Exploded,
}

/// Euler–Maruyama first-passage sampler for `dX = a(X) ds + b(X) dW`.
fn sample_crossings<A, B>(
    drift: A,
    diffusion: B,
    boundary: &Boundary,
    x: f64,
    grid: &PathGrid,
    n: usize,
    seed: u64,
    opts: SimOptions,
) -> Result<FptDistribution>
where
    A: Fn(f64) -> f64 + Sync,
    B: Fn(f64) -> f64 + Sync,
{
    ensure(n >= 1, || "need at least one path".into())?;
    ensure(grid.t_end() <= boundary.horizon() * (1.0 + 1e-12), || {
        format!("grid ends at {} beyond the boundary horizon {}", grid.t_end(), boundary.horizon())
    })?;
    let times = grid.times();
    let g = boundary.values_on(times);
    ensure(x < g[0], || format!("start {x} must lie below g(0) = {}", g[0]))?;
    let sqrt_steps = grid.sqrt_steps();

    let outcomes = map_paths(0, n, || (), |_, index| {
        let mut rng = path_rng(seed, index);
        let mut xi = x;
        for i in 0..sqrt_steps.len() {
            let dt = times[i + 1] - times[i];
            let z: f64 = rng.sample(StandardNormal);
            let b = diffusion(xi);
            let next = xi + drift(xi) * dt + b * sqrt_steps[i] * z;
            if !next.is_finite() || next.abs() > opts.explosion_guard {
                return Crossing::Exploded;
            }
            if next > g[i + 1] {
                return Crossing::At(times[i + 1]);
            }
            if opts.bridge_correction {
                let d0 = g[i] - xi;
                let d1 = g[i + 1] - next;
                let p = (-2.0 * d0 * d1 / (b * b * dt)).exp();
                let u: f64 = rng.random();
                if u < p {
                    return Crossing::At(times[i + 1]);
                }
            }
            xi = next;
        }
        Crossing::Censored
    });

    let mut samples = Vec::new();
    let mut censored = 0;
    let mut excluded = 0;
    for o in outcomes {
        match o {
            Crossing::At(t) => samples.push(t),
            Crossing::Censored => censored += 1,
            Crossing::Exploded => excluded += 1,
        }
    }
    if excluded as f64 > opts.max_excluded_fraction * n as f64 {
        return Err(Error::numerical(format!("{excluded} of {n} paths exceeded the explosion guard")));
    }
    FptDistribution::empirical(samples, censored, excluded, grid.t_end())
}

/// Empirical law of `tau = inf{s > 0 : X_s > g(s)}` for the unit-diffusion
/// model, from `n` Euler–Maruyama paths started at `x`. Crossings are
/// detected at grid times; paths that never cross are censored.
pub fn sample_fpt(
    tm: &TransformedModel,
    boundary: &Boundary,
    x: f64,
    grid: &PathGrid,
    n: usize,
    seed: u64,
) -> Result<FptDistribution> {
    sample_fpt_with(tm, boundary, x, grid, n, seed, SimOptions::default())
}

pub fn sample_fpt_with(
    tm: &TransformedModel,
    boundary: &Boundary,
    x: f64,
    grid: &PathGrid,
    n: usize,
    seed: u64,
    opts: SimOptions,
) -> Result<FptDistribution> {
    if let Some(c) = constant_drift(tm) {
        return sample_crossings(|_| c, |_| 1.0, boundary, x, grid, n, seed, opts);
    }
    sample_crossings(|y| tm.mu(y), |_| 1.0, boundary, x, grid, n, seed, opts)
}

fn constant_drift(tm: &TransformedModel) -> Option<f64> {
    tm.constant_potential().map(|_| tm.mu(0.0))
}

/// As [`sample_fpt`] for the original diffusion `dU = nu ds + sigma dW`
/// started at `u0`, without any state transform.
pub fn sample_fpt_original(
    model: &DiffusionModel,
    boundary: &Boundary,
    u0: f64,
    grid: &PathGrid,
    n: usize,
    seed: u64,
    opts: SimOptions,
) -> Result<FptDistribution> {
    ensure(model.interval().contains(u0), || format!("start {u0} is outside the diffusion interval"))?;
    sample_crossings(|y| model.nu(y), |y| model.sigma(y), boundary, u0, grid, n, seed, opts)
}
