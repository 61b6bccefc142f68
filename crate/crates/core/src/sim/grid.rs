use serde::Serialize;

use crate::error::{ensure, Result};

/// Time grid `0 = t_0 < t_1 < ... < t_n = t_end`.
///
/// Usually uniform; [`PathGrid::two_regime`] switches to a finer step after
/// a split time, which is where pinned paths near the boundary pick up most
/// of their discretisation error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathGrid {
    times: Vec<f64>,
    #[serde(skip)]
    sqrt_steps: Vec<f64>,
}

impl PathGrid {
    pub fn uniform(t_end: f64, n_steps: usize) -> Result<Self> {
        ensure(t_end > 0.0 && t_end.is_finite(), || format!("grid end must be positive, got {t_end}"))?;
        ensure(n_steps >= 1, || "grid needs at least one step".into())?;
        let dt = t_end / n_steps as f64;
        let mut times: Vec<f64> = (0..=n_steps).map(|i| i as f64 * dt).collect();
        times[n_steps] = t_end;
        Ok(Self::from_times(times))
    }

    /// Uniform grid whose step is `step` or the closest value below it that
    /// divides `t_end`.
    pub fn with_step(t_end: f64, step: f64) -> Result<Self> {
        ensure(step > 0.0 && step.is_finite(), || format!("grid step must be positive, got {step}"))?;
        let n = (t_end / step - 1e-9).ceil().max(1.0) as usize;
        Self::uniform(t_end, n)
    }

    /// Step `step` on `[0, split]`, `fine_step` on `[split, t_end]`.
    pub fn two_regime(t_end: f64, step: f64, fine_step: f64, split: f64) -> Result<Self> {
        ensure(split > 0.0 && split < t_end, || format!("split {split} must lie inside (0, {t_end})"))?;
        let coarse = Self::with_step(split, step)?;
        let fine = Self::with_step(t_end - split, fine_step)?;
        let mut times = coarse.times;
        times.extend(fine.times[1..].iter().map(|&s| split + s));
        let last = times.len() - 1;
        times[last] = t_end;
        Ok(Self::from_times(times))
    }

    fn from_times(times: Vec<f64>) -> Self {
        let sqrt_steps = times.windows(2).map(|w| (w[1] - w[0]).sqrt()).collect();
        Self { times, sqrt_steps }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n_steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn t_end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn step(&self, i: usize) -> f64 {
        self.times[i + 1] - self.times[i]
    }

    pub(crate) fn sqrt_steps(&self) -> &[f64] {
        &self.sqrt_steps
    }

    /// Largest step on the grid.
    pub fn coarsest_step(&self) -> f64 {
        self.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Same number of points, times multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        ensure(factor > 0.0, || format!("grid scale must be positive, got {factor}"))?;
        Ok(Self::from_times(self.times.iter().map(|&t| t * factor).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_ends_exactly() {
        let g = PathGrid::uniform(1.0, 3).unwrap();
        assert_eq!(g.times().len(), 4);
        assert_eq!(g.t_end(), 1.0);
        assert_eq!(g.times()[0], 0.0);
        assert!(PathGrid::uniform(1.0, 0).is_err());
        assert!(PathGrid::uniform(0.0, 5).is_err());
    }

    #[test]
    fn two_regime_grid_matches_the_requested_steps() {
        let g = PathGrid::two_regime(1.0, 1e-4, 1e-5, 0.99).unwrap();
        assert_eq!(g.n_steps(), 9900 + 1000);
        assert!((g.step(0) - 1e-4).abs() < 1e-15);
        assert!((g.step(g.n_steps() - 1) - 1e-5).abs() < 1e-12);
        assert!((g.times()[9900] - 0.99).abs() < 1e-15);
        assert_eq!(g.t_end(), 1.0);
        assert!(g.times().windows(2).all(|w| w[1] > w[0]));
        assert!((g.coarsest_step() - 1e-4).abs() < 1e-12);
    }

    #[test]
    fn with_step_rounds_to_a_divisor() {
        let g = PathGrid::with_step(1.0, 1e-3).unwrap();
        assert_eq!(g.n_steps(), 1000);
        let g = PathGrid::with_step(1.0, 0.3).unwrap();
        assert_eq!(g.n_steps(), 4);
    }
}
