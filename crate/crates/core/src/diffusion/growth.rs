use serde::Serialize;

use super::model::TransformedModel;
use crate::error::{ensure, Result};

/// Numeric scan of `mu' + mu^2` supporting the growth conditions on the
/// drift. A pass is evidence, not a proof.
///
/// `limsup_ratio` is the largest `Q(y) / y^2` over the negative tail of the
/// grid, with `Q = max(0, -(mu' + mu^2))` and the tail being the grid points
/// at or below half the (negative) lower end of the range.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthDiagnostic {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub min_value: f64,
    pub tail_points: usize,
    pub limsup_ratio: f64,
    /// `4 / t^2`, the bound for the crossing asymptotics at time `t`.
    pub threshold_fpt: f64,
    /// `1`, the bound for the boundary derivative.
    pub threshold_gateaux: f64,
    pub passes_fpt: bool,
    pub passes_gateaux: bool,
}

pub fn check_growth_condition(
    tm: &TransformedModel,
    t: f64,
    y_lo: f64,
    y_hi: f64,
    n: usize,
) -> Result<GrowthDiagnostic> {
    ensure(n >= 2, || format!("growth scan needs at least 2 points, got {n}"))?;
    ensure(y_lo < y_hi, || format!("empty scan range [{y_lo}, {y_hi}]"))?;
    ensure(t > 0.0, || format!("time must be positive, got {t}"))?;
    let grid: Vec<f64> = (0..n).map(|i| y_lo + (y_hi - y_lo) * i as f64 / (n - 1) as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&y| tm.girsanov_potential(y)).collect();
    let min_value = values.iter().copied().fold(f64::INFINITY, f64::min);

    let cutoff = 0.5 * y_lo;
    let mut tail_points = 0;
    let mut ratio: f64 = 0.0;
    if y_lo < 0.0 {
        for (&y, &v) in grid.iter().zip(&values) {
            if y <= cutoff && y < 0.0 {
                tail_points += 1;
                let q = (-v).max(0.0);
                ratio = ratio.max(q / (y * y));
            }
        }
    }
    let threshold_fpt = 4.0 / (t * t);
    Ok(GrowthDiagnostic {
        grid,
        values,
        min_value,
        tail_points,
        limsup_ratio: ratio,
        threshold_fpt,
        threshold_gateaux: 1.0,
        passes_fpt: ratio < threshold_fpt,
        passes_gateaux: ratio < 1.0,
    })
}
