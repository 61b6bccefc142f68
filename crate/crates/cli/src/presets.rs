//! Model and boundary presets accepted on the command line.

use std::path::Path;
use std::sync::Arc;

use fptlab::diffusion::{daniels_boundary, Boundary, PiecewisePolynomial, TransformedModel};
use fptlab::fpt::KernelFn;
use fptlab::normal;
use fptlab::sim::PathGrid;

use crate::error::CliError;

/// `bm`, `drift:c` or `ou:theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec {
    Brownian,
    Drift(f64),
    OrnsteinUhlenbeck(f64),
}

impl ModelSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let text = text.trim();
        if text.eq_ignore_ascii_case("bm") {
            return Ok(ModelSpec::Brownian);
        }
        let (name, arg) = text
            .split_once(':')
            .ok_or_else(|| CliError::invalid(format!("unknown model '{text}' (expected bm, drift:c or ou:theta)")))?;
        let v = parse_real(arg, "model parameter")?;
        match name.to_ascii_lowercase().as_str() {
            "drift" => Ok(ModelSpec::Drift(v)),
            "ou" => Ok(ModelSpec::OrnsteinUhlenbeck(v)),
            _ => Err(CliError::invalid(format!("unknown model '{name}' (expected bm, drift:c or ou:theta)"))),
        }
    }

    pub fn transformed(&self) -> TransformedModel {
        match *self {
            ModelSpec::Brownian => TransformedModel::brownian(),
            ModelSpec::Drift(c) => TransformedModel::constant_drift(c),
            ModelSpec::OrnsteinUhlenbeck(theta) => TransformedModel::ornstein_uhlenbeck(theta),
        }
    }

    /// Constant drift of the model, if it has one.
    pub fn constant_drift(&self) -> Option<f64> {
        match *self {
            ModelSpec::Brownian => Some(0.0),
            ModelSpec::Drift(c) => Some(c),
            ModelSpec::OrnsteinUhlenbeck(0.0) => Some(0.0),
            ModelSpec::OrnsteinUhlenbeck(_) => None,
        }
    }

    /// Gaussian transition density of the preset.
    pub fn kernel(&self) -> KernelFn {
        match *self {
            ModelSpec::Brownian => Arc::new(|t, x, z| gaussian(z, x, t)),
            ModelSpec::Drift(c) => Arc::new(move |t, x, z| gaussian(z, x + c * t, t)),
            ModelSpec::OrnsteinUhlenbeck(0.0) => Arc::new(|t, x, z| gaussian(z, x, t)),
            ModelSpec::OrnsteinUhlenbeck(theta) => Arc::new(move |t, x, z| {
                let var = -(-2.0 * theta * t).exp_m1() / (2.0 * theta);
                gaussian(z, x * (-theta * t).exp(), var)
            }),
        }
    }
}

fn gaussian(z: f64, mean: f64, var: f64) -> f64 {
    if !(var > 0.0) {
        return 0.0;
    }
    let sd = var.sqrt();
    normal::pdf((z - mean) / sd) / sd
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundarySpec {
    Linear { a: f64, b: f64 },
    Daniels { delta: f64, k1: f64, k2: f64 },
    Table(PiecewisePolynomial),
}

impl BoundarySpec {
    pub fn from_flags(
        linear: Option<&str>,
        daniels: Option<&str>,
        file: Option<&Path>,
    ) -> Result<Option<Self>, CliError> {
        if let Some(s) = linear {
            let v = parse_list(s, 2, "--linear")?;
            return Ok(Some(BoundarySpec::Linear { a: v[0], b: v[1] }));
        }
        if let Some(s) = daniels {
            let v = parse_list(s, 3, "--daniels")?;
            return Ok(Some(BoundarySpec::Daniels { delta: v[0], k1: v[1], k2: v[2] }));
        }
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))?;
            return Ok(Some(BoundarySpec::Table(PiecewisePolynomial::parse(&text)?)));
        }
        Ok(None)
    }

    pub fn build(&self, horizon: f64) -> Result<Boundary, CliError> {
        Ok(match self {
            BoundarySpec::Linear { a, b } => Boundary::linear(*a, *b, horizon)?,
            BoundarySpec::Daniels { delta, k1, k2 } => daniels_boundary(*delta, *k1, *k2, horizon)?,
            BoundarySpec::Table(poly) => Boundary::piecewise_polynomial(poly.clone(), horizon)?,
        })
    }
}

pub fn parse_real(s: &str, what: &str) -> Result<f64, CliError> {
    let v: f64 = s.trim().parse().map_err(|_| CliError::invalid(format!("{what}: '{s}' is not a number")))?;
    if !v.is_finite() {
        return Err(CliError::invalid(format!("{what}: '{s}' is not finite")));
    }
    Ok(v)
}

/// Comma-separated reals; `len = 0` accepts any non-empty list.
pub fn parse_list(s: &str, len: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let v = s.split(',').map(|p| parse_real(p, what)).collect::<Result<Vec<_>, _>>()?;
    if (len > 0 && v.len() != len) || v.is_empty() {
        return Err(CliError::invalid(format!("{what} expects {len} comma-separated numbers, got '{s}'")));
    }
    Ok(v)
}

/// Grid settings from `--step`, `--step2` and `--split`. The split is a
/// fraction of the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub step: f64,
    pub fine: Option<(f64, f64)>,
}

impl GridSpec {
    pub fn new(step: f64, step2: Option<f64>, split: Option<f64>) -> Result<Self, CliError> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(CliError::invalid(format!("--step must be positive, got {step}")));
        }
        let fine = match (step2, split) {
            (None, None) => None,
            (Some(s2), Some(sp)) => {
                if !(s2 > 0.0 && s2.is_finite()) {
                    return Err(CliError::invalid(format!("--step2 must be positive, got {s2}")));
                }
                if !(sp > 0.0 && sp < 1.0) {
                    return Err(CliError::invalid(format!("--split is a fraction of the horizon in (0, 1), got {sp}")));
                }
                Some((s2, sp))
            }
            _ => return Err(CliError::usage("--step2 and --split must be given together")),
        };
        Ok(Self { step, fine })
    }

    pub fn build(&self, t_end: f64) -> Result<PathGrid, CliError> {
        Ok(match self.fine {
            None => PathGrid::with_step(t_end, self.step)?,
            Some((fine, split)) => PathGrid::two_regime(t_end, self.step, fine, split * t_end)?,
        })
    }
}
