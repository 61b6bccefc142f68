//! Result envelope and its JSON / CSV renderings.
//!
//! Schema 1:
//!
//! ```text
//! { tool, version, schema, command, inputs, results: [Entry], detail, wall_time_s }
//! ```
//!
//! Every entry carries a `method` tag. Monte-Carlo entries always carry
//! `stderr`, `n`, `seed` and `grid_step`; quadrature entries carry the
//! quadrature error estimate in `stderr`.

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    MonteCarlo,
    Quadrature,
}

impl Method {
    fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::MonteCarlo => "monte_carlo",
            Method::Quadrature => "quadrature",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Entry {
    pub name: String,
    /// Evaluation time for curve entries.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
}

impl Entry {
    pub fn closed(name: impl Into<String>, value: f64) -> Self {
        Self { name: name.into(), t: None, value, stderr: None, method: Method::ClosedForm, n: None, seed: None, grid_step: None }
    }

    pub fn quadrature(name: impl Into<String>, value: f64, abs_error: f64) -> Self {
        Self { stderr: Some(abs_error), method: Method::Quadrature, ..Self::closed(name, value) }
    }

    pub fn mc(name: impl Into<String>, value: f64, stderr: f64, n: usize, seed: u64, grid_step: f64) -> Self {
        Self {
            stderr: Some(stderr),
            method: Method::MonteCarlo,
            n: Some(n),
            seed: Some(seed),
            grid_step: Some(grid_step),
            ..Self::closed(name, value)
        }
    }

    pub fn at(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }
}

/// Output of one subcommand before wrapping.
#[derive(Debug, Default)]
pub struct Report {
    pub results: Vec<Entry>,
    pub detail: Value,
    /// Table written instead of the entry list under `--format csv`.
    pub csv: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct Envelope {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema: u32,
    pub command: String,
    pub inputs: Value,
    pub results: Vec<Entry>,
    pub detail: Value,
    pub wall_time_s: f64,
}

impl Envelope {
    pub fn new(command: &str, inputs: Value, report: &Report, wall_time_s: f64) -> Self {
        Self {
            tool: "fptlab",
            version: env!("CARGO_PKG_VERSION"),
            schema: SCHEMA,
            command: command.to_string(),
            inputs,
            results: report.results.clone(),
            detail: report.detail.clone(),
            wall_time_s,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("envelope serialises");
        s.push('\n');
        s
    }
}

/// Shortest round-trip form, switching to exponent notation for very small
/// or very large magnitudes.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `name,t,value,stderr,method,n,seed,grid_step` rows.
pub fn entries_csv(entries: &[Entry]) -> String {
    let mut out = String::from("name,t,value,stderr,method,n,seed,grid_step\n");
    for e in entries {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            e.name,
            e.t.map(num).unwrap_or_default(),
            num(e.value),
            e.stderr.map(num).unwrap_or_default(),
            e.method.as_str(),
            cell(e.n),
            cell(e.seed),
            e.grid_step.map(num).unwrap_or_default()
        ));
    }
    out
}
