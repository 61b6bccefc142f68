use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "fptlab",
    version,
    about = "First-passage-time densities, crossing asymptotics and boundary sensitivities for 1-D diffusions",
    after_help = "Results are written as a JSON envelope (default) or CSV. \
                  FPTLAB_THREADS caps the number of worker threads; results do not depend on it."
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Seed of the random stream family; drawn from the clock when omitted
    /// and echoed in the output.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of Monte-Carlo paths (per offset for regressions). Accepts 1e5.
    #[arg(long, global = true, value_parser = parse_count)]
    pub n: Option<usize>,
    /// Simulation grid step.
    #[arg(long, global = true)]
    pub step: Option<f64>,
    /// Fine step used after the split.
    #[arg(long, global = true)]
    pub step2: Option<f64>,
    /// Where the fine step starts, as a fraction of the horizon.
    #[arg(long, global = true)]
    pub split: Option<f64>,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    #[serde(skip)]
    pub format: Format,
}

pub fn parse_count(s: &str) -> Result<usize, String> {
    if let Ok(n) = s.parse::<usize>() {
        return Ok(n);
    }
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a count"))?;
    if v >= 0.0 && v.fract() == 0.0 && v <= 1e15 {
        Ok(v as usize)
    } else {
        Err(format!("'{s}' is not a non-negative integer"))
    }
}

#[derive(Debug, Clone, Default, Args, Serialize)]
#[group(multiple = false)]
pub struct BoundaryArgs {
    /// Linear boundary `a + b t`.
    #[arg(long, value_name = "A,B", allow_hyphen_values = true)]
    pub linear: Option<String>,
    /// Daniels boundary with parameters delta, kappa1, kappa2.
    #[arg(long, value_name = "D,K1,K2", allow_hyphen_values = true)]
    pub daniels: Option<String>,
    /// Piecewise-polynomial boundary: lines `start end c0 c1 ...`.
    #[arg(long, value_name = "PATH")]
    pub boundary_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArg {
    /// Process: `bm`, `drift:c` (Brownian motion with drift c) or `ou:theta`
    /// (dX = -theta X dt + dW).
    #[arg(long, default_value = "bm", allow_hyphen_values = true)]
    pub model: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TimesArg {
    /// Comma-separated evaluation times.
    #[arg(long, value_name = "T1,T2,...", conflicts_with_all = ["t_max", "points"])]
    pub ts: Option<String>,
    /// Largest evaluation time for an evenly spaced grid.
    #[arg(long, default_value_t = 1.0)]
    pub t_max: f64,
    /// Number of evenly spaced evaluation times in (0, t-max].
    #[arg(long, default_value_t = 20)]
    pub points: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Conditional non-crossing probability of the pinned process
    /// (Girsanov-weighted Brownian bridges).
    CondProb(CondProbArgs),
    /// Crossing-asymptotic coefficient f(t, x) by regression on small offsets.
    EstimateF(EstimateFArgs),
    /// First-passage density curve.
    FptDensity(FptDensityArgs),
    /// First-passage density of the process pinned at (T, y).
    BridgeFpt(BridgeFptArgs),
    /// Daniels boundary: value, f(t, x) and first-passage density.
    Daniels(DanielsArgs),
    /// First-passage density over a constant level via Kendall's identity.
    Kendall(KendallArgs),
    /// Meander endpoint density, Laplace transform and pinned transition density.
    MeanderDensity(MeanderArgs),
    /// Gateaux derivative of the non-crossing probability on [0, 1].
    Gateaux(GateauxArgs),
    /// Closed form against quadrature for Brownian motion and linear g, h.
    VerifyExample1(VerifyExample1Args),
    /// Regression estimate of f(1, 0) for the Daniels boundary against the exact value.
    VerifyExample2(VerifyExample2Args),
    /// Growth-condition scan of the drift and boundary Lipschitz constants.
    CheckConditions(CheckConditionsArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CondProb(_) => "cond-prob",
            Command::EstimateF(_) => "estimate-f",
            Command::FptDensity(_) => "fpt-density",
            Command::BridgeFpt(_) => "bridge-fpt",
            Command::Daniels(_) => "daniels",
            Command::Kendall(_) => "kendall",
            Command::MeanderDensity(_) => "meander-density",
            Command::Gateaux(_) => "gateaux",
            Command::VerifyExample1(_) => "verify-example1",
            Command::VerifyExample2(_) => "verify-example2",
            Command::CheckConditions(_) => "check-conditions",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct CondProbArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub boundary: BoundaryArgs,
    /// Pinning time.
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Start point.
    #[arg(long, default_value_t = 0.0)]
    pub x: f64,
    /// Pinned end point, at or below g(t).
    #[arg(long)]
    pub z: f64,
    /// Add the within-step Brownian-bridge crossing probability.
    #[arg(long)]
    pub bridge_correction: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct EstimateFArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub boundary: BoundaryArgs,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 0.0)]
    pub x: f64,
    /// Largest offset below g(t).
    #[arg(long, default_value_t = 0.1)]
    pub window: f64,
    /// Number of evenly spaced offsets in (0, window].
    #[arg(long, default_value_t = 50)]
    pub offsets: usize,
    /// Fit an intercept instead of forcing the line through the origin.
    #[arg(long)]
    pub free_intercept: bool,
    #[arg(long)]
    pub bridge_correction: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityMethodArg {
    /// Closed form where one exists.
    Closed,
    /// f(t, x) by regression times the transition density.
    Regression,
    /// Histogram of Euler first-passage times.
    Histogram,
    /// Kernel density estimate of Euler first-passage times.
    Kde,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct FptDensityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub boundary: BoundaryArgs,
    #[arg(long, default_value_t = 0.0)]
    pub x: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub times: TimesArg,
    #[arg(long, value_enum, default_value_t = DensityMethodArg::Regression)]
    pub method: DensityMethodArg,
    /// Regression window.
    #[arg(long, default_value_t = 0.1)]
    pub window: f64,
    /// Regression offsets per time point.
    #[arg(long, default_value_t = 20)]
    pub offsets: usize,
    /// Histogram bins (Freedman–Diaconis when omitted).
    #[arg(long)]
    pub bins: Option<usize>,
    /// Kernel bandwidth (Silverman when omitted).
    #[arg(long)]
    pub bandwidth: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BridgeMethodArg {
    /// Closed-form free density where one exists, regression otherwise.
    Auto,
    Regression,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct BridgeFptArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub boundary: BoundaryArgs,
    #[arg(long, default_value_t = 0.0)]
    pub x: f64,
    /// Pinning time.
    #[arg(long = "pin-time", default_value_t = 1.0)]
    pub pin_time: f64,
    /// Pinning level.
    #[arg(long)]
    pub y: f64,
    /// Evaluation times in (0, pin-time); an evenly spaced grid when omitted.
    #[arg(long, value_name = "T1,T2,...")]
    pub ts: Option<String>,
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = BridgeMethodArg::Auto)]
    pub method: BridgeMethodArg,
    #[arg(long, default_value_t = 0.1)]
    pub window: f64,
    #[arg(long, default_value_t = 20)]
    pub offsets: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct DanielsArgs {
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub k1: f64,
    #[arg(long, default_value_t = 0.5)]
    pub k2: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 0.0)]
    pub x: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct KendallArgs {
    /// Model: `bm` or `drift:c`.
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArg,
    /// Level.
    #[arg(long)]
    pub y: f64,
    #[arg(long, default_value_t = 0.0)]
    pub x: f64,
    #[arg(long)]
    pub t: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct MeanderArgs {
    /// Endpoint density at y.
    #[arg(long)]
    pub endpoint: Option<f64>,
    /// E exp(lambda W_1^+).
    #[arg(long)]
    pub laplace: Option<f64>,
    /// Pinned-meander transition density at `a,s,y,t,z` (s = 0 means from the origin).
    #[arg(long, value_name = "A,S,Y,T,Z")]
    pub pinned: Option<String>,
    /// Also estimate E exp(lambda W_1^+) and the Rayleigh KS distance from
    /// `--n` sampled endpoints.
    #[arg(long)]
    pub mc: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FptLawArg {
    /// Closed form when known, Euler samples otherwise.
    Auto,
    Closed,
    Sample,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct GateauxArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArg,
    /// Boundary g; the process starts at 0 below g(0).
    #[command(flatten)]
    #[serde(flatten)]
    pub boundary: BoundaryArgs,
    /// Direction h(t) = a + b t.
    #[arg(long, value_name = "A,B", allow_hyphen_values = true, conflicts_with = "h_file")]
    pub h_linear: Option<String>,
    /// Direction h as a piecewise-polynomial table.
    #[arg(long, value_name = "PATH")]
    pub h_file: Option<PathBuf>,
    /// Law of the crossing time of g.
    #[arg(long, value_enum, default_value_t = FptLawArg::Auto)]
    pub fpt: FptLawArg,
    /// Euler paths for a sampled crossing law.
    #[arg(long, default_value = "100000", value_parser = parse_count)]
    pub fpt_n: usize,
    /// Euler step for a sampled crossing law.
    #[arg(long, default_value_t = 1e-3)]
    pub fpt_step: f64,
    /// Crossing times within t-min of 1 are dropped.
    #[arg(long, default_value_t = 1e-4)]
    pub t_min: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct VerifyExample1Args {
    #[arg(long, default_value_t = 1.0)]
    pub a1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub a2: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b2: f64,
    /// Quadrature tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Also run the meander Monte-Carlo pipeline with `--n` paths.
    #[arg(long)]
    pub mc: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct VerifyExample2Args {
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub k1: f64,
    #[arg(long, default_value_t = 0.5)]
    pub k2: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 0.0)]
    pub x: f64,
    #[arg(long, default_value_t = 0.1)]
    pub window: f64,
    #[arg(long, default_value_t = 50)]
    pub offsets: usize,
    #[arg(long)]
    pub free_intercept: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct CheckConditionsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub boundary: BoundaryArgs,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = -10.0)]
    pub y_lo: f64,
    #[arg(long, default_value_t = 10.0)]
    pub y_hi: f64,
    #[arg(long = "scan-points", default_value_t = 401)]
    pub scan_points: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn counts_accept_scientific_notation() {
        assert_eq!(parse_count("1e5"), Ok(100_000));
        assert_eq!(parse_count("250"), Ok(250));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
    }

    #[test]
    fn negative_values_and_global_flags_parse() {
        let cli = Cli::try_parse_from([
            "fptlab", "verify-example1", "--a2", "-0.5", "--b1", "-1", "--seed", "3",
        ])
        .unwrap();
        assert_eq!(cli.common.seed, Some(3));
        match cli.command {
            Command::VerifyExample1(a) => assert_eq!((a.a2, a.b1), (-0.5, -1.0)),
            _ => panic!("wrong subcommand"),
        }
        let cli = Cli::try_parse_from(["fptlab", "--n", "1e3", "cond-prob", "--linear", "-1,2", "--z", "-0.5"]).unwrap();
        assert_eq!(cli.common.n, Some(1000));
    }
}
