mod args;
mod commands;
mod envelope;
mod error;
mod presets;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use serde::Serialize;
use serde_json::Value;

use args::{Cli, Command, Format};
use commands::Ctx;
use envelope::{entries_csv, Envelope, Report};
use error::CliError;

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("FPTLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::invalid(format!("FPTLAB_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::invalid(format!("cannot size the thread pool: {e}")))
}

/// Subcommand arguments merged with the shared flags, seed resolved.
fn echo<T: Serialize>(args: &T, ctx: &Ctx) -> Value {
    let mut v = serde_json::to_value(args).expect("arguments serialise");
    let mut common = ctx.common.clone();
    common.seed = ctx.used_seed().or(common.seed);
    if let (Value::Object(map), Value::Object(extra)) = (&mut v, serde_json::to_value(&common).expect("flags serialise")) {
        map.extend(extra);
    }
    v
}

fn dispatch(cmd: &Command, ctx: &Ctx) -> Result<(Report, Value), CliError> {
    Ok(match cmd {
        Command::CondProb(a) => (commands::cond_prob(a, ctx)?, echo(a, ctx)),
        Command::EstimateF(a) => (commands::estimate_f(a, ctx)?, echo(a, ctx)),
        Command::FptDensity(a) => (commands::fpt_density(a, ctx)?, echo(a, ctx)),
        Command::BridgeFpt(a) => (commands::bridge_fpt(a, ctx)?, echo(a, ctx)),
        Command::Daniels(a) => (commands::daniels(a)?, echo(a, ctx)),
        Command::Kendall(a) => (commands::kendall(a)?, echo(a, ctx)),
        Command::MeanderDensity(a) => (commands::meander_density(a, ctx)?, echo(a, ctx)),
        Command::Gateaux(a) => (commands::gateaux(a, ctx)?, echo(a, ctx)),
        Command::VerifyExample1(a) => (commands::verify_example1(a, ctx)?, echo(a, ctx)),
        Command::VerifyExample2(a) => (commands::verify_example2(a, ctx)?, echo(a, ctx)),
        Command::CheckConditions(a) => (commands::check_conditions(a)?, echo(a, ctx)),
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let start = Instant::now();
    let ctx = Ctx::new(cli.common.clone());
    let (report, inputs) = dispatch(&cli.command, &ctx)?;
    let text = match cli.common.format {
        Format::Json => {
            Envelope::new(cli.command.name(), inputs, &report, start.elapsed().as_secs_f64()).to_json()
        }
        Format::Csv => report.csv.clone().unwrap_or_else(|| entries_csv(&report.results)),
    };
    match &cli.common.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::invalid(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| CliError::invalid(e.to_string()))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fptlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
