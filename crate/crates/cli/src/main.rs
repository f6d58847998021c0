//! `sqwell`: runs the square-well experiments and writes plain tables.
//!
//! Exit status: 0 success, 1 usage or validation error, 2 internal
//! cross-check mismatch, 3 physics check failed.

mod cmd;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sqwell_core::isw::WellConfig;

/// Seed used for random packets when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20_260_101;

#[derive(Debug, Parser)]
#[command(
    name = "sqwell",
    version,
    about = "Infinite and finite square-well experiments"
)]
struct Cli {
    /// hbar, mass and well width, comma separated
    #[arg(long, global = true, default_value = "1,1,1", value_name = "H,M,L")]
    units: String,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write output here instead of standard output
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Seed for random wave packets
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

impl Switch {
    pub fn on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Infinite-well spectrum with the wall derivative jumps
    Spectrum(cmd::spectrum::Args),
    /// Substitute A sin kx + B cos kx into the Schrödinger equation
    Residual(cmd::residual::Args),
    /// Momentum balance of a wave packet over time
    Ehrenfest(cmd::ehrenfest::Args),
    /// Finite-well bound states or a depth sweep
    Finite(cmd::finite::Args),
    /// Plot-ready samples of a state
    Sample(cmd::sample::Args),
}

/// Run-wide settings shared by all subcommands.
pub struct RunConfig {
    pub well: WellConfig,
    pub format: Format,
    pub seed: u64,
}

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Mismatch(String),
    Physics(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Mismatch(_) => 2,
            Failure::Physics(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Mismatch(m) | Failure::Physics(m) => m,
        }
    }
}

/// What a command produced. A physics or cross-check failure still carries
/// its table so the offending numbers can be inspected.
pub struct Report {
    pub text: String,
    pub failure: Option<Failure>,
}

impl Report {
    pub fn ok(text: String) -> Self {
        Report {
            text,
            failure: None,
        }
    }
}

fn parse_units(s: &str) -> Result<WellConfig, Failure> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [h, m, l] = parts[..] else {
        return Err(Failure::Usage(format!("--units expects H,M,L, got {s:?}")));
    };
    let parse = |v: &str| {
        v.parse::<f64>()
            .map_err(|_| Failure::Usage(format!("--units: {v:?} is not a number")))
    };
    WellConfig::new(parse(h)?, parse(m)?, parse(l)?).map_err(|e| Failure::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<Report, Failure> {
    let run = RunConfig {
        well: parse_units(&cli.units)?,
        format: cli.format,
        seed: cli.seed,
    };
    let report = match &cli.command {
        Command::Spectrum(a) => cmd::spectrum::run(&run, a),
        Command::Residual(a) => cmd::residual::run(&run, a),
        Command::Ehrenfest(a) => cmd::ehrenfest::run(&run, a),
        Command::Finite(a) => cmd::finite::run(&run, a),
        Command::Sample(a) => cmd::sample::run(&run, a),
    }?;
    match &cli.out {
        Some(path) => fs::write(path, &report.text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{}", report.text),
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let failure = match run(cli) {
        Ok(Report { failure: None, .. }) => return ExitCode::SUCCESS,
        Ok(Report {
            failure: Some(f), ..
        })
        | Err(f) => f,
    };
    eprintln!("sqwell: {}", failure.message());
    ExitCode::from(failure.code())
}
