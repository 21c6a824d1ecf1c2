//! `stoqbell` command-line front end.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

const EXIT_NEGATIVE: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_INTERNAL: u8 = 1;

#[derive(Debug, Parser, Serialize)]
#[command(name = "stoqbell", version, about = "Stoquastic permutationally invariant Bell operators")]
struct Cli {
    /// Worker threads for parallel stages; 0 picks automatically.
    #[arg(long, global = true, env = "STOQBELL_THREADS", default_value_t = 0)]
    threads: usize,
    /// Read every angle in degrees instead of radians.
    #[arg(long, global = true)]
    deg: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum Command {
    /// Build one Dicke block of a Bell operator and check its off-diagonal signs.
    Operator(commands::OperatorArgs),
    /// Describe the cone of coefficients making the operator stoquastic.
    Cone(commands::ConeArgs),
    /// Quantum and classical bounds and their ratio.
    Bounds(commands::BoundsArgs),
    /// Maximize the gap over the stoquastic cone.
    Optimize(commands::OptimizeArgs),
    /// Gap on a grid of measurement angles (CSV).
    Scan(commands::ScanArgs),
    /// Stoquastic parent Hamiltonian of a nonnegative Dicke-basis state.
    Parent(commands::ParentArgs),
    /// Stoquasticity conditions for the parametrized two-body class.
    Class(commands::ClassArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Operator(_) => "operator",
            Command::Cone(_) => "cone",
            Command::Bounds(_) => "bounds",
            Command::Optimize(_) => "optimize",
            Command::Scan(_) => "scan",
            Command::Parent(_) => "parent",
            Command::Class(_) => "class",
        }
    }
}

/// Measurement angles shared by most subcommands.
#[derive(Debug, Clone, Copy, Args, Serialize)]
struct AngleArgs {
    #[arg(long, allow_hyphen_values = true)]
    phi: f64,
    #[arg(long, allow_hyphen_values = true)]
    theta: f64,
}

/// What a command concluded, beyond plain success.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Verdict {
    Ok,
    Negative,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Internal(anyhow::Error),
}

impl From<stoqbell::Error> for Failure {
    fn from(e: stoqbell::Error) -> Self {
        match e {
            stoqbell::Error::InvalidInput(_) | stoqbell::Error::Domain(_) => Failure::Usage(e.to_string()),
            other => Failure::Internal(other.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Internal(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Internal(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Internal(e.into())
    }
}

type CmdResult = Result<Verdict, Failure>;

/// Context handed to every subcommand.
struct Ctx {
    deg: bool,
    manifest: output::Manifest,
}

impl Ctx {
    fn angle(&self, x: f64) -> f64 {
        if self.deg {
            x.to_radians()
        } else {
            x
        }
    }

    fn params(&self, a: &AngleArgs) -> Result<stoqbell::MeasurementParams, Failure> {
        Ok(stoqbell::MeasurementParams::new(self.angle(a.phi), self.angle(a.theta))?)
    }
}

fn run(cli: Cli) -> CmdResult {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| Failure::Internal(e.into()))?;
    }
    let seed = match &cli.command {
        Command::Optimize(a) => Some(a.seed),
        _ => None,
    };
    let manifest = output::Manifest::new(cli.command.name(), serde_json::to_value(&cli)?, seed);
    let ctx = Ctx { deg: cli.deg, manifest };
    match &cli.command {
        Command::Operator(a) => commands::operator(&ctx, a),
        Command::Cone(a) => commands::cone(&ctx, a),
        Command::Bounds(a) => commands::bounds(&ctx, a),
        Command::Optimize(a) => commands::optimize(&ctx, a),
        Command::Scan(a) => commands::scan(&ctx, a),
        Command::Parent(a) => commands::parent(&ctx, a),
        Command::Class(a) => commands::class(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Verdict::Ok) => ExitCode::SUCCESS,
        Ok(Verdict::Negative) => ExitCode::from(EXIT_NEGATIVE),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}
