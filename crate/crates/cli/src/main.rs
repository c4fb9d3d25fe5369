//! `harvest`: single points, grid scans, resonance and corridor sweeps,
//! rangefinding protocols and oracle suites.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use harvest_core::HarvestError;

use commands::{Protocol, Report, Suite};
use config::Params;
use output::{emit, Format, Manifest};

#[derive(Debug)]
pub enum CliError {
    /// Bad input; exit code 2.
    Validation(String),
    /// Anything that failed while computing; exit code 1.
    Runtime(String),
}

impl CliError {
    fn io(e: impl std::fmt::Display) -> Self {
        CliError::Runtime(format!("I/O: {e}"))
    }

    fn from_validation(e: HarvestError) -> Self {
        CliError::Validation(e.to_string())
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<HarvestError> for CliError {
    fn from(e: HarvestError) -> Self {
        match e {
            HarvestError::InvalidParameter(_) | HarvestError::OutOfValidity(_) | HarvestError::Precondition(_) => {
                CliError::Validation(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Saddle,
    Quadrature,
}

#[derive(Parser, Debug)]
#[command(name = "harvest", version, about = "Entanglement harvesting by accelerated and thermal detector pairs")]
struct Cli {
    /// key=value or JSON parameter file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (stdout if absent); CSV files get a .manifest.json sidecar
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true, value_enum, default_value = "saddle")]
    method: Method,
    /// Worker threads for grid and sweep evaluation
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Record wall time in the manifest (breaks byte-identical reruns)
    #[arg(long, global = true)]
    timing: bool,
    /// Parameter override, repeatable: -p kappa=0.001
    #[arg(short = 'p', long = "param", global = true, value_name = "KEY=VALUE")]
    params: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Amplitudes, negativity and diagnostics at one configuration
    Compute,
    /// Negativity over the (a, w) plane
    Scan,
    /// Critical separation along a w axis
    Resonance,
    /// Re X̃ against δL = L − L_crit
    Corridor,
    /// Distance-finding protocols
    Rangefind {
        #[arg(long, value_enum, default_value = "corridor")]
        protocol: Protocol,
    },
    /// Tolerance gates against independent evaluations
    Oracle {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Compute => "compute",
            Command::Scan => "scan",
            Command::Resonance => "resonance",
            Command::Corridor => "corridor",
            Command::Rangefind { .. } => "rangefind",
            Command::Oracle { .. } => "oracle",
        }
    }

    fn default_format(&self) -> Format {
        match self {
            Command::Compute | Command::Rangefind { .. } => Format::Json,
            _ => Format::Csv,
        }
    }
}

fn run(cli: &Cli) -> Result<usize, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Validation("--threads must be ≥ 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    let start = Instant::now();
    let mut params = Params::load(cli.config.as_deref(), &cli.params)?;
    let mut manifest = Manifest::new(cli.command.name(), cli.seed, cli.threads);
    let report: Report = match &cli.command {
        Command::Compute => commands::compute(&mut params, &mut manifest, cli.method)?,
        Command::Scan => commands::scan(&mut params, &mut manifest, cli.method)?,
        Command::Resonance => commands::resonance(&mut params, &mut manifest)?,
        Command::Corridor => commands::corridor(&mut params, &mut manifest)?,
        Command::Rangefind { protocol } => {
            manifest.method("protocol", &format!("{protocol:?}").to_lowercase());
            commands::rangefind(&mut params, &mut manifest, cli.method, *protocol, cli.seed)?
        }
        Command::Oracle { suite } => {
            manifest.method("suite", &format!("{suite:?}").to_lowercase());
            commands::oracle(&mut params, &mut manifest, *suite)?
        }
    };
    manifest.config = params.resolved().clone();
    if cli.timing {
        manifest.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    let format = cli.format.unwrap_or_else(|| cli.command.default_format());
    emit(format, cli.out.as_deref(), &manifest, report.table.as_ref(), report.json)?;
    Ok(report.failed_gates)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            eprintln!("{n} oracle gate(s) failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
