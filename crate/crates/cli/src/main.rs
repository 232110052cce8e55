//! `we-kit`: batch verification runs over the curvature toolkit.

mod report;
mod suites;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use report::Report;
use suites::{Common, ExampleArgs, FamilyArgs, IdentityArgs, LemmaArgs, NonrealArgs, OdeArgs};

#[derive(Debug, Error)]
enum CliError {
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error(transparent)]
    Library(#[from] we_kit::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("cannot configure thread pool: {0}")]
    Threads(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Library(_) | CliError::Threads(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "we-kit", version, about = "Numerical checks for weakly Einstein curvature")]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Number of random samples, for commands that draw them.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Residual tolerance.
    #[arg(long, global = true, default_value_t = we_kit::tensor::DEFAULT_TOL)]
    tol: f64,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Curvature identities on random algebraic curvature tensors.
    Identities(IdentityArgs),
    /// Closed-form example spaces.
    Example(ExampleArgs),
    /// Sample the four-dimensional family along t.
    Family(FamilyArgs),
    /// Positivity scan and ODE residual of Q.
    OdeQ(OdeArgs),
    /// Numerical checks on F and the reflection beta.
    LemmaF(LemmaArgs),
    /// Sweep for intervals with matching endpoint slopes.
    Nonrealizability(NonrealArgs),
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("WE_KIT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("WE_KIT_THREADS must be a positive integer, got {raw:?}")))?;
    if n == 0 {
        return Err(CliError::Usage("WE_KIT_THREADS must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Threads(e.to_string()))
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(CliError::Usage(format!("--tol must be positive, got {}", cli.tol)));
    }
    if cli.samples == Some(0) {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    configure_threads()?;
    let common = Common {
        seed: cli.seed,
        samples: cli.samples,
        tol: cli.tol,
    };
    let report = match &cli.command {
        Command::Identities(a) => suites::identities(a, &common)?,
        Command::Example(a) => suites::example(a, &common)?,
        Command::Family(a) => suites::family(a, &common)?,
        Command::OdeQ(a) => suites::ode_q(a, &common)?,
        Command::LemmaF(a) => suites::lemma_f(a, &common)?,
        Command::Nonrealizability(a) => suites::nonrealizability(a, &common)?,
    };
    Ok(report)
}

fn emit(cli: &Cli, report: &Report) -> Result<(), CliError> {
    let (path, sink): (String, Box<dyn Write>) = match &cli.output {
        Some(p) => {
            let file = File::create(p).map_err(|source| CliError::Io {
                path: p.display().to_string(),
                source,
            })?;
            (p.display().to_string(), Box::new(BufWriter::new(file)))
        }
        None => ("<stdout>".into(), Box::new(io::stdout().lock())),
    };
    let mut sink = sink;
    let written = match cli.format {
        Format::Json => report.write_json(&mut sink),
        Format::Csv => report.write_csv(&mut sink),
    };
    written
        .and_then(|_| sink.flush())
        .map_err(|source| CliError::Io { path, source })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli).and_then(|report| emit(&cli, &report).map(|_| report));
    match outcome {
        Ok(report) if report.pass() => ExitCode::SUCCESS,
        Ok(report) => {
            for f in report.failures() {
                eprintln!("FAIL {}: value {} expected {} tol {}", f.name, f.value, f.expected, f.tol);
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
