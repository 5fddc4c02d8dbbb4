use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod repro;

/// Optimal frequency-hopping sequence sets: build, analyze, extend, verify.
#[derive(Parser)]
#[command(name = "fhs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Build the coset-partition FHS set for (p, a, m, t, r).
    Generate {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        a: u32,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        t: u32,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Exhaustive Hamming-correlation report for a sequence file.
    Analyze {
        file: PathBuf,
        /// naive, indexed or auto
        #[arg(long, default_value = "auto")]
        engine: fhskit::correlation::Engine,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Concatenate an FHS file with an OC family.
    Extend {
        file: PathBuf,
        /// linear:K, affine:P or product:K,P
        #[arg(long)]
        oc: fhskit::oc::OcFamily,
        /// Also enforce the table constraints for the matching row.
        #[arg(long)]
        strict: bool,
        /// Compute the profile of the result and confirm optimality.
        #[arg(long)]
        check: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Build and validate a one-coincidence set.
    Oc {
        /// linear:K, affine:P or product:K,P
        #[arg(long)]
        kind: fhskit::oc::OcFamily,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Recompute everything a file claims; nonzero exit on any inconsistency.
    Verify { file: PathBuf },
    /// Reproduce the reference parameter sets and print a pass/fail table.
    Repro {
        /// Also materialize the two extensions of the (728,40,18;41) set
        /// that fit in memory.
        #[arg(long)]
        full: bool,
    },
}

/// Failure classes, one exit code each.
#[derive(Debug)]
pub enum CliError {
    Precondition(String),
    Verification(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Precondition(_) => 2,
            CliError::Verification(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Precondition(m) => write!(f, "precondition violated: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

fn configure_workers() -> Result<(), CliError> {
    let Ok(value) = std::env::var("FHS_WORKERS") else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .map_err(|_| CliError::Precondition(format!("FHS_WORKERS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Precondition(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_workers()?;
    match cli.command {
        Command::Generate { p, a, m, t, r, seed, out, format } => {
            let params = fhskit::fhs::FhsParams { p, a, m, t, r, seed };
            commands::generate(params, out.as_deref(), format)
        }
        Command::Analyze { file, engine, json } => commands::analyze(&file, engine, json),
        Command::Extend { file, oc, strict, check, out, format } => {
            commands::extend(&file, oc, strict, check, out.as_deref(), format)
        }
        Command::Oc { kind, out, format } => commands::oc(kind, out.as_deref(), format),
        Command::Verify { file } => commands::verify(&file),
        Command::Repro { full } => repro::run(full),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    use std::io::Write;
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
