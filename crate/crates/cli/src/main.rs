//! `qrabi`: evaluation, condition scans, spectra, Judd curves and oracle
//! comparison for the quantum Rabi model, emitted as CSV or JSON.

mod commands;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};

use table::{Format, Table};

#[derive(Debug, Parser)]
#[command(name = "qrabi", version, about = "Quantum Rabi model spectra from confluent Heun functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

/// Flags shared by every command.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Level splitting Δ (units of ω)
    #[arg(long, global = true, default_value_t = 0.7, allow_negative_numbers = true)]
    pub delta: f64,
    /// Coupling g (units of ω)
    #[arg(long, global = true, default_value_t = 0.8, allow_negative_numbers = true)]
    pub g: f64,
    /// Lower end of the energy window
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub emin: Option<f64>,
    /// Upper end of the energy window
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub emax: Option<f64>,
    /// Energy grid step
    #[arg(long, global = true)]
    pub estep: Option<f64>,
    /// Comma-separated z values inside (-g, g); default 0 and 0.375 g
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub z: Option<Vec<f64>>,
    /// Truncation: Heun terms for `hc`, photon number for the oracle
    #[arg(long, global = true)]
    pub nmax: Option<usize>,
    /// Tolerance: series convergence for `hc`, root refinement for scans,
    /// eigenvalue convergence for `oracle`
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Output file; standard output when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Omit the leading comment line (command and timestamp)
    #[arg(long, global = true)]
    pub no_header: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SetArg {
    A,
    B,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a confluent Heun series on an x grid
    Hc {
        /// Explicit parameters α,β,γ,δ,η
        #[arg(long, value_delimiter = ',', num_args = 1, allow_negative_numbers = true, conflicts_with_all = ["set", "energy"])]
        params: Option<Vec<f64>>,
        /// Model parameter set (with --energy, --delta, --g)
        #[arg(long, value_enum, requires = "energy")]
        set: Option<SetArg>,
        #[arg(long, allow_negative_numbers = true)]
        energy: Option<f64>,
        /// Comma-separated x values; overrides the x grid
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        x: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        xmin: f64,
        #[arg(long, default_value_t = 0.9, allow_negative_numbers = true)]
        xmax: f64,
        #[arg(long, default_value_t = 0.1)]
        xstep: f64,
    },
    /// G±₁..₄ and K± on an energy grid, per z
    Conditions,
    /// Eigenvalues from the condition functions plus Judd points
    Spectrum {
        /// Skip parity labelling by the oracle
        #[arg(long)]
        no_oracle: bool,
    },
    /// Judd curves: Δ values on the N₁-th curve over a g grid
    Judd {
        #[arg(long, default_value_t = 1)]
        n1: usize,
        /// g grid; a single point at --g when absent
        #[arg(long)]
        gmin: Option<f64>,
        #[arg(long)]
        gmax: Option<f64>,
        #[arg(long, default_value_t = 0.05)]
        gstep: f64,
    },
    /// W₁ on an energy grid, per z, with the mirror value W₂ at -z
    Wronskian,
    /// Eigenvalues and parities by truncated diagonalization
    Oracle,
    /// Analytic spectrum and states against the oracle
    Compare,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(qrabi::Error),
    Io(io::Error),
}

impl From<qrabi::Error> for CliError {
    fn from(e: qrabi::Error) -> Self {
        match e {
            qrabi::Error::InvalidArgument(msg) => CliError::Usage(msg),
            other => CliError::Numerical(other),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(e) if e.is_convergence_failure() => 4,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Numerical(e) => write!(f, "numerical error: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let c = &cli.common;
    let (name, table) = match cli.command {
        Command::Hc { params, set, energy, x, xmin, xmax, xstep } => {
            let source = match (params, set, energy) {
                (Some(p), _, _) => commands::HcSource::Explicit(p),
                (None, Some(s), Some(e)) => commands::HcSource::Model(s, e),
                _ => return Err(CliError::Usage("hc needs --params or --set with --energy".into())),
            };
            let xs = match x {
                Some(xs) => xs,
                None => commands::grid(xmin, xmax, xstep)?,
            };
            ("hc", commands::hc(c, source, &xs)?)
        }
        Command::Conditions => ("conditions", commands::conditions(c)?),
        Command::Spectrum { no_oracle } => ("spectrum", commands::spectrum(c, !no_oracle)?),
        Command::Judd { n1, gmin, gmax, gstep } => ("judd", commands::judd(c, n1, gmin, gmax, gstep)?),
        Command::Wronskian => ("wronskian", commands::wronskian(c)?),
        Command::Oracle => ("oracle", commands::oracle(c)?),
        Command::Compare => ("compare", commands::compare(c)?),
    };
    emit(c, name, &table)
}

fn emit(c: &Common, name: &str, table: &Table) -> Result<(), CliError> {
    let format = match c.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    let comment = (!c.no_header).then(|| {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        format!("qrabi {name} delta={} g={} unix_time={secs}", c.delta, c.g)
    });
    let mut out: Box<dyn Write> = match &c.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    table.write(&mut out, format, comment.as_deref())?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qrabi: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
