use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod commands;
mod output;
mod verify;

use output::{Metadata, OutputRecord, Table, SCHEMA_VERSION};

#[derive(Debug, Parser, Serialize)]
#[command(name = "pagecurve", version, about = "Entanglement of squeezed states under random linear optics")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for sampling (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format (default: csv, json for `verify`).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Absolute tolerance for series truncation and exact checks.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Average subsystem entropy against subsystem size.
    PageCurve(PageCurveArgs),
    /// Fluctuations of the half-system entropy.
    Variance(VarianceArgs),
    /// Deviation frequencies of the entropy across system sizes.
    Typicality(TypicalityArgs),
    /// Mean derivative of the entropy in one mode's squeezing.
    ConjectureProbe(ConjectureArgs),
    /// Exact Weingarten calculus.
    #[command(subcommand)]
    Weingarten(WeingartenCommand),
    /// Built-in verification suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct PageCurveArgs {
    #[arg(long)]
    pub modes: usize,
    /// One value for equal squeezing or a comma list with one per mode.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub squeeze: Vec<f64>,
    /// Skip sampling.
    #[arg(long)]
    pub analytic_only: bool,
    /// Spacing of the subsystem fraction grid (default: every k).
    #[arg(long)]
    pub grid_step: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct VarianceArgs {
    #[arg(long)]
    pub modes: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub squeeze: f64,
    #[arg(long, default_value_t = 0.5)]
    pub fraction: f64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct TypicalityArgs {
    /// Comma list of system sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub modes: Vec<usize>,
    /// `ratio:R`, `sqrt` or `fixed:K`.
    #[arg(long, default_value = "ratio:0.5")]
    pub rule: String,
    #[arg(long, allow_negative_numbers = true)]
    pub squeeze: f64,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ConjectureArgs {
    #[arg(long)]
    pub modes: usize,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub squeeze: Vec<f64>,
    /// Subsystem size.
    #[arg(long)]
    pub k: usize,
    /// Mode whose squared squeezing is varied.
    #[arg(long, default_value_t = 0)]
    pub mode_index: usize,
    /// Finite-difference step in the squared squeezing.
    #[arg(long, default_value_t = 1e-3)]
    pub delta: f64,
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeingartenCommand {
    /// Constant-order coefficients by permutation enumeration.
    AEll {
        #[arg(long)]
        max: usize,
    },
    /// Weingarten function of a cycle type, exact and leading order.
    Wg {
        /// Comma list of cycle lengths, e.g. `2,1`.
        #[arg(long, value_delimiter = ',', required = true)]
        cycle_type: Vec<usize>,
        #[arg(long)]
        n: usize,
    },
    /// Exact Haar average of a product of traces of powers of W.
    Moment {
        #[arg(long, value_delimiter = ',', required = true)]
        powers: Vec<usize>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// Leading variance coefficient extrapolated from exact moments.
    Omega2 {
        #[arg(long, value_delimiter = ',', required = true)]
        ladder: Vec<usize>,
        /// Subsystem fraction as an exact rational.
        #[arg(long, default_value = "1/2")]
        r: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Coefficients,
    Weingarten,
    Montecarlo,
    All,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// Samples per statistical check in the Monte Carlo suite.
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
}

/// Settings shared by every subcommand.
pub struct Context {
    pub seed: u64,
    pub workers: usize,
    pub tol: f64,
}

/// What a subcommand hands back for serialization.
pub struct Report {
    pub table: Table,
    pub tolerances: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub passed: bool,
}

impl Report {
    pub fn new(table: Table) -> Self {
        Self { table, tolerances: BTreeMap::new(), notes: Vec::new(), passed: true }
    }
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Usage(_) => 1,
            Self::Numerical(_) | Self::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(m) | Self::Numerical(m) | Self::Io(m) => f.write_str(m),
        }
    }
}

impl From<pagecurve::Error> for Failure {
    fn from(e: pagecurve::Error) -> Self {
        use pagecurve::Error as E;
        match e {
            E::Input(_) | E::Domain(_) => Self::Usage(e.to_string()),
            E::Numerical(_) | E::Truncation { .. } | E::Capacity { .. } => Self::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

pub fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

fn command_name(c: &Command) -> String {
    match c {
        Command::PageCurve(_) => "page-curve".into(),
        Command::Variance(_) => "variance".into(),
        Command::Typicality(_) => "typicality".into(),
        Command::ConjectureProbe(_) => "conjecture-probe".into(),
        Command::Weingarten(w) => match w {
            WeingartenCommand::AEll { .. } => "weingarten a-ell",
            WeingartenCommand::Wg { .. } => "weingarten wg",
            WeingartenCommand::Moment { .. } => "weingarten moment",
            WeingartenCommand::Omega2 { .. } => "weingarten omega2",
        }
        .into(),
        Command::Verify(_) => "verify".into(),
    }
}

fn run(cli: &Cli, args: &[String]) -> Result<bool, Failure> {
    let start = Instant::now();
    if !(cli.tol > 0.0) {
        return usage(format!("--tol must be positive, got {}", cli.tol));
    }
    let workers = match cli.workers {
        Some(0) => return usage("--workers must be at least 1"),
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let ctx = Context { seed: cli.seed, workers, tol: cli.tol };
    let report = match &cli.command {
        Command::PageCurve(a) => commands::page_curve(a, &ctx)?,
        Command::Variance(a) => commands::variance(a, &ctx)?,
        Command::Typicality(a) => commands::typicality(a, &ctx)?,
        Command::ConjectureProbe(a) => commands::conjecture(a, &ctx)?,
        Command::Weingarten(w) => commands::weingarten(w, &ctx)?,
        Command::Verify(a) => verify::run(a, &ctx)?,
    };

    let mut config = serde_json::to_value(cli).expect("options serialize");
    config["args"] = serde_json::to_value(args).expect("strings serialize");
    let mut tolerances = report.tolerances;
    tolerances.insert("tol".into(), cli.tol);
    let record = OutputRecord {
        schema_version: SCHEMA_VERSION.into(),
        command: command_name(&cli.command),
        config,
        columns: report.table.columns,
        rows: report.table.rows,
        metadata: Metadata {
            seed: cli.seed,
            rng: pagecurve::haar::RNG_ALGORITHM.into(),
            workers,
            tolerances,
            wall_time_seconds: start.elapsed().as_secs_f64(),
            version: env!("CARGO_PKG_VERSION").into(),
            notes: report.notes,
        },
    };

    let default_format = if matches!(cli.command, Command::Verify(_)) { Format::Json } else { Format::Csv };
    let mut sink: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?)),
        None => Box::new(std::io::stdout().lock()),
    };
    match cli.format.unwrap_or(default_format) {
        Format::Csv => output::write_csv(&record, &mut sink)?,
        Format::Json => output::write_json(&record, &mut sink)?,
    }
    sink.flush()?;
    Ok(report.passed)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse_from(std::iter::once("pagecurve".to_string()).chain(args.iter().cloned())) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli, &args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
