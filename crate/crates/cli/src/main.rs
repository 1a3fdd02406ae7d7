//! `augury` — command line front end over the analysis library: ingestion,
//! memory-model extraction, seasonal decomposition, profiles, trends, memory
//! projections, run-time views, forecasting and workload simulation.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors. All
//! diagnostics go to standard error; data goes to standard output and, for
//! SVG snapshots, to files under `--out-dir`.

mod commands;
mod config;

use std::io::IsTerminal;
use std::path::PathBuf;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::Config;

/// Failure classes; each maps to one exit code.
#[derive(Debug)]
pub enum CliError {
    /// The invocation itself is wrong (flags, config file, flag values).
    Usage(String),
    /// The inputs cannot be read or do not support the requested analysis.
    Data(String),
}

impl From<augury_core::error::Error> for CliError {
    fn from(e: augury_core::error::Error) -> CliError {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Data(e.to_string())
    }
}

/// Output format for analysis commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Svg,
    Both,
}

impl Format {
    pub fn wants_csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn wants_svg(self) -> bool {
        matches!(self, Format::Svg | Format::Both)
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(text: &str) -> Result<Format, String> {
        match text {
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            "both" => Ok(Format::Both),
            other => Err(format!("unknown format `{other}` (expected csv, svg or both)")),
        }
    }
}

/// Global options resolved through the flags > config file > defaults chain.
pub struct Globals {
    pub format: Format,
    pub out_dir: PathBuf,
    pub width: u32,
    pub height: u32,
    pub config: Config,
}

#[derive(Parser)]
#[command(
    name = "augury",
    version,
    about = "Monitoring-data analysis: memory-model extraction, seasonal \
             decomposition, forecasting and snapshot rendering"
)]
struct Cli {
    /// key = value config file; explicit flags take precedence
    #[arg(long, global = true, value_name = "PATH")]
    pub(crate) config: Option<PathBuf>,

    /// Output format: csv (standard output), svg (file), or both
    #[arg(long, global = true, value_enum)]
    pub(crate) format: Option<Format>,

    /// Directory for rendered SVG snapshots
    #[arg(long, global = true, value_name = "DIR")]
    pub(crate) out_dir: Option<PathBuf>,

    /// Snapshot width in pixels
    #[arg(long, global = true, value_name = "PX")]
    pub(crate) width: Option<u32>,

    /// Snapshot height in pixels
    #[arg(long, global = true, value_name = "PX")]
    pub(crate) height: Option<u32>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse one source and re-emit it as canonical CSV plus a summary
    Ingest(IngestArgs),
    /// Extract per-execution memory-model parameters from metrics
    Patterns(PatternsArgs),
    /// Split a series into trend, seasonal and residual components
    Decompose(DecomposeArgs),
    /// Per-bin traffic distribution across repeated seasons, as a boxplot
    Profile(ProfileArgs),
    /// Execution-count trend lines for the busiest applications
    Trend(TrendArgs),
    /// Worst-case cumulative memory curves inside a daily clock window
    ProjectMemory(ProjectMemoryArgs),
    /// Request run times over time for one application
    Runtimes(RuntimesArgs),
    /// Unit-root report plus an iterative ARIMA forecast vs the naive benchmark
    Forecast(ForecastArgs),
    /// Generate synthetic monitoring data
    #[command(subcommand)]
    Simulate(SimulateCommand),
}

#[derive(Args)]
pub struct IngestArgs {
    /// Apache access log (`-` for standard input)
    #[arg(long, value_name = "PATH")]
    pub(crate) log: Option<String>,

    /// Metrics CSV with timestamp,mem_percent,cpu_percent columns (`-` for standard input)
    #[arg(long, value_name = "PATH")]
    pub(crate) metrics: Option<String>,

    /// JSON monitoring records: an array or one object per line (`-` for standard input)
    #[arg(long, value_name = "PATH")]
    pub(crate) json: Option<String>,
}

#[derive(Args)]
pub struct PatternsArgs {
    /// Metrics CSV (`-` for standard input)
    #[arg(long, value_name = "PATH")]
    pub(crate) metrics: Option<String>,

    /// Shorthand for `--metrics -`
    #[arg(long)]
    pub(crate) stdin: bool,

    /// Metrics column to analyze
    #[arg(long, value_name = "NAME")]
    pub(crate) metric: Option<String>,

    /// Sampling lag in seconds
    #[arg(long, value_name = "SECONDS")]
    pub(crate) lag_seconds: Option<f64>,

    /// Grid holes: missing, previous or zero
    #[arg(long, value_name = "POLICY")]
    pub(crate) fill: Option<String>,

    /// Detection-band sigma reading: ma or residual
    #[arg(long, value_name = "SOURCE")]
    pub(crate) sigma: Option<String>,

    /// Moving-average weights: uniform or exponential
    #[arg(long, value_name = "RULE")]
    pub(crate) rule: Option<String>,

    /// Fixed detection window in lags, skipping optimization
    #[arg(long, value_name = "LAGS")]
    pub(crate) window_lags: Option<usize>,
}

/// Input that yields one regular series: either request records counted per
/// slot (`--app` route) or one metrics column on its sampling grid.
#[derive(Args)]
pub struct SeriesInput {
    /// Apache access log (`-` for standard input)
    #[arg(long, value_name = "PATH")]
    pub(crate) log: Option<String>,

    /// Canonical request-record CSV, as `ingest` emits (`-` for standard input)
    #[arg(long, value_name = "PATH")]
    pub(crate) records: Option<String>,

    /// JSON monitoring records (`-` for standard input)
    #[arg(long, value_name = "PATH")]
    pub(crate) json: Option<String>,

    /// Metrics CSV (`-` for standard input)
    #[arg(long, value_name = "PATH")]
    pub(crate) metrics: Option<String>,

    /// Read standard input (request records when --app is given, metrics CSV otherwise)
    #[arg(long)]
    pub(crate) stdin: bool,

    /// Application id; selects the request-counting route
    #[arg(long, value_name = "ID")]
    pub(crate) app: Option<String>,

    /// Counting slot in seconds for the request route
    #[arg(long, value_name = "SECONDS")]
    pub(crate) slot_seconds: Option<i64>,

    /// Metrics column for the metrics route
    #[arg(long, value_name = "NAME")]
    pub(crate) metric: Option<String>,

    /// Metrics sampling lag in seconds
    #[arg(long, value_name = "SECONDS")]
    pub(crate) lag_seconds: Option<f64>,

    /// Metrics grid holes: missing, previous or zero
    #[arg(long, value_name = "POLICY")]
    pub(crate) fill: Option<String>,
}

#[derive(Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    input: SeriesInput,

    /// Season length: hourly, daily or weekly
    #[arg(long, value_name = "KIND")]
    pub(crate) period: Option<String>,
}

/// Request-record input for the commands that only consume records.
#[derive(Args)]
pub struct RecordInput {
    /// Apache access log (`-` for standard input)
    #[arg(long, value_name = "PATH")]
    pub(crate) log: Option<String>,

    /// Canonical request-record CSV, as `ingest` emits (`-` for standard input)
    #[arg(long, value_name = "PATH")]
    pub(crate) records: Option<String>,

    /// JSON monitoring records (`-` for standard input)
    #[arg(long, value_name = "PATH")]
    pub(crate) json: Option<String>,

    /// Shorthand for `--log -`
    #[arg(long)]
    pub(crate) stdin: bool,
}

#[derive(Args)]
pub struct ProfileArgs {
    #[command(flatten)]
    input: RecordInput,

    /// Application id (request path)
    #[arg(long, value_name = "ID")]
    pub(crate) app: Option<String>,

    /// Counting window in minutes
    #[arg(long, value_name = "MINUTES")]
    pub(crate) window: Option<u32>,

    /// Season length: hourly, daily or weekly
    #[arg(long, value_name = "KIND")]
    pub(crate) period: Option<String>,

    /// Subtract the trend before binning
    #[arg(long)]
    pub(crate) detrend: bool,

    /// Zoom into one hour of the day (0-23) at minute resolution
    #[arg(long, value_name = "HOUR")]
    pub(crate) zoom: Option<u32>,

    /// Bin width in minutes for --zoom
    #[arg(long, value_name = "MINUTES")]
    pub(crate) zoom_bin_minutes: Option<u32>,
}

#[derive(Args)]
pub struct TrendArgs {
    #[command(flatten)]
    input: RecordInput,

    /// How many of the busiest applications to draw
    #[arg(long, value_name = "K")]
    pub(crate) top: Option<usize>,

    /// Counting window in minutes
    #[arg(long, value_name = "MINUTES")]
    pub(crate) window: Option<u32>,
}

#[derive(Args)]
pub struct ProjectMemoryArgs {
    #[command(flatten)]
    input: RecordInput,

    /// Application id (request path)
    #[arg(long, value_name = "ID")]
    pub(crate) app: Option<String>,

    /// Clock window start, HH:MM[:SS]
    #[arg(long, value_name = "CLOCK")]
    pub(crate) from: Option<String>,

    /// Clock window end (exclusive), HH:MM[:SS]
    #[arg(long, value_name = "CLOCK")]
    pub(crate) to: Option<String>,

    /// Memory attributed to each execution, in MB
    #[arg(long, value_name = "MB")]
    pub(crate) mb_per_run: Option<f64>,
}

#[derive(Args)]
pub struct RuntimesArgs {
    #[command(flatten)]
    input: RecordInput,

    /// Application id (request path)
    #[arg(long, value_name = "ID")]
    pub(crate) app: Option<String>,
}

#[derive(Args)]
pub struct ForecastArgs {
    #[command(flatten)]
    input: SeriesInput,

    /// In-sample fraction, strictly between 0 and 1
    #[arg(long, value_name = "FRACTION")]
    pub(crate) split: Option<f64>,

    /// ARIMA order as p,d,q
    #[arg(long, value_name = "P,D,Q")]
    pub(crate) order: Option<String>,

    /// Unit-root regression: none, constant or constant-and-trend
    #[arg(long, value_name = "KIND")]
    pub(crate) regression: Option<String>,

    /// Highest lagged-difference count the unit-root test may select
    #[arg(long, value_name = "N")]
    pub(crate) max_lag: Option<usize>,
}

#[derive(Subcommand)]
pub enum SimulateCommand {
    /// Metrics CSV with scheduled memory pulses (defaults reproduce the 4-day scenario)
    Metrics(SimulateMetricsArgs),
    /// Apache-format request log with periodic bursts
    Requests(SimulateRequestsArgs),
}

#[derive(Args)]
pub struct SimulateMetricsArgs {
    /// Simulated span in days (fractions allowed)
    #[arg(long)]
    pub(crate) days: Option<f64>,

    /// First timestamp, RFC 3339 or `YYYY-MM-DD HH:MM:SS`
    #[arg(long, value_name = "TIME")]
    pub(crate) start: Option<String>,

    /// Baseline memory level, percent
    #[arg(long)]
    pub(crate) baseline: Option<f64>,

    /// Pulse height above the baseline, percent
    #[arg(long)]
    pub(crate) pulse_height: Option<f64>,

    /// Pulse duration in seconds
    #[arg(long, value_name = "SECONDS")]
    pub(crate) duration_seconds: Option<f64>,

    /// Pulse period in seconds
    #[arg(long, value_name = "SECONDS")]
    pub(crate) period_seconds: Option<f64>,

    /// Gaussian noise sigma, percent
    #[arg(long)]
    pub(crate) noise: Option<f64>,

    /// Sample lag in seconds
    #[arg(long, value_name = "SECONDS")]
    pub(crate) lag_seconds: Option<f64>,

    /// RNG seed
    #[arg(long)]
    pub(crate) seed: Option<u64>,
}

#[derive(Args)]
pub struct SimulateRequestsArgs {
    /// Simulated span in days (fractions allowed)
    #[arg(long)]
    pub(crate) days: Option<f64>,

    /// First burst timestamp, RFC 3339 or `YYYY-MM-DD HH:MM:SS`
    #[arg(long, value_name = "TIME")]
    pub(crate) start: Option<String>,

    /// Burst period in seconds
    #[arg(long, value_name = "SECONDS")]
    pub(crate) period_seconds: Option<f64>,

    /// Gaussian timing jitter sigma in seconds
    #[arg(long, value_name = "SECONDS")]
    pub(crate) jitter_seconds: Option<f64>,

    /// Applications as id=weight[,id=weight...]; weight is requests per burst
    #[arg(long, value_name = "LIST")]
    pub(crate) apps: Option<String>,

    /// RNG seed
    #[arg(long)]
    pub(crate) seed: Option<u64>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code =
                if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                    0
                } else {
                    1
                };
            e.print().ok();
            std::process::exit(code);
        }
    };
    std::process::exit(match run(cli) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            diagnose(&msg);
            1
        }
        Err(CliError::Data(msg)) => {
            diagnose(&msg);
            2
        }
    });
}

fn diagnose(msg: &str) {
    let color =
        std::env::var_os("NO_COLOR").is_none() && std::io::stderr().is_terminal();
    if color {
        eprintln!("\x1b[1;31merror:\x1b[0m {msg}");
    } else {
        eprintln!("error: {msg}");
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = Config::load(cli.config.as_deref())?;
    let format = config.resolve(cli.format, "format", Format::Csv)?;
    let out_dir = config.resolve(cli.out_dir, "out-dir", PathBuf::from("."))?;
    let width = config.resolve(cli.width, "width", 960)?;
    let height = config.resolve(cli.height, "height", 540)?;
    if width < 100 || height < 100 {
        return Err(CliError::Usage(format!(
            "snapshot dimensions {width}x{height} are below the 100x100 minimum"
        )));
    }
    let globals = Globals { format, out_dir, width, height, config };
    match cli.command {
        Command::Ingest(args) => commands::ingest(&args, &globals),
        Command::Patterns(args) => commands::patterns(&args, &globals),
        Command::Decompose(args) => commands::decompose_cmd(&args, &globals),
        Command::Profile(args) => commands::profile(&args, &globals),
        Command::Trend(args) => commands::trend(&args, &globals),
        Command::ProjectMemory(args) => commands::project_memory(&args, &globals),
        Command::Runtimes(args) => commands::runtimes(&args, &globals),
        Command::Forecast(args) => commands::forecast(&args, &globals),
        Command::Simulate(SimulateCommand::Metrics(args)) => {
            commands::simulate_metrics(&args, &globals)
        }
        Command::Simulate(SimulateCommand::Requests(args)) => {
            commands::simulate_requests(&args, &globals)
        }
    }
}
