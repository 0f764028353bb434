//! The `msd` command-line tool.
//!
//! Exit codes: 0 success, 2 usage, 3 input or I/O, 4 numeric failure.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bootstrap::{Adjustment, BootstrapConfig};
use crate::dist::{self, Parity};
use crate::error::MsdError;
use crate::mc::{self, SimConfig, Statistic};
use crate::report::{analyze, AnalysisOptions, Mode, QuantileSource};
use crate::study::{read_study, StudyError};
use crate::tables::{adjusted_probability, table_file_name, QuantileTable, TableLoadError, TableSet};

/// Overrides the default table directory.
pub const TABLES_ENV: &str = "MSD_TABLES_DIR";
pub const DEFAULT_TABLES_DIR: &str = "msd-tables";

#[derive(Debug, Parser)]
#[command(name = "msd", version, about = "Median scaled difference for interlaboratory data")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Q_E per laboratory with quantile and rule-of-thumb flags.
    Analyze(AnalyzeArgs),
    /// Upper quantile of Q_E under IID normal data.
    Quantile(QuantileArgs),
    /// Interpolation tables.
    #[command(subcommand)]
    Tables(TablesCommand),
    /// Monte Carlo experiments.
    #[command(subcommand)]
    Simulate(SimulateCommand),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    #[value(alias = "structured")]
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Exact,
    Table,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ParityArg {
    Even,
    Odd,
    Both,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Study file with header `lab,value,u`.
    input: PathBuf,
    /// Run a parametric bootstrap with this many iterations.
    #[arg(long, value_name = "B")]
    bootstrap: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Multiple)]
    mode: Mode,
    /// p-value adjustment shown in text output: holm or bh.
    #[arg(long, default_value = "bh")]
    adjust: Adjustment,
    /// Use interpolation tables from this directory instead of quadrature.
    #[arg(long, value_name = "PATH")]
    tables: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Args)]
struct QuantileArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(3..))]
    n: u64,
    #[arg(long)]
    p: f64,
    #[arg(long, value_enum, default_value_t = Mode::Single)]
    mode: Mode,
    #[arg(long, value_enum, default_value_t = Method::Exact)]
    method: Method,
    #[arg(long, value_name = "PATH")]
    tables: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum TablesCommand {
    /// Build tables by quadrature and write them to a directory.
    Generate {
        #[arg(long, value_enum, default_value_t = ParityArg::Both)]
        parity: ParityArg,
        /// Output directory (default: $MSD_TABLES_DIR or ./msd-tables).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct SimCommon {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum SimulateCommand {
    /// Multiple-observation quantiles (maximum Q_E per dataset).
    Table3 {
        #[arg(long, value_delimiter = ',', required = true, value_parser = clap::value_parser!(u64).range(3..))]
        n: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.95, 0.99, 0.999])]
        p: Vec<f64>,
        #[arg(long, default_value_t = mc::DEFAULT_QUANTILE_REPLICATES)]
        replicates: usize,
        #[command(flatten)]
        common: SimCommon,
    },
    /// Detection rate as the subject observation is displaced.
    Power(CurveArgs),
    /// False-positive rate of a null subject as a second observation moves.
    Resistance(CurveArgs),
    /// Rule-of-thumb rates with chi-squared(3) variances.
    Hetero {
        #[arg(long, value_delimiter = ',', default_values_t = [5u64, 10, 15, 20, 25])]
        n: Vec<u64>,
        #[arg(long, default_value_t = mc::DEFAULT_CURVE_REPLICATES)]
        replicates: usize,
        #[command(flatten)]
        common: SimCommon,
    },
}

#[derive(Debug, Args)]
struct CurveArgs {
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(3..))]
    n: u64,
    /// Grid as start:stop:step (inclusive). Defaults: 0:5:0.25 for power,
    /// -6:6:0.5 for resistance.
    #[arg(long)]
    grid: Option<String>,
    /// Statistic: msd or pwch.
    #[arg(long, default_value = "msd")]
    stat: Statistic,
    #[arg(long, default_value_t = mc::DEFAULT_CURVE_REPLICATES)]
    replicates: usize,
    /// Critical value. Defaults to the exact 0.95 quantile for msd and a
    /// Monte Carlo 0.95 quantile for pwch.
    #[arg(long)]
    critical: Option<f64>,
    /// Replicates used to calibrate the pwch critical value.
    #[arg(long, default_value_t = mc::DEFAULT_QUANTILE_REPLICATES)]
    calibration_replicates: usize,
    #[command(flatten)]
    common: SimCommon,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl From<MsdError> for CliError {
    fn from(e: MsdError) -> Self {
        match e {
            e if e.is_numeric() => CliError::Numeric(e.to_string()),
            MsdError::InvalidDataset(_) | MsdError::TableFormat(_) => CliError::Input(e.to_string()),
            e => CliError::Usage(e.to_string()),
        }
    }
}

impl From<StudyError> for CliError {
    fn from(e: StudyError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<TableLoadError> for CliError {
    fn from(e: TableLoadError) -> Self {
        CliError::Input(e.to_string())
    }
}

fn io_err(what: &Path, e: std::io::Error) -> CliError {
    CliError::Input(format!("{}: {e}", what.display()))
}

/// Parse `start:stop:step` into an inclusive grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("grid '{spec}' must be start:stop:step with step > 0 and start <= stop"));
    let parts: Vec<f64> =
        spec.split(':').map(|s| s.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let [start, stop, step] = parts[..] else { return Err(bad()) };
    if !(step > 0.0) || !(start <= stop) || !start.is_finite() || !stop.is_finite() {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    if count > 100_000 {
        return Err(CliError::Usage(format!("grid '{spec}' has too many points")));
    }
    Ok((0..=count).map(|k| start + k as f64 * step).collect())
}

/// Table directory: explicit flag, then the environment variable, then the
/// default.
pub fn tables_dir(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(TABLES_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_TABLES_DIR))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| io_err(p, e)),
        None => out.write_all(text.as_bytes()).map_err(|e| CliError::Input(format!("stdout: {e}"))),
    }
}

fn cmd_analyze(args: AnalyzeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let ds = read_study(&args.input)?;
    let set;
    let source = match &args.tables {
        Some(dir) => {
            set = TableSet::load(dir)?;
            QuantileSource::Tables { set: &set, origin: dir.display().to_string() }
        }
        None => QuantileSource::Exact,
    };
    let bootstrap = args.bootstrap.map(|b| BootstrapConfig::new(b, args.seed)).transpose()?;
    let report = analyze(&ds, &AnalysisOptions { mode: args.mode, adjust: args.adjust, source, bootstrap })?;
    let text = match args.format {
        Format::Text => report.to_text(),
        Format::Json => serde_json::to_string_pretty(&report).expect("report serialises") + "\n",
    };
    emit(out, None, &text)
}

fn cmd_quantile(args: QuantileArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let n = args.n as usize;
    if !(args.p > 0.0 && args.p < 1.0) {
        return Err(CliError::Usage(format!("--p {} must lie strictly between 0 and 1", args.p)));
    }
    let p1 = match args.mode {
        Mode::Single => args.p,
        Mode::Multiple => adjusted_probability(n, args.p),
    };
    let q = match args.method {
        Method::Exact => dist::quantile(p1, n)?,
        Method::Table => {
            let dir = tables_dir(args.tables.as_deref());
            let parity = Parity::of(n);
            QuantileTable::read_from(&dir.join(table_file_name(parity)))?.interp_quantile(n, p1)?
        }
    };
    emit(out, None, &format!("{q:.6}\n"))
}

fn cmd_tables(cmd: TablesCommand, out: &mut dyn Write) -> Result<(), CliError> {
    let TablesCommand::Generate { parity, out: dir } = cmd;
    let dir = tables_dir(dir.as_deref());
    std::fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    let parities = match parity {
        ParityArg::Even => vec![Parity::Even],
        ParityArg::Odd => vec![Parity::Odd],
        ParityArg::Both => vec![Parity::Even, Parity::Odd],
    };
    for p in parities {
        let table = QuantileTable::build(p)?;
        let path = dir.join(table_file_name(p));
        table.write_to(&path).map_err(|e| io_err(&path, e))?;
        writeln!(out, "wrote {}", path.display()).map_err(|e| CliError::Input(format!("stdout: {e}")))?;
    }
    Ok(())
}

fn curve(args: CurveArgs, resistance: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let n = args.n as usize;
    let default_grid = if resistance { "-6:6:0.5" } else { "0:5:0.25" };
    let grid = parse_grid(args.grid.as_deref().unwrap_or(default_grid))?;
    let cfg = SimConfig::new(args.common.seed, args.replicates, n)?;
    let critical = match (args.critical, args.stat) {
        (Some(c), _) => c,
        (None, Statistic::Msd) => dist::quantile(0.95, n)?,
        (None, Statistic::Pwch) => {
            // separate seed stream so calibration and curve draws are independent
            let cal = SimConfig::new(args.common.seed.wrapping_add(1), args.calibration_replicates, n)?;
            mc::calibrate_pwch_quantile(&cal, 0.95)?
        }
    };
    let (curve, name) = if resistance {
        (mc::simulate_resistance(&cfg, args.stat, &grid, critical)?, "contaminant")
    } else {
        (mc::simulate_power(&cfg, args.stat, &grid, critical)?, "displacement")
    };
    emit(out, args.common.out.as_deref(), &curve.to_csv(name))
}

fn cmd_simulate(cmd: SimulateCommand, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        SimulateCommand::Table3 { n, p, replicates, common } => {
            let mut text = String::new();
            for (k, &n) in n.iter().enumerate() {
                let cfg = SimConfig::new(common.seed, replicates, n as usize)?;
                let rows = mc::simulate_multi_quantiles(&cfg, &p)?;
                let block = mc::multi_quantiles_csv(n as usize, replicates, common.seed, &rows);
                // keep only the first header
                let skip = if k == 0 { 0 } else { 2 };
                text.extend(block.lines().skip(skip).map(|l| format!("{l}\n")));
            }
            emit(out, common.out.as_deref(), &text)
        }
        SimulateCommand::Power(args) => curve(args, false, out),
        SimulateCommand::Resistance(args) => curve(args, true, out),
        SimulateCommand::Hetero { n, replicates, common } => {
            let n: Vec<usize> = n.into_iter().map(|v| v as usize).collect();
            let rows = mc::simulate_hetero_guideline(&n, replicates, common.seed)?;
            emit(out, common.out.as_deref(), &mc::guideline_csv(&rows))
        }
    }
}

/// Run with explicit arguments (the first is the program name). Help and
/// version requests are written to `out` and return Ok.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if e.exit_code() == 0 => {
            let _ = write!(out, "{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.render().to_string())),
    };
    match cli.command {
        Command::Analyze(a) => cmd_analyze(a, out),
        Command::Quantile(a) => cmd_quantile(a, out),
        Command::Tables(t) => cmd_tables(t, out),
        Command::Simulate(s) => cmd_simulate(s, out),
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn main_from_env() -> i32 {
    let stdout = std::io::stdout();
    match run(std::env::args_os(), &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            let msg = e.to_string();
            eprintln!("msd: {}", msg.trim_end());
            e.exit_code()
        }
    }
}
