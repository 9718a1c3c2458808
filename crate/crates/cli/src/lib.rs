//! Command-line front end: analyze a dataset, reproduce the simulation
//! tables, inspect trend contrasts, or generate a synthetic panel.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use pretrends_core::estimators::{analyze, ConditionalBlock, InferenceReport};
use pretrends_core::event_study::{estimate_event_study, load_panel, write_panel, EstimateBundle};
use pretrends_core::gaussian::serialize_opt_ext_f64;
use pretrends_core::simulation::{
    generate_panel, run_table, write_csv, write_json, SimConfig, TableId, TREND_SLOPE,
};
use pretrends_core::{estimators::eta_gamma, Error, ErrorKind};

/// Version of the `analyze` JSON layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "pretrends", version, about = "Difference-in-differences inference after a pre-trends test")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dgp {
    Null,
    Trend,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate, run the pre-test, and report traditional, efficient and
    /// conditional estimates for a `unit,period,treatment,outcome` CSV.
    Analyze(AnalyzeArgs),
    /// Reproduce one of the simulation tables.
    Simulate(SimulateArgs),
    /// Print the trend-adjusted contrast for K pre-periods and order P.
    Eta(EtaArgs),
    /// Write a simulated panel as CSV.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, clap::Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub alpha_pretest: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha_ci: f64,
    #[arg(long, default_value_t = 1)]
    pub trend_order: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Defaults to standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, clap::Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub table: u8,
    /// JSON file with any `SimConfig` fields; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Defaults to `null` for table 1 and `trend` otherwise.
    #[arg(long, value_enum)]
    pub dgp: Option<Dgp>,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Pre-trend slope for the trend design.
    #[arg(long)]
    pub slope: Option<f64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Simulate individual outcomes instead of cell summaries.
    #[arg(long)]
    pub full_path: bool,
    /// Use the true covariance instead of the estimated one.
    #[arg(long)]
    pub known_sigma: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, clap::Args)]
pub struct EtaArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub p: usize,
    #[arg(long, default_value_t = 1)]
    pub m: i64,
}

#[derive(Debug, Clone, clap::Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 250)]
    pub n: usize,
    #[arg(long, default_value_t = TREND_SLOPE)]
    pub slope: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// A core error with a note on what was being done.
#[derive(Debug)]
pub struct CliError {
    pub context: String,
    pub source: Error,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.context, self.source)
    }
}

impl std::error::Error for CliError {}

trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError>;
}

impl<T> Context<T> for Result<T, Error> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError> {
        self.map_err(|source| CliError { context: what(), source })
    }
}

/// 2 for unreadable input, 3 for invalid data or arguments, 4 for numerical
/// failures.
pub fn exit_code(e: &CliError) -> i32 {
    match e.source.kind() {
        ErrorKind::Parse => 2,
        ErrorKind::Validation => 3,
        ErrorKind::Numerical => 4,
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Eta(a) => cmd_eta(&a, &mut std::io::stdout().lock()),
        Command::Generate(a) => cmd_generate(&a),
    }
}

fn with_output(path: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> Result<(), Error>) -> Result<(), CliError> {
    let describe = || path.map_or("standard output".to_string(), |p| p.display().to_string());
    let result = match path {
        Some(p) => File::create(p).map_err(Error::from).and_then(|f| {
            let mut w = BufWriter::new(f);
            body(&mut w)?;
            w.flush().map_err(Error::from)
        }),
        None => {
            let mut w = std::io::stdout().lock();
            body(&mut w).and_then(|_| w.flush().map_err(Error::from))
        }
    };
    result.context(|| format!("writing {}", describe()))
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// The `analyze` JSON document.
#[derive(Debug, Serialize)]
pub struct AnalysisDocument {
    pub schema_version: u32,
    pub alpha_pretest: f64,
    pub trend_order: usize,
    pub coefficients: EstimateBundle,
    #[serde(flatten)]
    pub report: InferenceReport,
}

/// Loads, estimates and analyzes a dataset.
pub fn analyze_file(args: &AnalyzeArgs) -> Result<AnalysisDocument, CliError> {
    let input = || args.input.display().to_string();
    let panel = load_panel(&args.input).context(input)?;
    let bundle = estimate_event_study(&panel).context(input)?;
    let report = analyze(&bundle, args.alpha_pretest, args.alpha_ci, args.trend_order).context(input)?;
    Ok(AnalysisDocument {
        schema_version: SCHEMA_VERSION,
        alpha_pretest: args.alpha_pretest,
        trend_order: args.trend_order,
        coefficients: bundle,
        report,
    })
}

#[derive(Debug, Serialize)]
struct EstimatorRow {
    estimator: &'static str,
    pretest_passed: bool,
    #[serde(serialize_with = "serialize_opt_ext_f64")]
    estimate: Option<f64>,
    #[serde(serialize_with = "serialize_opt_ext_f64")]
    se: Option<f64>,
    #[serde(serialize_with = "serialize_opt_ext_f64")]
    ci_lower: Option<f64>,
    #[serde(serialize_with = "serialize_opt_ext_f64")]
    ci_upper: Option<f64>,
    #[serde(serialize_with = "serialize_opt_ext_f64")]
    window_lower: Option<f64>,
    #[serde(serialize_with = "serialize_opt_ext_f64")]
    window_upper: Option<f64>,
}

fn estimator_rows(report: &InferenceReport) -> Vec<EstimatorRow> {
    let passed = report.pretest.passed;
    let wald = |name, b: &pretrends_core::estimators::WaldBlock| EstimatorRow {
        estimator: name,
        pretest_passed: passed,
        estimate: Some(b.estimate),
        se: Some(b.se),
        ci_lower: Some(b.ci_lower),
        ci_upper: Some(b.ci_upper),
        window_lower: None,
        window_upper: None,
    };
    let conditional = |name, b: &Option<ConditionalBlock>| EstimatorRow {
        estimator: name,
        pretest_passed: passed,
        estimate: b.as_ref().map(|b| b.estimate),
        se: None,
        ci_lower: b.as_ref().map(|b| b.ci_lower),
        ci_upper: b.as_ref().map(|b| b.ci_upper),
        window_lower: b.as_ref().map(|b| b.window_lower.to_f64()),
        window_upper: b.as_ref().map(|b| b.window_upper.to_f64()),
    };
    vec![
        wald("traditional", &report.traditional),
        wald("efficient", &report.efficient),
        conditional("median_unbiased_beta", &report.median_unbiased_beta),
        conditional("median_unbiased_gamma", &report.median_unbiased_gamma),
    ]
}

/// Writes the analysis of `args.input` as JSON, or as one CSV row per estimator.
pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let doc = analyze_file(args)?;
    with_output(args.output.as_deref(), |w| match args.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, &doc).map_err(json_error)?;
            writeln!(w)?;
            Ok(())
        }
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(w);
            for row in estimator_rows(&doc.report) {
                csv.serialize(row).map_err(|e| Error::Io(std::io::Error::other(e)))?;
            }
            csv.flush()?;
            Ok(())
        }
    })
}

/// Merges the config file, flags and per-table defaults.
pub fn simulation_config(args: &SimulateArgs) -> Result<(TableId, SimConfig), CliError> {
    let table = TableId::from_number(args.table).context(|| "--table".into())?;
    let mut config = match &args.config {
        Some(path) => {
            let ctx = || path.display().to_string();
            let text = std::fs::read_to_string(path).map_err(Error::from).context(ctx)?;
            serde_json::from_str::<SimConfig>(&text)
                .map_err(|e| Error::Parse { line: e.line() as u64, message: e.to_string() })
                .context(ctx)?
        }
        None => SimConfig::default(),
    };
    let dgp = args.dgp.or(match (&args.config, table) {
        (Some(_), _) => None,
        (None, TableId::One) => Some(Dgp::Null),
        (None, _) => Some(Dgp::Trend),
    });
    match (dgp, args.slope) {
        (Some(Dgp::Null), Some(_)) => {
            return Err(Error::InvalidArgument("--slope applies only to the trend design".into()))
                .context(|| "--dgp null".into())
        }
        (Some(Dgp::Null), None) => config.trend_slope = 0.0,
        (Some(Dgp::Trend), slope) => config.trend_slope = slope.unwrap_or(TREND_SLOPE),
        (None, Some(slope)) => config.trend_slope = slope,
        (None, None) => {}
    }
    if let Some(v) = args.reps {
        config.reps = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if let Some(v) = args.k_max {
        config.k_max = v;
    }
    if let Some(v) = args.n {
        config.n_per_cell = v;
    }
    if args.workers.is_some() {
        config.workers = args.workers;
    }
    if args.full_path {
        config.fast_path = false;
    }
    if args.known_sigma {
        config.known_sigma = true;
    }
    config.validate().context(|| "simulation settings".into())?;
    Ok((table, config))
}

/// Runs the requested table and writes its rows.
pub fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let (table, config) = simulation_config(args)?;
    let rows = run_table(&config, table).context(|| format!("simulating table {}", table.number()))?;
    with_output(args.output.as_deref(), |w| match args.format {
        Format::Csv => write_csv(&rows, w),
        Format::Json => write_json(&rows, w),
    })
}

/// Prints `η` as a JSON array, post weight first.
pub fn cmd_eta(args: &EtaArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let eta = eta_gamma(args.k, args.p, args.m).context(|| format!("eta for k={}, p={}", args.k, args.p))?;
    let text = serde_json::to_string(eta.as_slice()).map_err(json_error).context(|| "eta".into())?;
    writeln!(out, "{text}").map_err(Error::from).context(|| "writing eta".into())
}

/// Writes a panel from the individual-outcome generator, seeded directly
/// with `args.seed`.
pub fn cmd_generate(args: &GenerateArgs) -> Result<(), CliError> {
    let config = SimConfig {
        k_max: args.k.max(1),
        n_per_cell: args.n,
        sigma_noise: args.sigma,
        trend_slope: args.slope,
        reps: 1,
        seed: args.seed,
        fast_path: false,
        ..SimConfig::default()
    };
    if args.k == 0 {
        return Err(Error::InvalidArgument("--k must be at least 1".into())).context(|| "generate".into());
    }
    config.validate().context(|| "generate".into())?;
    let panel = generate_panel(&config, args.k, &mut ChaCha8Rng::seed_from_u64(args.seed))
        .context(|| "generate".into())?;
    with_output(args.output.as_deref(), |w| write_panel(&panel, w))
}
