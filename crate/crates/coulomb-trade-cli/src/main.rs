//! Command-line driver: ingest CSV panels into dataset bundles, generate
//! synthetic panels, run the fitting pipeline, and emit JSON reports plus
//! plot-ready TSV series.

mod commands;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "coulomb-trade",
    version,
    about = "Calibrate and evaluate the Coulomb model of international trade"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Tsv,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum BetaMode {
    /// Use the fitted (or default 1.7) distance exponent.
    Fitted,
    /// Force the inverse-square exponent, beta = 2.
    Coulomb2,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum RhoAggregation {
    Mean,
    Median,
}

#[derive(Subcommand)]
enum Command {
    /// Validate raw CSVs and assemble a canonical dataset bundle.
    Ingest(IngestArgs),
    /// Generate a deterministic synthetic dataset bundle.
    Synth(SynthArgs),
    /// Fit the interaction exponent alpha for one or more pairs.
    FitAlpha(FitAlphaArgs),
    /// Estimate the distance exponent beta from two pair trade ratios.
    FitBeta(FitBetaArgs),
    /// Summarize fitted alphas: mean, sigma, and CDF residuals.
    AlphaDist(AlphaDistArgs),
    /// Fit the export-GDP power law per country.
    FitRho(FitRhoArgs),
    /// Fit the import-export proportionality per country.
    FitLinearity(FitLinearityArgs),
    /// Predict trade volumes and extract residual dielectric constants.
    Predict(PredictArgs),
    /// Run the full pipeline and emit one aggregated report.
    Report(ReportArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// Flow CSV (year,reporter,partner,export_usd,import_usd).
    #[arg(long)]
    flows: PathBuf,
    /// GDP CSV (year,country,gdp_usd).
    #[arg(long)]
    gdp: Option<PathBuf>,
    /// Distance CSV (country_a,country_b,km).
    #[arg(long)]
    distances: PathBuf,
    /// Capitals CSV (country,lat,lon), used as a distance fallback.
    #[arg(long)]
    capitals: Option<PathBuf>,
    /// Output bundle directory.
    #[arg(long)]
    out: PathBuf,
    /// Reject panels whose mirrored flows disagree by more than 20%.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// Output bundle directory.
    #[arg(long)]
    out: PathBuf,
    /// RNG seed; the bundle is byte-identical for a fixed seed and flags.
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 6)]
    countries: usize,
    /// Inclusive year window, e.g. 2009:2019.
    #[arg(long, default_value = "2009:2019")]
    years: String,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 1.7)]
    beta: f64,
    /// Dielectric constant shared by every pair.
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long, default_value_t = 1.33)]
    rho: f64,
    /// Lognormal noise level on trade values.
    #[arg(long, default_value_t = 0.0)]
    noise_sigma: f64,
    #[arg(long, default_value_t = 2.0e11)]
    gdp_min: f64,
    #[arg(long, default_value_t = 5.0e12)]
    gdp_max: f64,
}

#[derive(Args)]
struct FitAlphaArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Comma-separated REPORTER:PARTNER pairs, or "all" for the bundle's
    /// canonical pair list.
    #[arg(long, default_value = "all")]
    pairs: String,
    /// Inclusive year window A:B (defaults to 2009:2019).
    #[arg(long)]
    years: Option<String>,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Directory for per-pair plot series (year, x, y, fitted_y).
    #[arg(long)]
    plot_dir: Option<PathBuf>,
}

#[derive(Args)]
struct FitBetaArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Numerator pair, REPORTER:PARTNER.
    #[arg(long)]
    num: String,
    /// Denominator pair, REPORTER:PARTNER.
    #[arg(long)]
    den: String,
    /// Alpha for the numerator pair; fitted from the data when omitted.
    #[arg(long)]
    alpha_num: Option<f64>,
    /// Alpha for the denominator pair; fitted from the data when omitted.
    #[arg(long)]
    alpha_den: Option<f64>,
    #[arg(long)]
    years: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Path for the ratio plot series.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct AlphaDistArgs {
    /// Fit-report JSON files whose pair alphas enter the distribution.
    #[arg(long = "report")]
    reports: Vec<PathBuf>,
    /// CSV of alphas (region,country1,country2,alpha), e.g. the bundled
    /// fixtures/table_a1.csv.
    #[arg(long)]
    alphas_csv: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Path for the CDF plot series.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct FitRhoArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Comma-separated country codes, or "all".
    #[arg(long, default_value = "all")]
    countries: String,
    #[arg(long)]
    years: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Directory for per-country plot series.
    #[arg(long)]
    plot_dir: Option<PathBuf>,
}

#[derive(Args)]
struct FitLinearityArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value = "all")]
    countries: String,
    #[arg(long)]
    years: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    #[arg(long)]
    plot_dir: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    /// Dataset bundle; omit to predict from explicit --gdp-m/--gdp-n inputs.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Pair to evaluate, REPORTER:PARTNER (dataset mode).
    #[arg(long)]
    pair: Option<String>,
    #[arg(long)]
    years: Option<String>,
    #[arg(long, default_value_t = 0.47)]
    alpha: f64,
    #[arg(long, default_value_t = 1.33)]
    rho_m: f64,
    #[arg(long, default_value_t = 1.33)]
    rho_n: f64,
    /// Explicit distance exponent; overrides --beta-mode.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, value_enum, default_value_t = BetaMode::Fitted)]
    beta_mode: BetaMode,
    #[arg(long, default_value_t = 1.0)]
    k_prime: f64,
    #[arg(long, default_value_t = 1.0)]
    k_double_prime: f64,
    /// Dielectric constant used for the prediction.
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    /// Recalibrate the prefactor against this year's observed trade
    /// (dataset mode), using --omega as the reference dielectric.
    #[arg(long)]
    calibrate_year: Option<i64>,
    /// GDP of country m, USD (direct mode).
    #[arg(long)]
    gdp_m: Option<f64>,
    /// GDP of country n, USD (direct mode).
    #[arg(long)]
    gdp_n: Option<f64>,
    /// Distance in km (direct mode).
    #[arg(long)]
    distance: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value = "all")]
    pairs: String,
    #[arg(long)]
    years: Option<String>,
    /// Numerator pair for the beta estimate, REPORTER:PARTNER.
    #[arg(long)]
    num: Option<String>,
    /// Denominator pair for the beta estimate, REPORTER:PARTNER.
    #[arg(long)]
    den: Option<String>,
    #[arg(long, value_enum, default_value_t = BetaMode::Fitted)]
    beta_mode: BetaMode,
    #[arg(long, value_enum, default_value_t = RhoAggregation::Mean)]
    rho_agg: RhoAggregation,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for all plot series emitted alongside the report.
    #[arg(long)]
    plot_dir: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let result: Result<()> = match cli.command {
        Command::Ingest(args) => commands::ingest(args),
        Command::Synth(args) => commands::synth(args),
        Command::FitAlpha(args) => commands::fit_alpha(args),
        Command::FitBeta(args) => commands::fit_beta(args),
        Command::AlphaDist(args) => commands::alpha_dist(args),
        Command::FitRho(args) => commands::fit_rho(args),
        Command::FitLinearity(args) => commands::fit_linearity(args),
        Command::Predict(args) => commands::predict(args),
        Command::Report(args) => commands::report(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
