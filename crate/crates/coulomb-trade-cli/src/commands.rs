use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use coulomb_trade::dataset::{self, Dataset};
use coulomb_trade::estimation::{
    alpha_distribution, cdf_residuals, fit_linearity as fit_linearity_op,
    fit_rho as fit_rho_op, parse_alpha_csv,
};
use coulomb_trade::model_core::log_form;
use coulomb_trade::predict::{calibrate_prefactor, compose, predict_trade, residual_omega, ObservedYear};
use coulomb_trade::report::{
    cdf_series_tsv, xy_series_tsv, BatchError, ComposedSummary, FitReport, OmegaValue,
    PredictionReport, PredictionRow, ReportMetadata,
};
use coulomb_trade::synth::{generate_synthetic, SynthConfig};
use coulomb_trade::trade_data::{normalize, CountryId, Year};
use serde::Serialize;

use crate::{
    AlphaDistArgs, BetaMode, FitAlphaArgs, FitBetaArgs, FitLinearityArgs, FitRhoArgs, IngestArgs,
    OutputFormat, PredictArgs, ReportArgs, RhoAggregation, SynthArgs,
};

/// Default fitting window when --years is not given.
const DEFAULT_YEARS: (i64, i64) = (2009, 2019);
/// Reference distance-decay exponent used when no pair ratio is supplied.
const DEFAULT_BETA: f64 = 1.7;

fn parse_years(spec: &str) -> Result<(Year, Year)> {
    let (a, b) = spec
        .split_once(':')
        .with_context(|| format!("--years expects A:B, got {spec:?}"))?;
    let lo = Year::new(a.parse().with_context(|| format!("unparsable year {a:?}"))?)?;
    let hi = Year::new(b.parse().with_context(|| format!("unparsable year {b:?}"))?)?;
    if lo > hi {
        bail!("--years window {spec:?} is empty");
    }
    Ok((lo, hi))
}

fn year_window(arg: &Option<String>) -> Result<(Year, Year)> {
    match arg {
        Some(spec) => parse_years(spec),
        None => Ok((Year::new(DEFAULT_YEARS.0)?, Year::new(DEFAULT_YEARS.1)?)),
    }
}

fn parse_pair(spec: &str) -> Result<(CountryId, CountryId)> {
    let (a, b) = spec
        .split_once(':')
        .with_context(|| format!("pair {spec:?} must be REPORTER:PARTNER"))?;
    Ok((CountryId::new(a)?, CountryId::new(b)?))
}

fn select_pairs(dataset: &Dataset, spec: &str) -> Result<Vec<(CountryId, CountryId)>> {
    if spec == "all" {
        return Ok(dataset.all_pairs());
    }
    spec.split(',').map(parse_pair).collect()
}

fn select_countries(dataset: &Dataset, spec: &str) -> Result<Vec<CountryId>> {
    if spec == "all" {
        return Ok(dataset.flows.countries());
    }
    spec.split(',').map(CountryId::new).collect::<Result<_, _>>().map_err(Into::into)
}

fn write_output(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn write_plot(dir: &Path, name: &str, content: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, content).with_context(|| format!("writing {}", path.display()))
}

fn windowed(years: (Year, Year)) -> Option<(Year, Year)> {
    Some(years)
}

pub fn ingest(args: IngestArgs) -> Result<()> {
    let (manifest, summary) = dataset::ingest(
        &args.flows,
        args.gdp.as_deref(),
        &args.distances,
        args.capitals.as_deref(),
        &args.out,
        args.strict,
    )?;

    #[derive(Serialize)]
    struct IngestOutput<'a> {
        bundle: &'a Path,
        manifest: &'a coulomb_trade::Manifest,
        summary: &'a dataset::ValidationSummary,
    }
    let out = IngestOutput {
        bundle: &args.out,
        manifest: &manifest,
        summary: &summary,
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

pub fn synth(args: SynthArgs) -> Result<()> {
    let (start, end) = parse_years(&args.years)?;
    let config = SynthConfig {
        n_countries: args.countries,
        start_year: i64::from(start),
        end_year: i64::from(end),
        alpha: args.alpha,
        beta: args.beta,
        omega_default: args.omega,
        omega_overrides: BTreeMap::new(),
        gdp_min: args.gdp_min,
        gdp_max: args.gdp_max,
        rho: args.rho,
        noise_sigma: args.noise_sigma,
        rng_seed: args.seed,
    };
    let output = generate_synthetic(&config)?;
    let manifest = output.write_bundle(&args.out, &config)?;

    #[derive(Serialize)]
    struct SynthSummary<'a> {
        bundle: &'a Path,
        countries: usize,
        years: (i64, i64),
        pairs: usize,
        manifest: &'a coulomb_trade::Manifest,
    }
    let summary = SynthSummary {
        bundle: &args.out,
        countries: output.countries.len(),
        years: (config.start_year, config.end_year),
        pairs: output.canonical_pairs.len(),
        manifest: &manifest,
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn alpha_plot_rows(
    dataset: &Dataset,
    pair: (CountryId, CountryId),
    years: (Year, Year),
    alpha: f64,
) -> Result<Vec<(Year, f64, f64)>> {
    dataset
        .pair_observations(pair.0, pair.1, windowed(years))
        .iter()
        .map(|obs| {
            let (x, y) = log_form(obs, alpha)?;
            Ok((obs.year, x, y))
        })
        .collect::<Result<_, coulomb_trade::Error>>()
        .map_err(Into::into)
}

pub fn fit_alpha(args: FitAlphaArgs) -> Result<()> {
    let dataset = dataset::load_bundle(&args.dataset)?;
    let years = year_window(&args.years)?;
    let pairs = select_pairs(&dataset, &args.pairs)?;
    let batch = pairs.len() > 1;

    let mut report = FitReport::new(ReportMetadata::new(dataset.manifest.content_hashes.clone()));
    for &(reporter, partner) in &pairs {
        let series = dataset.pair_observations(reporter, partner, windowed(years));
        match coulomb_trade::fit_alpha((reporter, partner), &series) {
            Ok(fit) => {
                if let Some(dir) = &args.plot_dir {
                    let rows = alpha_plot_rows(&dataset, (reporter, partner), years, fit.alpha)?;
                    let tsv = xy_series_tsv(&rows, fit.fit.slope, fit.fit.intercept);
                    write_plot(dir, &format!("alpha_{reporter}_{partner}.tsv"), &tsv)?;
                }
                report.pair_fits.push(fit);
            }
            Err(err) if batch => report.pair_errors.push(BatchError {
                subject: format!("{reporter}:{partner}"),
                error: err.to_string(),
            }),
            Err(err) => return Err(err.into()),
        }
    }

    match args.format {
        OutputFormat::Json => write_output(&args.out, &report.to_json()?),
        OutputFormat::Tsv => {
            if report.pair_fits.len() != 1 {
                bail!("--format tsv emits a single series; use --plot-dir for batch runs");
            }
            let fit = &report.pair_fits[0];
            let rows = alpha_plot_rows(&dataset, fit.pair, years, fit.alpha)?;
            write_output(&args.out, &xy_series_tsv(&rows, fit.fit.slope, fit.fit.intercept))
        }
    }
}

pub fn fit_beta(args: FitBetaArgs) -> Result<()> {
    let dataset = dataset::load_bundle(&args.dataset)?;
    let years = year_window(&args.years)?;
    let num_pair = parse_pair(&args.num)?;
    let den_pair = parse_pair(&args.den)?;

    let num_series = dataset.pair_observations(num_pair.0, num_pair.1, windowed(years));
    let den_series = dataset.pair_observations(den_pair.0, den_pair.1, windowed(years));

    let alpha_for = |pair: (CountryId, CountryId),
                     series: &[coulomb_trade::PairObservation],
                     explicit: Option<f64>|
     -> Result<f64> {
        match explicit {
            Some(alpha) => Ok(alpha),
            None => Ok(coulomb_trade::fit_alpha(pair, series)?.alpha),
        }
    };
    let alpha_num = alpha_for(num_pair, &num_series, args.alpha_num)?;
    let alpha_den = alpha_for(den_pair, &den_series, args.alpha_den)?;

    let r_num = dataset.resolve_distance(num_pair.0, num_pair.1)?;
    let r_den = dataset.resolve_distance(den_pair.0, den_pair.1)?;
    let triple = coulomb_trade::fit_beta(
        num_pair, &num_series, den_pair, &den_series, alpha_num, alpha_den, r_num, r_den,
    )?;

    // per-year ratio points for the plot
    let rows: Vec<(Year, f64, f64)> = num_series
        .iter()
        .filter_map(|num| {
            let den = den_series.iter().find(|d| d.year == num.year)?;
            let (x_num, y_num) = log_form(num, alpha_num).ok()?;
            let (x_den, y_den) = log_form(den, alpha_den).ok()?;
            Some((num.year, x_num - x_den, y_num - y_den))
        })
        .collect();
    let tsv = xy_series_tsv(&rows, triple.fit.slope, triple.fit.intercept);
    if let Some(path) = &args.plot {
        write_output(&Some(path.clone()), &tsv)?;
    }

    let mut report = FitReport::new(ReportMetadata::new(dataset.manifest.content_hashes.clone()));
    report.triple_fits.push(triple);
    match args.format {
        OutputFormat::Json => write_output(&args.out, &report.to_json()?),
        OutputFormat::Tsv => write_output(&args.out, &tsv),
    }
}

pub fn alpha_dist(args: AlphaDistArgs) -> Result<()> {
    let mut samples = Vec::new();
    for path in &args.reports {
        let content =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let value: serde_json::Value = serde_json::from_str(&content)?;
        let fits = value["pair_fits"]
            .as_array()
            .with_context(|| format!("{} has no pair_fits array", path.display()))?;
        for fit in fits {
            let alpha = fit["alpha"]
                .as_f64()
                .with_context(|| format!("{} has a pair fit without alpha", path.display()))?;
            samples.push(alpha);
        }
    }
    if let Some(path) = &args.alphas_csv {
        let content =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        samples.extend(parse_alpha_csv(&content)?);
    }
    if samples.len() < 2 {
        bail!("need at least 2 alphas; supply --report and/or --alphas-csv inputs");
    }

    let dist = alpha_distribution(&samples)?;
    let cdf = cdf_residuals(&samples, &dist)?;
    let tsv = cdf_series_tsv(&cdf);
    if let Some(path) = &args.plot {
        write_output(&Some(path.clone()), &tsv)?;
    }

    #[derive(Serialize)]
    struct DistOutput {
        schema_version: u32,
        mu: f64,
        sigma: f64,
        n_samples: usize,
        max_abs_cdf_difference: f64,
        cdf: Vec<coulomb_trade::estimation::CdfPoint>,
    }
    let output = DistOutput {
        schema_version: coulomb_trade::report::REPORT_SCHEMA_VERSION,
        mu: dist.mu,
        sigma: dist.sigma,
        n_samples: samples.len(),
        max_abs_cdf_difference: cdf.iter().map(|p| p.difference.abs()).fold(0.0, f64::max),
        cdf,
    };
    match args.format {
        OutputFormat::Json => {
            write_output(&args.out, &(serde_json::to_string_pretty(&output)? + "\n"))
        }
        OutputFormat::Tsv => write_output(&args.out, &tsv),
    }
}

fn windowed_series(series: BTreeMap<Year, f64>, years: (Year, Year)) -> BTreeMap<Year, f64> {
    series
        .into_iter()
        .filter(|(y, _)| *y >= years.0 && *y <= years.1)
        .collect()
}

pub fn fit_rho(args: FitRhoArgs) -> Result<()> {
    let dataset = dataset::load_bundle(&args.dataset)?;
    let years = year_window(&args.years)?;
    let countries = select_countries(&dataset, &args.countries)?;
    let batch = countries.len() > 1;

    let mut report = FitReport::new(ReportMetadata::new(dataset.manifest.content_hashes.clone()));
    for &country in &countries {
        let result = (|| -> coulomb_trade::Result<_> {
            let exports = normalize(&windowed_series(dataset.totals.export_series(country), years))?;
            let gdp = normalize(&windowed_series(dataset.gdp.series(country), years))?;
            let fit = fit_rho_op(country, &exports, &gdp)?;
            let rows: Vec<(Year, f64, f64)> = exports
                .values()
                .iter()
                .filter_map(|(y, e)| gdp.values().get(y).map(|g| (*y, g.ln(), e.ln())))
                .collect();
            Ok((fit, rows))
        })();
        match result {
            Ok((fit, rows)) => {
                if let Some(dir) = &args.plot_dir {
                    let tsv = xy_series_tsv(&rows, fit.fit.slope, fit.fit.intercept);
                    write_plot(dir, &format!("rho_{country}.tsv"), &tsv)?;
                }
                report.power_law_fits.push(fit);
            }
            Err(err) if batch => report.fit_errors.push(BatchError {
                subject: country.to_string(),
                error: err.to_string(),
            }),
            Err(err) => return Err(err.into()),
        }
    }

    match args.format {
        OutputFormat::Json => write_output(&args.out, &report.to_json()?),
        OutputFormat::Tsv => {
            if report.power_law_fits.len() != 1 {
                bail!("--format tsv emits a single series; use --plot-dir for batch runs");
            }
            let fit = &report.power_law_fits[0];
            let exports =
                normalize(&windowed_series(dataset.totals.export_series(fit.country), years))?;
            let gdp = normalize(&windowed_series(dataset.gdp.series(fit.country), years))?;
            let rows: Vec<(Year, f64, f64)> = exports
                .values()
                .iter()
                .filter_map(|(y, e)| gdp.values().get(y).map(|g| (*y, g.ln(), e.ln())))
                .collect();
            write_output(&args.out, &xy_series_tsv(&rows, fit.fit.slope, fit.fit.intercept))
        }
    }
}

pub fn fit_linearity(args: FitLinearityArgs) -> Result<()> {
    let dataset = dataset::load_bundle(&args.dataset)?;
    let years = year_window(&args.years)?;
    let countries = select_countries(&dataset, &args.countries)?;
    let batch = countries.len() > 1;

    let mut report = FitReport::new(ReportMetadata::new(dataset.manifest.content_hashes.clone()));
    for &country in &countries {
        let result = (|| -> coulomb_trade::Result<_> {
            let exports = normalize(&windowed_series(dataset.totals.export_series(country), years))?;
            let imports = normalize(&windowed_series(dataset.totals.import_series(country), years))?;
            let fit = fit_linearity_op(country, &imports, &exports)?;
            let rows: Vec<(Year, f64, f64)> = exports
                .values()
                .iter()
                .filter_map(|(y, e)| imports.values().get(y).map(|i| (*y, *e, *i)))
                .collect();
            Ok((fit, rows))
        })();
        match result {
            Ok((fit, rows)) => {
                if let Some(dir) = &args.plot_dir {
                    let tsv = xy_series_tsv(&rows, fit.slope, 0.0);
                    write_plot(dir, &format!("linearity_{country}.tsv"), &tsv)?;
                }
                report.linearity_fits.push(fit);
            }
            Err(err) if batch => report.fit_errors.push(BatchError {
                subject: country.to_string(),
                error: err.to_string(),
            }),
            Err(err) => return Err(err.into()),
        }
    }

    match args.format {
        OutputFormat::Json => write_output(&args.out, &report.to_json()?),
        OutputFormat::Tsv => {
            if report.linearity_fits.len() != 1 {
                bail!("--format tsv emits a single series; use --plot-dir for batch runs");
            }
            let fit = &report.linearity_fits[0];
            let exports =
                normalize(&windowed_series(dataset.totals.export_series(fit.country), years))?;
            let imports =
                normalize(&windowed_series(dataset.totals.import_series(fit.country), years))?;
            let rows: Vec<(Year, f64, f64)> = exports
                .values()
                .iter()
                .filter_map(|(y, e)| imports.values().get(y).map(|i| (*y, *e, *i)))
                .collect();
            write_output(&args.out, &xy_series_tsv(&rows, fit.slope, 0.0))
        }
    }
}

fn resolve_beta(explicit: Option<f64>, mode: BetaMode) -> (f64, &'static str) {
    match (explicit, mode) {
        (Some(beta), _) => (beta, "explicit"),
        (None, BetaMode::Fitted) => (DEFAULT_BETA, "default"),
        (None, BetaMode::Coulomb2) => (2.0, "coulomb2"),
    }
}

pub fn predict(args: PredictArgs) -> Result<()> {
    let (beta, beta_source) = resolve_beta(args.beta, args.beta_mode);
    let model = compose(args.alpha, args.rho_m, args.rho_n, beta, args.k_prime, args.k_double_prime)?;

    // direct mode: one prediction from explicit inputs
    if args.dataset.is_none() {
        let (Some(gdp_m), Some(gdp_n), Some(distance)) = (args.gdp_m, args.gdp_n, args.distance)
        else {
            bail!("direct mode needs --gdp-m, --gdp-n, and --distance (or pass --dataset)");
        };
        let predicted = predict_trade(&model, gdp_m, gdp_n, distance, args.omega)?;

        #[derive(Serialize)]
        struct DirectPrediction {
            schema_version: u32,
            beta_source: &'static str,
            model: coulomb_trade::ComposedModel,
            gdp_m: f64,
            gdp_n: f64,
            distance_km: f64,
            omega: f64,
            predicted_usd: f64,
        }
        let out = DirectPrediction {
            schema_version: coulomb_trade::report::REPORT_SCHEMA_VERSION,
            beta_source,
            model,
            gdp_m,
            gdp_n,
            distance_km: distance,
            omega: args.omega,
            predicted_usd: predicted,
        };
        return write_output(&args.out, &(serde_json::to_string_pretty(&out)? + "\n"));
    }

    // dataset mode: per-year predictions and residual dielectric constants
    let dataset = dataset::load_bundle(args.dataset.as_ref().unwrap())?;
    let pair_spec = args
        .pair
        .as_ref()
        .context("dataset mode needs --pair REPORTER:PARTNER")?;
    let (reporter, partner) = parse_pair(pair_spec)?;
    let years = year_window(&args.years)?;
    let r_km = dataset.resolve_distance(reporter, partner)?;

    let mut observed = BTreeMap::new();
    let mut warnings = Vec::new();
    for year in dataset.flows.years() {
        if year < years.0 || year > years.1 {
            continue;
        }
        let Some(trade) = dataset.observed_trade(reporter, partner, year) else {
            continue;
        };
        let gdp_m = dataset.totals.get(reporter, year).and_then(|t| t.gdp_usd);
        let gdp_n = dataset.totals.get(partner, year).and_then(|t| t.gdp_usd);
        let (Some(gdp_m), Some(gdp_n)) = (gdp_m, gdp_n) else {
            warnings.push(format!("{year}: missing GDP, year skipped"));
            continue;
        };
        observed.insert(year, ObservedYear { trade_usd: trade, gdp_m, gdp_n });
    }
    if observed.is_empty() {
        bail!("no usable years for {reporter}:{partner} in the requested window");
    }

    let mut model = model;
    let mut calibration = None;
    if let Some(reference_year) = args.calibrate_year {
        let reference_year = Year::new(reference_year)?;
        let reference = observed
            .get(&reference_year)
            .with_context(|| format!("calibration year {reference_year} has no usable observation"))?;
        model.prefactor = calibrate_prefactor(
            &model,
            reference.gdp_m,
            reference.gdp_n,
            r_km,
            reference.trade_usd,
            args.omega,
        )?;
        calibration = Some((reference_year, model.prefactor));
    }

    let omegas = residual_omega(&model, &observed, r_km)?;
    let rows: Vec<PredictionRow> = observed
        .iter()
        .map(|(year, obs)| {
            let predicted = predict_trade(&model, obs.gdp_m, obs.gdp_n, r_km, args.omega)?;
            Ok(PredictionRow {
                year: *year,
                predicted_usd: Some(predicted),
                observed_usd: Some(obs.trade_usd),
                residual_omega: Some(OmegaValue(omegas[year])),
            })
        })
        .collect::<coulomb_trade::Result<_>>()?;

    #[derive(Serialize)]
    struct DatasetPrediction {
        schema_version: u32,
        beta_source: &'static str,
        calibrated_prefactor: Option<(Year, f64)>,
        omega: f64,
        model: coulomb_trade::ComposedModel,
        warnings: Vec<String>,
        prediction: PredictionReport,
    }
    let out = DatasetPrediction {
        schema_version: coulomb_trade::report::REPORT_SCHEMA_VERSION,
        beta_source,
        calibrated_prefactor: calibration,
        omega: args.omega,
        model,
        warnings,
        prediction: PredictionReport {
            pair: (reporter, partner),
            distance_km: r_km,
            rows,
        },
    };
    write_output(&args.out, &(serde_json::to_string_pretty(&out)? + "\n"))
}

fn aggregate(values: &[f64], how: RhoAggregation) -> f64 {
    match how {
        RhoAggregation::Mean => values.iter().sum::<f64>() / values.len() as f64,
        RhoAggregation::Median => {
            let mut sorted = values.to_vec();
            sorted.sort_by(f64::total_cmp);
            let n = sorted.len();
            if n % 2 == 1 {
                sorted[n / 2]
            } else {
                0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
            }
        }
    }
}

pub fn report(args: ReportArgs) -> Result<()> {
    let dataset = dataset::load_bundle(&args.dataset)?;
    let years = year_window(&args.years)?;
    let pairs = select_pairs(&dataset, &args.pairs)?;

    let mut report = FitReport::new(ReportMetadata::new(dataset.manifest.content_hashes.clone()));

    // alpha per pair
    for &(reporter, partner) in &pairs {
        let series = dataset.pair_observations(reporter, partner, windowed(years));
        match coulomb_trade::fit_alpha((reporter, partner), &series) {
            Ok(fit) => {
                if let Some(dir) = &args.plot_dir {
                    let rows = alpha_plot_rows(&dataset, (reporter, partner), years, fit.alpha)?;
                    let tsv = xy_series_tsv(&rows, fit.fit.slope, fit.fit.intercept);
                    write_plot(dir, &format!("alpha_{reporter}_{partner}.tsv"), &tsv)?;
                }
                report.pair_fits.push(fit);
            }
            Err(err) => report.pair_errors.push(BatchError {
                subject: format!("{reporter}:{partner}"),
                error: err.to_string(),
            }),
        }
    }

    // distribution of the fitted alphas
    let alphas: Vec<f64> = report.pair_fits.iter().map(|f| f.alpha).collect();
    if alphas.len() >= 2 {
        let dist = alpha_distribution(&alphas)?;
        let cdf = cdf_residuals(&alphas, &dist)?;
        if let Some(dir) = &args.plot_dir {
            write_plot(dir, "alpha_cdf.tsv", &cdf_series_tsv(&cdf))?;
        }
        report.distribution = Some(FitReport::distribution_report(&dist, cdf));
    }

    // export-GDP power law and import-export proportionality per country
    for country in dataset.flows.countries() {
        match (|| -> coulomb_trade::Result<_> {
            let exports = normalize(&windowed_series(dataset.totals.export_series(country), years))?;
            let gdp = normalize(&windowed_series(dataset.gdp.series(country), years))?;
            fit_rho_op(country, &exports, &gdp)
        })() {
            Ok(fit) => report.power_law_fits.push(fit),
            Err(err) => report.fit_errors.push(BatchError {
                subject: format!("rho {country}"),
                error: err.to_string(),
            }),
        }
        match (|| -> coulomb_trade::Result<_> {
            let exports = normalize(&windowed_series(dataset.totals.export_series(country), years))?;
            let imports = normalize(&windowed_series(dataset.totals.import_series(country), years))?;
            fit_linearity_op(country, &imports, &exports)
        })() {
            Ok(fit) => report.linearity_fits.push(fit),
            Err(err) => report.fit_errors.push(BatchError {
                subject: format!("linearity {country}"),
                error: err.to_string(),
            }),
        }
    }

    // beta: from a pair ratio when one is requested, otherwise the default
    let mut beta = DEFAULT_BETA;
    let mut beta_mode = "default";
    if let (Some(num), Some(den)) = (&args.num, &args.den) {
        let num_pair = parse_pair(num)?;
        let den_pair = parse_pair(den)?;
        let alpha_of = |pair: (CountryId, CountryId)| -> Option<f64> {
            report.pair_fits.iter().find(|f| f.pair == pair).map(|f| f.alpha)
        };
        let num_series = dataset.pair_observations(num_pair.0, num_pair.1, windowed(years));
        let den_series = dataset.pair_observations(den_pair.0, den_pair.1, windowed(years));
        let alpha_num = match alpha_of(num_pair) {
            Some(a) => a,
            None => coulomb_trade::fit_alpha(num_pair, &num_series)?.alpha,
        };
        let alpha_den = match alpha_of(den_pair) {
            Some(a) => a,
            None => coulomb_trade::fit_alpha(den_pair, &den_series)?.alpha,
        };
        let triple = coulomb_trade::fit_beta(
            num_pair,
            &num_series,
            den_pair,
            &den_series,
            alpha_num,
            alpha_den,
            dataset.resolve_distance(num_pair.0, num_pair.1)?,
            dataset.resolve_distance(den_pair.0, den_pair.1)?,
        )?;
        beta = triple.beta;
        beta_mode = "fitted";
        report.triple_fits.push(triple);
    }
    if args.beta_mode == BetaMode::Coulomb2 {
        beta = 2.0;
        beta_mode = "coulomb2";
    }
    if beta_mode == "default" {
        report
            .metadata
            .warnings
            .push(format!("no pair ratio supplied; using the reference decay exponent {DEFAULT_BETA}"));
    }

    // composed model summary
    if let Some(dist) = &report.distribution {
        if !report.power_law_fits.is_empty() && !report.linearity_fits.is_empty() {
            let rhos: Vec<f64> = report.power_law_fits.iter().map(|f| f.rho).collect();
            let k_primes: Vec<f64> = report.power_law_fits.iter().map(|f| f.k_prime).collect();
            let k_double_primes: Vec<f64> =
                report.linearity_fits.iter().map(|f| f.slope).collect();
            let rho_aggregate = aggregate(&rhos, args.rho_agg);
            let k_prime_aggregate = aggregate(&k_primes, args.rho_agg);
            let k_double_prime_aggregate = aggregate(&k_double_primes, args.rho_agg);
            report.composed = Some(ComposedSummary {
                alpha: dist.mu,
                beta,
                beta_mode: beta_mode.to_string(),
                rho_by_country: report
                    .power_law_fits
                    .iter()
                    .map(|f| (f.country, f.rho))
                    .collect(),
                rho_aggregate,
                rho_aggregation: match args.rho_agg {
                    RhoAggregation::Mean => "mean".to_string(),
                    RhoAggregation::Median => "median".to_string(),
                },
                k_prime_aggregate,
                k_double_prime_aggregate,
                prefactor: 2.0 * k_prime_aggregate * k_double_prime_aggregate,
                combined_exponent: dist.mu * rho_aggregate,
            });
        }
    }

    write_output(&args.out, &report.to_json()?)
}
