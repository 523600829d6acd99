//! End-to-end pipeline: generate a bundle on disk, load it back, fit every
//! canonical pair, compose the predictive model, and recover the configured
//! dielectric constants.

use std::collections::BTreeMap;

use coulomb_trade::dataset::load_bundle;
use coulomb_trade::estimation::{alpha_distribution, cdf_residuals, fit_alpha, fit_beta, fit_linearity, fit_rho};
use coulomb_trade::predict::{calibrate_prefactor, compose, residual_omega, ObservedYear};
use coulomb_trade::report::{check_plot_tsv, xy_series_tsv, FitReport, ReportMetadata};
use coulomb_trade::synth::{generate_synthetic, SynthConfig};
use coulomb_trade::trade_data::normalize;
use coulomb_trade::model_core::log_form;

#[test]
fn full_pipeline_on_a_generated_bundle() {
    let mut config = SynthConfig::new(6, 2024);
    config.alpha = 0.47;
    config.beta = 1.7;
    config.omega_default = 2.5;
    let dir = tempfile::tempdir().unwrap();
    generate_synthetic(&config)
        .unwrap()
        .write_bundle(dir.path(), &config)
        .unwrap();

    let dataset = load_bundle(dir.path()).unwrap();
    assert_eq!(dataset.all_pairs().len(), 15);

    // alpha per canonical pair
    let mut alphas = Vec::new();
    let mut pair_fits = Vec::new();
    for (reporter, partner) in dataset.all_pairs() {
        let series = dataset.pair_observations(reporter, partner, None);
        let fit = fit_alpha((reporter, partner), &series).unwrap();
        assert!((fit.alpha - 0.47).abs() < 1e-3, "{reporter}-{partner}: {}", fit.alpha);
        assert!((fit.fit.slope - 1.0).abs() < 1e-6);
        alphas.push(fit.alpha);
        pair_fits.push(fit);
    }

    // the fitted alphas concentrate tightly, so the distribution is sane
    let dist = alpha_distribution(&alphas).unwrap();
    assert!((dist.mu - 0.47).abs() < 1e-3);
    assert!(dist.sigma < 1e-3);
    let cdf = cdf_residuals(&alphas, &dist).unwrap();
    assert_eq!(cdf.len(), 15);

    // beta from the widest distance ratio, using fitted alphas
    let pairs = dataset.all_pairs();
    let mut best = (0usize, 1usize, 0.0f64);
    for a in 0..pairs.len() {
        for b in 0..pairs.len() {
            if a == b {
                continue;
            }
            let ra = dataset.resolve_distance(pairs[a].0, pairs[a].1).unwrap();
            let rb = dataset.resolve_distance(pairs[b].0, pairs[b].1).unwrap();
            let spread = (rb / ra).ln().abs();
            if spread > best.2 {
                best = (a, b, spread);
            }
        }
    }
    let (na, nb, _) = best;
    let (num, den) = (pairs[na], pairs[nb]);
    let triple = fit_beta(
        num,
        &dataset.pair_observations(num.0, num.1, None),
        den,
        &dataset.pair_observations(den.0, den.1, None),
        pair_fits[na].alpha,
        pair_fits[nb].alpha,
        dataset.resolve_distance(num.0, num.1).unwrap(),
        dataset.resolve_distance(den.0, den.1).unwrap(),
    )
    .unwrap();
    assert!((triple.beta - 1.7).abs() < 1e-3, "beta = {}", triple.beta);

    // rho and linearity for every country (the generator builds both in)
    for country in dataset.flows.countries() {
        let exports = normalize(&dataset.totals.export_series(country)).unwrap();
        let imports = normalize(&dataset.totals.import_series(country)).unwrap();
        let gdp = normalize(&dataset.gdp.series(country)).unwrap();
        let rho = fit_rho(country, &exports, &gdp).unwrap();
        assert!((rho.rho - config.rho).abs() < 1e-9, "{country}: rho = {}", rho.rho);
        let lin = fit_linearity(country, &imports, &exports).unwrap();
        assert!((lin.slope - 1.0).abs() < 1e-9);
    }

    // compose with a reference-year calibrated prefactor, then recover the
    // configured omega on every year of the chosen pair
    let (m, n) = num;
    let rho_m = fit_rho(m, &normalize(&dataset.totals.export_series(m)).unwrap(), &normalize(&dataset.gdp.series(m)).unwrap()).unwrap();
    let rho_n = fit_rho(n, &normalize(&dataset.totals.export_series(n)).unwrap(), &normalize(&dataset.gdp.series(n)).unwrap()).unwrap();
    let mut model = compose(pair_fits[na].alpha, rho_m.rho, rho_n.rho, triple.beta, 1.0, 1.0).unwrap();
    let r_km = dataset.resolve_distance(m, n).unwrap();

    let years = dataset.flows.years();
    let reference_year = years[0];
    let observed: BTreeMap<_, _> = years
        .iter()
        .map(|&y| {
            let trade = dataset.observed_trade(m, n, y).unwrap();
            let gm = dataset.totals.get(m, y).unwrap().gdp_usd.unwrap();
            let gn = dataset.totals.get(n, y).unwrap().gdp_usd.unwrap();
            (y, ObservedYear { trade_usd: trade, gdp_m: gm, gdp_n: gn })
        })
        .collect();
    let reference = observed[&reference_year];
    model.prefactor = calibrate_prefactor(
        &model,
        reference.gdp_m,
        reference.gdp_n,
        r_km,
        reference.trade_usd,
        config.omega_default,
    )
    .unwrap();
    let omegas = residual_omega(&model, &observed, r_km).unwrap();
    for (y, omega) in omegas {
        assert!(
            (omega - config.omega_default).abs() < 1e-6 * config.omega_default,
            "{y}: {omega} vs {}",
            config.omega_default
        );
    }
}

#[test]
fn report_and_plot_emission_are_deterministic() {
    let config = SynthConfig::new(4, 31337);
    let dir = tempfile::tempdir().unwrap();
    generate_synthetic(&config)
        .unwrap()
        .write_bundle(dir.path(), &config)
        .unwrap();
    let dataset = load_bundle(dir.path()).unwrap();

    let render = || {
        let mut report = FitReport::new(ReportMetadata::new(
            dataset.manifest.content_hashes.clone(),
        ));
        let mut tsvs = Vec::new();
        for (reporter, partner) in dataset.all_pairs() {
            let series = dataset.pair_observations(reporter, partner, None);
            let fit = fit_alpha((reporter, partner), &series).unwrap();
            let rows: Vec<_> = series
                .iter()
                .map(|obs| {
                    let (x, y) = log_form(obs, fit.alpha).unwrap();
                    (obs.year, x, y)
                })
                .collect();
            tsvs.push(xy_series_tsv(&rows, fit.fit.slope, fit.fit.intercept));
            report.pair_fits.push(fit);
        }
        (report.to_json().unwrap(), tsvs)
    };

    let (json_a, tsvs_a) = render();
    let (json_b, tsvs_b) = render();
    assert_eq!(json_a, json_b, "report JSON must be byte-identical");
    assert_eq!(tsvs_a, tsvs_b, "plot series must be byte-identical");
    for tsv in &tsvs_a {
        check_plot_tsv(tsv).unwrap();
    }

    // batch fits equal independent single-pair fits: no cross-pair state
    let pairs = dataset.all_pairs();
    let (r0, p0) = pairs[2];
    let solo = fit_alpha((r0, p0), &dataset.pair_observations(r0, p0, None)).unwrap();
    let report: serde_json::Value = serde_json::from_str(&json_a).unwrap();
    let batch_alpha = report["pair_fits"][2]["alpha"].as_f64().unwrap();
    assert_eq!(batch_alpha.to_bits(), solo.alpha.to_bits());
}
