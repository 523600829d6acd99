//! End-to-end tests against the built binary: exit codes, JSON shapes,
//! plot-series schemas, and byte-level determinism.

use std::path::Path;
use std::process::{Command, Output};

use coulomb_trade::report::check_plot_tsv;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coulomb-trade"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should run")
}

fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    serde_json::from_str(&run_ok(args)).expect("stdout should be JSON")
}

fn synth_bundle(dir: &Path, seed: u64, extra: &[&str]) {
    let dir_s = dir.to_str().unwrap();
    let seed_s = seed.to_string();
    let mut args = vec!["synth", "--out", dir_s, "--seed", &seed_s];
    args.extend_from_slice(extra);
    run_ok(&args);
}

fn canonical_pairs(dir: &Path) -> Vec<(String, String)> {
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    manifest["canonical_pairs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| {
            (
                p[0].as_str().unwrap().to_string(),
                p[1].as_str().unwrap().to_string(),
            )
        })
        .collect()
}

#[test]
fn synth_then_fit_alpha_recovers_truth_for_all_pairs() {
    let dir = tempfile::tempdir().unwrap();
    synth_bundle(dir.path(), 11, &[]);
    let plots = tempfile::tempdir().unwrap();

    let report = json(&[
        "fit-alpha",
        "--dataset",
        dir.path().to_str().unwrap(),
        "--pairs",
        "all",
        "--plot-dir",
        plots.path().to_str().unwrap(),
    ]);
    let fits = report["pair_fits"].as_array().unwrap();
    assert_eq!(fits.len(), 15);
    assert_eq!(report["pair_errors"].as_array().unwrap().len(), 0);
    for fit in fits {
        let alpha = fit["alpha"].as_f64().unwrap();
        assert!((alpha - 0.5).abs() < 1e-3, "alpha = {alpha}");
        let slope = fit["fit"]["slope"].as_f64().unwrap();
        assert!((slope - 1.0).abs() < 1e-6);
    }

    // every emitted plot series passes the schema checker
    let mut checked = 0;
    for entry in std::fs::read_dir(plots.path()).unwrap() {
        let content = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        check_plot_tsv(&content).unwrap();
        checked += 1;
    }
    assert_eq!(checked, 15);
}

#[test]
fn identical_inputs_produce_byte_identical_outputs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    synth_bundle(a.path(), 77, &["--noise-sigma", "0.03"]);
    synth_bundle(b.path(), 77, &["--noise-sigma", "0.03"]);
    for name in ["flows.csv", "gdp.csv", "distances.csv", "capitals.csv", "manifest.json"] {
        assert_eq!(
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap(),
            "{name} differs"
        );
    }

    let args = [
        "fit-alpha",
        "--dataset",
        a.path().to_str().unwrap(),
        "--pairs",
        "all",
    ];
    assert_eq!(run_ok(&args), run_ok(&args), "fit report bytes differ");
}

#[test]
fn ingest_rejects_self_flow_with_line_context() {
    let src = tempfile::tempdir().unwrap();
    std::fs::write(
        src.path().join("flows.csv"),
        "year,reporter,partner,export_usd,import_usd\n2010,AAA,BBB,5,5\n2010,AAA,AAA,5,5\n",
    )
    .unwrap();
    std::fs::write(src.path().join("distances.csv"), "country_a,country_b,km\nAAA,BBB,700\n").unwrap();
    let out_dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "ingest",
        "--flows",
        src.path().join("flows.csv").to_str().unwrap(),
        "--distances",
        src.path().join("distances.csv").to_str().unwrap(),
        "--out",
        out_dir.path().join("bundle").to_str().unwrap(),
    ]);
    assert!(!out.status.success(), "self-flow must be fatal");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("self-flow at line 3"), "stderr: {stderr}");
}

#[test]
fn batch_fit_reports_per_pair_failures_without_failing() {
    // AAA:BBB has a full window; AAA:CCC only 3 years -> a warning entry
    let src = tempfile::tempdir().unwrap();
    let mut flows = String::from("year,reporter,partner,export_usd,import_usd\n");
    for year in 2009..=2019 {
        flows.push_str(&format!("{year},AAA,BBB,{},{}\n", 100.0 + year as f64, 90.0));
        flows.push_str(&format!("{year},BBB,AAA,{},{}\n", 90.0, 100.0 + year as f64));
    }
    for year in 2009..=2011 {
        flows.push_str(&format!("{year},AAA,CCC,50,40\n"));
        flows.push_str(&format!("{year},CCC,AAA,40,50\n"));
    }
    std::fs::write(src.path().join("flows.csv"), flows).unwrap();
    std::fs::write(
        src.path().join("distances.csv"),
        "country_a,country_b,km\nAAA,BBB,700\nAAA,CCC,3000\nBBB,CCC,2500\n",
    )
    .unwrap();
    let bundle = src.path().join("bundle");
    run_ok(&[
        "ingest",
        "--flows",
        src.path().join("flows.csv").to_str().unwrap(),
        "--distances",
        src.path().join("distances.csv").to_str().unwrap(),
        "--out",
        bundle.to_str().unwrap(),
    ]);

    let report = json(&[
        "fit-alpha",
        "--dataset",
        bundle.to_str().unwrap(),
        "--pairs",
        "all",
    ]);
    let errors = report["pair_errors"].as_array().unwrap();
    assert!(!errors.is_empty(), "expected warnings for the short pair");
    let texts: Vec<&str> = errors.iter().map(|e| e["error"].as_str().unwrap()).collect();
    assert!(
        texts.iter().any(|t| t.contains("at least 4")),
        "expected an insufficient-years warning, got {texts:?}"
    );
}

#[test]
fn fit_beta_recovers_the_configured_exponent() {
    let dir = tempfile::tempdir().unwrap();
    synth_bundle(dir.path(), 23, &["--beta", "2.0"]);
    let pairs = canonical_pairs(dir.path());
    let num = format!("{}:{}", pairs[0].0, pairs[0].1);
    let den = format!("{}:{}", pairs[1].0, pairs[1].1);

    let report = json(&[
        "fit-beta",
        "--dataset",
        dir.path().to_str().unwrap(),
        "--num",
        &num,
        "--den",
        &den,
        "--alpha-num",
        "0.5",
        "--alpha-den",
        "0.5",
    ]);
    let beta = report["triple_fits"][0]["beta"].as_f64().unwrap();
    assert!((beta - 2.0).abs() < 1e-3, "beta = {beta}");
    let slope = report["triple_fits"][0]["fit"]["slope"].as_f64().unwrap();
    assert!((slope - 1.0).abs() < 1e-6);
}

#[test]
fn alpha_dist_reports_fixture_statistics() {
    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/table_a1.csv");
    let plot = tempfile::NamedTempFile::new().unwrap();
    let out = json(&[
        "alpha-dist",
        "--alphas-csv",
        fixture,
        "--plot",
        plot.path().to_str().unwrap(),
    ]);
    assert_eq!(out["n_samples"].as_u64().unwrap(), 40);
    assert!((out["mu"].as_f64().unwrap() - 0.47625).abs() < 1e-9);
    assert!((out["sigma"].as_f64().unwrap() - 0.12658371735732837).abs() < 1e-9);
    check_plot_tsv(&std::fs::read_to_string(plot.path()).unwrap()).unwrap();
}

#[test]
fn alpha_dist_handles_equal_samples() {
    let csv = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(
        csv.path(),
        "region,country1,country2,alpha\nX,A,B,0.5\nX,A,C,0.5\n",
    )
    .unwrap();
    let out = json(&["alpha-dist", "--alphas-csv", csv.path().to_str().unwrap()]);
    assert_eq!(out["sigma"].as_f64().unwrap(), 0.0);
    // the model CDF degenerates to a step at the shared value
    assert_eq!(out["cdf"][0]["model_cdf"].as_f64().unwrap(), 1.0);
    assert_eq!(out["cdf"][1]["difference"].as_f64().unwrap(), 0.0);
}

#[test]
fn predict_direct_unit_inputs_returns_the_prefactor() {
    let out = json(&[
        "predict",
        "--gdp-m",
        "1",
        "--gdp-n",
        "1",
        "--distance",
        "1",
        "--omega",
        "1",
        "--beta",
        "1.7",
    ]);
    // with unit GDPs, distance, and omega the prediction is exactly K = 2k'k''
    assert_eq!(out["predicted_usd"].as_f64().unwrap(), 2.0);
}

#[test]
fn predict_on_synthetic_data_recovers_configured_omega() {
    let dir = tempfile::tempdir().unwrap();
    synth_bundle(dir.path(), 5150, &["--omega", "2.5"]);
    let pairs = canonical_pairs(dir.path());
    let pair = format!("{}:{}", pairs[0].0, pairs[0].1);

    let out = json(&[
        "predict",
        "--dataset",
        dir.path().to_str().unwrap(),
        "--pair",
        &pair,
        "--alpha",
        "0.5",
        "--rho-m",
        "1.33",
        "--rho-n",
        "1.33",
        "--beta",
        "1.7",
        "--omega",
        "2.5",
        "--calibrate-year",
        "2009",
    ]);
    let rows = out["prediction"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 11);
    for row in rows {
        let omega = row["residual_omega"].as_f64().unwrap();
        assert!((omega - 2.5).abs() < 1e-6, "omega = {omega}");
        let predicted = row["predicted_usd"].as_f64().unwrap();
        let observed = row["observed_usd"].as_f64().unwrap();
        assert!((predicted - observed).abs() < 1e-6 * observed);
    }
}

#[test]
fn embargo_years_serialize_residual_omega_as_inf() {
    let src = tempfile::tempdir().unwrap();
    let mut flows = String::from("year,reporter,partner,export_usd,import_usd\n");
    let mut gdp = String::from("year,country,gdp_usd\n");
    for year in 2009..=2014 {
        let (e, i) = if year == 2014 { (0.0, 0.0) } else { (110.0, 95.0) };
        flows.push_str(&format!("{year},AAA,BBB,{e},{i}\n"));
        flows.push_str(&format!("{year},BBB,AAA,{i},{e}\n"));
        gdp.push_str(&format!("{year},AAA,1.0e12\n{year},BBB,2.0e12\n"));
    }
    std::fs::write(src.path().join("flows.csv"), flows).unwrap();
    std::fs::write(src.path().join("gdp.csv"), gdp).unwrap();
    std::fs::write(src.path().join("distances.csv"), "country_a,country_b,km\nAAA,BBB,733\n").unwrap();
    let bundle = src.path().join("bundle");
    run_ok(&[
        "ingest",
        "--flows",
        src.path().join("flows.csv").to_str().unwrap(),
        "--gdp",
        src.path().join("gdp.csv").to_str().unwrap(),
        "--distances",
        src.path().join("distances.csv").to_str().unwrap(),
        "--out",
        bundle.to_str().unwrap(),
    ]);

    let stdout = run_ok(&[
        "predict",
        "--dataset",
        bundle.to_str().unwrap(),
        "--pair",
        "AAA:BBB",
        "--years",
        "2009:2014",
        "--calibrate-year",
        "2009",
    ]);
    let out: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let rows = out["prediction"]["rows"].as_array().unwrap();
    let embargo = rows.iter().find(|r| r["year"] == 2014).unwrap();
    assert_eq!(embargo["residual_omega"].as_str().unwrap(), "inf");
    // non-embargo rows stay numeric
    let normal = rows.iter().find(|r| r["year"] == 2009).unwrap();
    assert!(normal["residual_omega"].is_f64());
}

#[test]
fn report_assembles_the_full_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    synth_bundle(dir.path(), 8080, &[]);
    let pairs = canonical_pairs(dir.path());
    let num = format!("{}:{}", pairs[0].0, pairs[0].1);
    let den = format!("{}:{}", pairs[1].0, pairs[1].1);
    let plots = tempfile::tempdir().unwrap();

    let report = json(&[
        "report",
        "--dataset",
        dir.path().to_str().unwrap(),
        "--num",
        &num,
        "--den",
        &den,
        "--plot-dir",
        plots.path().to_str().unwrap(),
    ]);
    assert_eq!(report["metadata"]["schema_version"], 1);
    assert!(!report["metadata"]["dataset_hashes"].as_object().unwrap().is_empty());
    assert_eq!(report["pair_fits"].as_array().unwrap().len(), 15);
    let mu = report["distribution"]["mu"].as_f64().unwrap();
    assert!((mu - 0.5).abs() < 1e-3, "mu = {mu}");
    let beta = report["composed"]["beta"].as_f64().unwrap();
    assert!((beta - 1.7).abs() < 1e-3, "beta = {beta}");
    let rho = report["composed"]["rho_aggregate"].as_f64().unwrap();
    assert!((rho - 1.33).abs() < 1e-6, "rho = {rho}");
    let exponent = report["composed"]["combined_exponent"].as_f64().unwrap();
    assert!((exponent - 0.5 * 1.33).abs() < 1e-3);
    assert_eq!(report["composed"]["beta_mode"], "fitted");

    // alpha plots, rho is implicit in the report; cdf plot must exist too
    assert!(plots.path().join("alpha_cdf.tsv").exists());
    for entry in std::fs::read_dir(plots.path()).unwrap() {
        let content = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        check_plot_tsv(&content).unwrap();
    }
}

#[test]
fn coulomb2_mode_forces_the_inverse_square_exponent() {
    let dir = tempfile::tempdir().unwrap();
    synth_bundle(dir.path(), 404, &[]);
    let report = json(&[
        "report",
        "--dataset",
        dir.path().to_str().unwrap(),
        "--beta-mode",
        "coulomb2",
    ]);
    assert_eq!(report["composed"]["beta"].as_f64().unwrap(), 2.0);
    assert_eq!(report["composed"]["beta_mode"], "coulomb2");
}

#[test]
fn single_pair_tsv_output_is_valid() {
    let dir = tempfile::tempdir().unwrap();
    synth_bundle(dir.path(), 909, &[]);
    let pairs = canonical_pairs(dir.path());
    let pair = format!("{}:{}", pairs[0].0, pairs[0].1);
    let tsv = run_ok(&[
        "fit-alpha",
        "--dataset",
        dir.path().to_str().unwrap(),
        "--pairs",
        &pair,
        "--format",
        "tsv",
    ]);
    check_plot_tsv(&tsv).unwrap();
    assert_eq!(tsv.lines().count(), 12); // header + 11 years
}
