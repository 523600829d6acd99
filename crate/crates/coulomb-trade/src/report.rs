//! Fit-report assembly and plot-series emission.
//!
//! Reports serialize to JSON with a schema-version field; numbers are written
//! in shortest round-trip form, so re-parsing reproduces the exact f64 bits.
//! Plot series are tab-separated with a header row, one numeric record per
//! line.

use std::collections::BTreeMap;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::estimation::{AlphaDistribution, CdfPoint, LinearityFit, PairFit, PowerLawFit, TripleFit};
use crate::trade_data::{CountryId, Year};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// A dielectric value that may be the embargo sentinel. Serializes as a JSON
/// number when finite and as the string `"inf"` otherwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OmegaValue(pub f64);

impl Serialize for OmegaValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            serializer.serialize_f64(self.0)
        } else {
            serializer.serialize_str("inf")
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportMetadata {
    pub schema_version: u32,
    pub tool_version: String,
    /// SHA-256 content hashes of the dataset files the report was built from.
    pub dataset_hashes: BTreeMap<String, String>,
    /// Standing assumptions baked into the estimators.
    pub assumptions: Vec<String>,
    /// Non-fatal issues encountered while assembling the report.
    pub warnings: Vec<String>,
}

impl ReportMetadata {
    pub fn new(dataset_hashes: BTreeMap<String, String>) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            dataset_hashes,
            assumptions: standard_assumptions(),
            warnings: Vec::new(),
        }
    }
}

/// The assumption notes attached to every report.
pub fn standard_assumptions() -> Vec<String> {
    vec![
        "per-pair dielectric constants are treated as constant over the fitted years".to_string(),
        "beta estimation assumes the two pairs share the same dielectric constant".to_string(),
        "beta is the positive distance-decay exponent: the ratio intercept is divided by \
         ln(R_den/R_num), so the pair with the larger distance belongs in the numerator \
         when the intercept is negative"
            .to_string(),
        "the distribution's mu is the arithmetic mean and sigma the population (divisor N) \
         standard deviation of the per-pair alphas; concentration is reported, not judged"
            .to_string(),
        "zero or missing flow years are excluded from fits, never imputed".to_string(),
    ]
}

/// One failed unit of a batch run, kept alongside the successes.
#[derive(Clone, Debug, Serialize)]
pub struct BatchError {
    pub subject: String,
    pub error: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AlphaDistributionReport {
    pub mu: f64,
    pub sigma: f64,
    pub n_samples: usize,
    pub cdf: Vec<CdfPoint>,
}

/// Composed predictive-model summary included in full reports.
#[derive(Clone, Debug, Serialize)]
pub struct ComposedSummary {
    pub alpha: f64,
    pub beta: f64,
    pub beta_mode: String,
    pub rho_by_country: BTreeMap<CountryId, f64>,
    pub rho_aggregate: f64,
    pub rho_aggregation: String,
    pub k_prime_aggregate: f64,
    pub k_double_prime_aggregate: f64,
    pub prefactor: f64,
    pub combined_exponent: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PredictionRow {
    pub year: Year,
    pub predicted_usd: Option<f64>,
    pub observed_usd: Option<f64>,
    pub residual_omega: Option<OmegaValue>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PredictionReport {
    pub pair: (CountryId, CountryId),
    pub distance_km: f64,
    pub rows: Vec<PredictionRow>,
}

/// Aggregated output of a batch run.
#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub metadata: ReportMetadata,
    pub pair_fits: Vec<PairFit>,
    pub pair_errors: Vec<BatchError>,
    pub triple_fits: Vec<TripleFit>,
    pub distribution: Option<AlphaDistributionReport>,
    pub power_law_fits: Vec<PowerLawFit>,
    pub linearity_fits: Vec<LinearityFit>,
    pub fit_errors: Vec<BatchError>,
    pub composed: Option<ComposedSummary>,
    pub predictions: Vec<PredictionReport>,
}

impl FitReport {
    pub fn new(metadata: ReportMetadata) -> Self {
        Self {
            metadata,
            pair_fits: Vec::new(),
            pair_errors: Vec::new(),
            triple_fits: Vec::new(),
            distribution: None,
            power_law_fits: Vec::new(),
            linearity_fits: Vec::new(),
            fit_errors: Vec::new(),
            composed: None,
            predictions: Vec::new(),
        }
    }

    pub fn distribution_report(dist: &AlphaDistribution, cdf: Vec<CdfPoint>) -> AlphaDistributionReport {
        AlphaDistributionReport {
            mu: dist.mu,
            sigma: dist.sigma,
            n_samples: dist.samples.len(),
            cdf,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// The per-year regression series behind one fitted line: the plotted points
/// plus the fitted value at each x.
pub fn xy_series_tsv(rows: &[(Year, f64, f64)], slope: f64, intercept: f64) -> String {
    let mut out = String::from("year\tx\ty\tfitted_y\n");
    for &(year, x, y) in rows {
        let fitted = intercept + slope * x;
        out.push_str(&format!("{year}\t{x}\t{y}\t{fitted}\n"));
    }
    out
}

/// The cumulative-distribution series: per sorted alpha, the empirical CDF,
/// the model CDF, and their difference.
pub fn cdf_series_tsv(points: &[CdfPoint]) -> String {
    let mut out = String::from("alpha\tempirical_cdf\tmodel_cdf\tdifference\n");
    for p in points {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            p.alpha, p.empirical_cdf, p.model_cdf, p.difference
        ));
    }
    out
}

/// Validate an emitted plot series: a header row, a constant column count,
/// and numeric cells throughout.
pub fn check_plot_tsv(content: &str) -> Result<()> {
    let mut lines = content.lines();
    let Some(header) = lines.next() else {
        return Err(Error::Bundle {
            reason: "plot series is empty".to_string(),
        });
    };
    let n_cols = header.split('\t').count();
    if n_cols < 2 {
        return Err(Error::Bundle {
            reason: format!("plot series needs at least 2 columns, got {n_cols}"),
        });
    }
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != n_cols {
            return Err(Error::Bundle {
                reason: format!(
                    "plot series row {} has {} columns, header has {n_cols}",
                    i + 2,
                    cells.len()
                ),
            });
        }
        for cell in cells {
            if cell.parse::<f64>().is_err() {
                return Err(Error::Bundle {
                    reason: format!("plot series row {} has non-numeric cell {cell:?}", i + 2),
                });
            }
        }
    }
    Ok(())
}
