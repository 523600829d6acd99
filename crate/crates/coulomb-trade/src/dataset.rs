//! On-disk dataset bundles: a directory holding the four canonical CSVs plus
//! a JSON manifest with schema version, row counts, and content hashes.
//!
//! The manifest also records the canonical reporter orientation for every
//! pair. Mirror discrepancies in real data are resolved by always reading the
//! canonical reporter's rows; fits requested as "all pairs" follow the
//! manifest's orientations.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model_core::PairObservation;
use crate::trade_data::{
    self, aggregate_totals, CapitalTable, CountryPanel, CountryId, DistanceTable, FlowPanel,
    GdpTable, MirrorStats, Year,
};

pub const BUNDLE_SCHEMA_VERSION: u32 = 1;

pub const FLOWS_FILE: &str = "flows.csv";
pub const GDP_FILE: &str = "gdp.csv";
pub const DISTANCES_FILE: &str = "distances.csv";
pub const CAPITALS_FILE: &str = "capitals.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Bundle manifest: self-describing metadata for one dataset directory.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool_version: String,
    /// Data-row counts per file (header excluded).
    pub row_counts: BTreeMap<String, usize>,
    /// Lowercase-hex SHA-256 of each file's bytes.
    pub content_hashes: BTreeMap<String, String>,
    /// Canonical (reporter, partner) orientation per pair.
    pub canonical_pairs: Vec<(CountryId, CountryId)>,
    /// Free-form provenance and assumption notes.
    pub notes: Vec<String>,
}

/// A loaded dataset: flows, derived totals, GDP, and distance information.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub flows: FlowPanel,
    pub totals: CountryPanel,
    pub gdp: GdpTable,
    pub distances: DistanceTable,
    pub capitals: Option<CapitalTable>,
    pub manifest: Manifest,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|source| Error::Io { path, source })
}

fn count_rows(content: &str) -> usize {
    content.lines().skip(1).filter(|l| !l.trim().is_empty()).count()
}

/// Write a dataset bundle to `dir` (created if missing). Returns the
/// manifest that was written.
pub fn write_bundle(
    dir: &Path,
    flows: &FlowPanel,
    gdp: &GdpTable,
    distances: &DistanceTable,
    capitals: Option<&CapitalTable>,
    canonical_pairs: Vec<(CountryId, CountryId)>,
    notes: Vec<String>,
) -> Result<Manifest> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;

    let mut row_counts = BTreeMap::new();
    let mut content_hashes = BTreeMap::new();
    let mut emit = |name: &str, content: String| -> Result<()> {
        row_counts.insert(name.to_string(), count_rows(&content));
        content_hashes.insert(name.to_string(), sha256_hex(content.as_bytes()));
        write_file(dir, name, &content)
    };

    emit(FLOWS_FILE, trade_data::write_flows(flows))?;
    emit(GDP_FILE, trade_data::write_gdp(gdp))?;
    emit(DISTANCES_FILE, trade_data::write_distances(distances))?;
    if let Some(capitals) = capitals {
        emit(CAPITALS_FILE, trade_data::write_capitals(capitals))?;
    }

    let manifest = Manifest {
        schema_version: BUNDLE_SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        row_counts,
        content_hashes,
        canonical_pairs,
        notes,
    };
    let json = serde_json::to_string_pretty(&manifest)?;
    write_file(dir, MANIFEST_FILE, &(json + "\n"))?;
    Ok(manifest)
}

fn read_file(dir: &Path, name: &str) -> Result<String> {
    let path = dir.join(name);
    std::fs::read_to_string(&path).map_err(|source| Error::Io { path, source })
}

/// Load and verify a dataset bundle: manifest schema, content hashes, row
/// counts, then the CSVs themselves. Totals are derived on load.
pub fn load_bundle(dir: &Path) -> Result<Dataset> {
    let manifest: Manifest = serde_json::from_str(&read_file(dir, MANIFEST_FILE)?)?;
    if manifest.schema_version != BUNDLE_SCHEMA_VERSION {
        return Err(Error::Bundle {
            reason: format!(
                "unsupported schema_version {} (expected {BUNDLE_SCHEMA_VERSION})",
                manifest.schema_version
            ),
        });
    }
    for (name, expected_hash) in &manifest.content_hashes {
        let content = read_file(dir, name)?;
        let actual = sha256_hex(content.as_bytes());
        if &actual != expected_hash {
            return Err(Error::Bundle {
                reason: format!("content hash mismatch for {name}"),
            });
        }
        let rows = count_rows(&content);
        if manifest.row_counts.get(name) != Some(&rows) {
            return Err(Error::Bundle {
                reason: format!("row count mismatch for {name}"),
            });
        }
    }

    let flows = trade_data::load_flows(&dir.join(FLOWS_FILE))?;
    let gdp = trade_data::load_gdp(&dir.join(GDP_FILE))?;
    let distances = trade_data::load_distances(&dir.join(DISTANCES_FILE))?;
    let capitals = if dir.join(CAPITALS_FILE).exists() {
        Some(trade_data::load_capitals(&dir.join(CAPITALS_FILE))?)
    } else {
        None
    };
    let totals = aggregate_totals(&flows, Some(&gdp))?;
    Ok(Dataset {
        flows,
        totals,
        gdp,
        distances,
        capitals,
        manifest,
    })
}

/// Ingestion summary printed after validating user-supplied files.
#[derive(Clone, Debug, Serialize)]
pub struct ValidationSummary {
    pub countries: usize,
    pub years: Vec<i64>,
    pub flow_records: usize,
    pub mirror: MirrorStats,
    pub mirror_mean_discrepancy: f64,
}

/// Validate user CSVs and assemble them into a canonical bundle at `out_dir`.
///
/// In strict mode, any pair-year whose mirrored values disagree by more than
/// 20% is an error.
pub fn ingest(
    flows_path: &Path,
    gdp_path: Option<&Path>,
    distances_path: &Path,
    capitals_path: Option<&Path>,
    out_dir: &Path,
    strict: bool,
) -> Result<(Manifest, ValidationSummary)> {
    let flows = trade_data::load_flows(flows_path)?;
    if flows.is_empty() {
        return Err(Error::EmptySeries { what: "flow panel" });
    }
    let gdp = match gdp_path {
        Some(p) => trade_data::load_gdp(p)?,
        None => GdpTable::new(),
    };
    let distances = trade_data::load_distances(distances_path)?;
    let capitals = match capitals_path {
        Some(p) => Some(trade_data::load_capitals(p)?),
        None => None,
    };

    let mirror = flows.mirror_stats();
    if strict && mirror.max_discrepancy > 0.2 {
        return Err(Error::Bundle {
            reason: format!(
                "strict mode: {} mirrored pair-years disagree by more than 20% (max {:.1}%)",
                mirror.over_20_percent,
                mirror.max_discrepancy * 100.0
            ),
        });
    }

    let canonical_pairs = lexicographic_pairs(&flows);
    let summary = ValidationSummary {
        countries: flows.countries().len(),
        years: flows.years().iter().map(|y| i64::from(*y)).collect(),
        flow_records: flows.len(),
        mirror,
        mirror_mean_discrepancy: mirror.mean_discrepancy(),
    };
    let notes = vec![
        "canonical reporter per pair: lexicographically smaller country code".to_string(),
        "mirror discrepancies resolved by reading the canonical reporter's rows".to_string(),
    ];
    let manifest = write_bundle(
        out_dir,
        &flows,
        &gdp,
        &distances,
        capitals.as_ref(),
        canonical_pairs,
        notes,
    )?;
    Ok((manifest, summary))
}

/// All unordered pairs present in the panel, oriented with the smaller code
/// as reporter.
pub fn lexicographic_pairs(flows: &FlowPanel) -> Vec<(CountryId, CountryId)> {
    let mut pairs = std::collections::BTreeSet::new();
    for (&(reporter, partner, _), _) in flows.iter() {
        let (a, b) = if reporter <= partner {
            (reporter, partner)
        } else {
            (partner, reporter)
        };
        pairs.insert((a, b));
    }
    pairs.into_iter().collect()
}

impl Dataset {
    /// Pairs to fit when the caller asks for "all": the bundle's canonical
    /// orientations when present, else the lexicographic enumeration.
    pub fn all_pairs(&self) -> Vec<(CountryId, CountryId)> {
        if self.manifest.canonical_pairs.is_empty() {
            lexicographic_pairs(&self.flows)
        } else {
            self.manifest.canonical_pairs.clone()
        }
    }

    /// Observed bilateral trade of the (reporter, partner) pair in one year:
    /// the reporter's exports to plus imports from the partner.
    pub fn observed_trade(&self, reporter: CountryId, partner: CountryId, year: Year) -> Option<f64> {
        self.flows
            .get(reporter, partner, year)
            .map(|v| v.export_usd + v.import_usd)
    }

    /// Fitting series for one pair: years where both countries' totals are
    /// strictly positive and the observed trade is strictly positive. Years
    /// with zero or missing components are skipped, never imputed.
    pub fn pair_observations(
        &self,
        reporter: CountryId,
        partner: CountryId,
        years: Option<(Year, Year)>,
    ) -> Vec<PairObservation> {
        let mut out = Vec::new();
        for year in self.flows.years() {
            if let Some((lo, hi)) = years {
                if year < lo || year > hi {
                    continue;
                }
            }
            let Some(trade) = self.observed_trade(reporter, partner, year) else {
                continue;
            };
            let (Some(tm), Some(tn)) = (self.totals.get(reporter, year), self.totals.get(partner, year))
            else {
                continue;
            };
            if trade <= 0.0
                || tm.exports_usd <= 0.0
                || tm.imports_usd <= 0.0
                || tn.exports_usd <= 0.0
                || tn.imports_usd <= 0.0
            {
                continue;
            }
            if let Ok(obs) = PairObservation::new(
                year,
                tm.exports_usd,
                tm.imports_usd,
                tn.exports_usd,
                tn.imports_usd,
                trade,
            ) {
                out.push(obs);
            }
        }
        out
    }

    /// Distance for a pair: the distance table first, then the great-circle
    /// fallback from capital coordinates.
    pub fn resolve_distance(&self, a: CountryId, b: CountryId) -> Result<f64> {
        match trade_data::distance(&self.distances, a, b) {
            Ok(km) => Ok(km),
            Err(table_err) => {
                if let Some(capitals) = &self.capitals {
                    let km = trade_data::great_circle_km(capitals, a, b)?;
                    if km <= 0.0 {
                        return Err(Error::Domain {
                            what: "great-circle distance",
                            requirement: "> 0 (coincident capitals rejected)",
                            value: km,
                        });
                    }
                    Ok(km)
                } else {
                    Err(table_err)
                }
            }
        }
    }
}
