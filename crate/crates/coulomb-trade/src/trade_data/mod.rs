//! Domain types for bilateral trade panels: directed flow records, per-country
//! totals, inter-capital distances, and series normalization.

mod csv;

pub use csv::{
    load_capitals, load_distances, load_flows, load_gdp, write_capitals, write_distances,
    write_flows, write_gdp,
};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// ISO-3166 alpha-3 country code, e.g. `USA`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CountryId([u8; 3]);

impl CountryId {
    pub fn new(code: &str) -> Result<Self> {
        let bytes = code.as_bytes();
        if bytes.len() != 3 || !bytes.iter().all(|b| b.is_ascii_uppercase()) {
            return Err(Error::InvalidCountryCode {
                code: code.to_string(),
            });
        }
        Ok(Self([bytes[0], bytes[1], bytes[2]]))
    }

    pub fn as_str(&self) -> &str {
        // constructor guarantees ASCII
        std::str::from_utf8(&self.0).unwrap()
    }
}

impl fmt::Display for CountryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for CountryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CountryId({})", self.as_str())
    }
}

impl Serialize for CountryId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for CountryId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        CountryId::new(&s).map_err(serde::de::Error::custom)
    }
}

/// Calendar year, restricted to 1900..=2100.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub struct Year(i32);

impl Year {
    pub fn new(value: i64) -> Result<Self> {
        if !(1900..=2100).contains(&value) {
            return Err(Error::InvalidYear { value });
        }
        Ok(Self(value as i32))
    }

    pub fn value(&self) -> i32 {
        self.0
    }

    /// Inclusive range of years, e.g. `Year::range(2009, 2019)`.
    pub fn range(start: i64, end: i64) -> Result<Vec<Year>> {
        let (start, end) = (Year::new(start)?, Year::new(end)?);
        Ok((start.0..=end.0).map(Year).collect())
    }
}

impl TryFrom<i64> for Year {
    type Error = Error;
    fn try_from(v: i64) -> Result<Self> {
        Year::new(v)
    }
}

impl From<Year> for i64 {
    fn from(y: Year) -> i64 {
        y.0 as i64
    }
}

impl fmt::Display for Year {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Year {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Year({})", self.0)
    }
}

/// Unordered country pair; the two codes are stored in sorted order so the
/// key is symmetric by construction.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct UnorderedPair(CountryId, CountryId);

impl UnorderedPair {
    pub fn new(a: CountryId, b: CountryId) -> Self {
        if a <= b {
            Self(a, b)
        } else {
            Self(b, a)
        }
    }

    pub fn first(&self) -> CountryId {
        self.0
    }

    pub fn second(&self) -> CountryId {
        self.1
    }
}

impl fmt::Display for UnorderedPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

impl Serialize for UnorderedPair {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// One directed flow record: what `reporter` exported to and imported from
/// `partner` in a given year, in nominal USD.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowValue {
    pub export_usd: f64,
    pub import_usd: f64,
}

/// Directed bilateral flows keyed by (reporter, partner, year).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FlowPanel {
    records: BTreeMap<(CountryId, CountryId, Year), FlowValue>,
}

impl FlowPanel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert one record. Rejects self-flows, non-finite or negative values,
    /// and duplicate keys.
    pub fn insert(
        &mut self,
        reporter: CountryId,
        partner: CountryId,
        year: Year,
        value: FlowValue,
    ) -> Result<()> {
        if reporter == partner {
            // callers with file context wrap this into a line-numbered error
            return Err(Error::Domain {
                what: "flow record",
                requirement: "reporter != partner",
                value: 0.0,
            });
        }
        for (v, what) in [(value.export_usd, "export_usd"), (value.import_usd, "import_usd")] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain {
                    what: if what == "export_usd" { "export_usd" } else { "import_usd" },
                    requirement: "finite and >= 0",
                    value: v,
                });
            }
        }
        if self.records.contains_key(&(reporter, partner, year)) {
            return Err(Error::Domain {
                what: "flow record",
                requirement: "unique (reporter, partner, year)",
                value: 0.0,
            });
        }
        self.records.insert((reporter, partner, year), value);
        Ok(())
    }

    pub fn get(&self, reporter: CountryId, partner: CountryId, year: Year) -> Option<FlowValue> {
        self.records.get(&(reporter, partner, year)).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(CountryId, CountryId, Year), &FlowValue)> {
        self.records.iter()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// All countries appearing as reporter or partner, sorted.
    pub fn countries(&self) -> Vec<CountryId> {
        let mut set = std::collections::BTreeSet::new();
        for (r, p, _) in self.records.keys() {
            set.insert(*r);
            set.insert(*p);
        }
        set.into_iter().collect()
    }

    /// All years present, sorted.
    pub fn years(&self) -> Vec<Year> {
        let mut set = std::collections::BTreeSet::new();
        for (_, _, y) in self.records.keys() {
            set.insert(*y);
        }
        set.into_iter().collect()
    }

    /// Mirror-discrepancy statistics: how far reporter m's imports from n sit
    /// from reporter n's exports to m, over all double-reported pair-years.
    pub fn mirror_stats(&self) -> MirrorStats {
        let mut stats = MirrorStats::default();
        for (&(reporter, partner, year), value) in &self.records {
            if reporter >= partner {
                continue; // visit each unordered pair once
            }
            let Some(mirror) = self.get(partner, reporter, year) else {
                continue;
            };
            for (a, b) in [
                (value.import_usd, mirror.export_usd),
                (value.export_usd, mirror.import_usd),
            ] {
                let denom = a.max(b);
                if denom > 0.0 {
                    let d = (a - b).abs() / denom;
                    stats.compared += 1;
                    stats.sum_discrepancy += d;
                    stats.max_discrepancy = stats.max_discrepancy.max(d);
                    if d > 0.2 {
                        stats.over_20_percent += 1;
                    }
                }
            }
        }
        stats
    }
}

/// Summary of mirror disagreement between the two reporters of each pair.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct MirrorStats {
    pub compared: usize,
    pub max_discrepancy: f64,
    pub sum_discrepancy: f64,
    pub over_20_percent: usize,
}

impl MirrorStats {
    pub fn mean_discrepancy(&self) -> f64 {
        if self.compared == 0 {
            0.0
        } else {
            self.sum_discrepancy / self.compared as f64
        }
    }
}

/// GDP in nominal USD keyed by (country, year).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GdpTable {
    entries: BTreeMap<(CountryId, Year), f64>,
}

impl GdpTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, country: CountryId, year: Year, gdp_usd: f64) -> Result<()> {
        if !gdp_usd.is_finite() || gdp_usd < 0.0 {
            return Err(Error::Domain {
                what: "gdp_usd",
                requirement: "finite and >= 0",
                value: gdp_usd,
            });
        }
        if let Some(&existing) = self.entries.get(&(country, year)) {
            if existing != gdp_usd {
                return Err(Error::Domain {
                    what: "gdp_usd",
                    requirement: "one value per (country, year)",
                    value: gdp_usd,
                });
            }
            return Ok(());
        }
        self.entries.insert((country, year), gdp_usd);
        Ok(())
    }

    pub fn get(&self, country: CountryId, year: Year) -> Option<f64> {
        self.entries.get(&(country, year)).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(CountryId, Year), &f64)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Yearly GDP series for one country.
    pub fn series(&self, country: CountryId) -> BTreeMap<Year, f64> {
        self.entries
            .iter()
            .filter(|((c, _), _)| *c == country)
            .map(|((_, y), v)| (*y, *v))
            .collect()
    }
}

/// Per-country yearly totals: exports, imports, and optionally GDP.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Totals {
    pub exports_usd: f64,
    pub imports_usd: f64,
    pub gdp_usd: Option<f64>,
}

/// Aggregated country-level panel, derived from a [`FlowPanel`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CountryPanel {
    entries: BTreeMap<(CountryId, Year), Totals>,
}

impl CountryPanel {
    pub fn get(&self, country: CountryId, year: Year) -> Option<Totals> {
        self.entries.get(&(country, year)).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(CountryId, Year), &Totals)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Yearly export series for one country.
    pub fn export_series(&self, country: CountryId) -> BTreeMap<Year, f64> {
        self.entries
            .iter()
            .filter(|((c, _), _)| *c == country)
            .map(|((_, y), t)| (*y, t.exports_usd))
            .collect()
    }

    /// Yearly import series for one country.
    pub fn import_series(&self, country: CountryId) -> BTreeMap<Year, f64> {
        self.entries
            .iter()
            .filter(|((c, _), _)| *c == country)
            .map(|((_, y), t)| (*y, t.imports_usd))
            .collect()
    }

    /// Yearly GDP series for one country (years with GDP attached only).
    pub fn gdp_series(&self, country: CountryId) -> BTreeMap<Year, f64> {
        self.entries
            .iter()
            .filter(|((c, _), _)| *c == country)
            .filter_map(|((_, y), t)| t.gdp_usd.map(|g| (*y, g)))
            .collect()
    }
}

/// Sum every reporter's directed flows into per-(country, year) totals and
/// attach GDP where available.
pub fn aggregate_totals(flows: &FlowPanel, gdp: Option<&GdpTable>) -> Result<CountryPanel> {
    if flows.is_empty() {
        return Err(Error::EmptySeries { what: "flow panel" });
    }
    let mut entries: BTreeMap<(CountryId, Year), Totals> = BTreeMap::new();
    for (&(reporter, _, year), value) in flows.iter() {
        let t = entries.entry((reporter, year)).or_insert(Totals {
            exports_usd: 0.0,
            imports_usd: 0.0,
            gdp_usd: None,
        });
        t.exports_usd += value.export_usd;
        t.imports_usd += value.import_usd;
    }
    if let Some(gdp) = gdp {
        for ((country, year), t) in entries.iter_mut() {
            t.gdp_usd = gdp.get(*country, *year);
        }
    }
    Ok(CountryPanel { entries })
}

/// Symmetric inter-capital distances in kilometers.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DistanceTable {
    entries: BTreeMap<UnorderedPair, f64>,
}

impl DistanceTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, a: CountryId, b: CountryId, km: f64) -> Result<()> {
        if a == b {
            return Err(Error::Domain {
                what: "distance pair",
                requirement: "two distinct countries",
                value: km,
            });
        }
        if !km.is_finite() || km <= 0.0 {
            return Err(Error::Domain {
                what: "distance_km",
                requirement: "finite and > 0",
                value: km,
            });
        }
        let key = UnorderedPair::new(a, b);
        if let Some(&existing) = self.entries.get(&key) {
            if existing != km {
                return Err(Error::ConflictingDistance { a, b });
            }
            return Ok(());
        }
        self.entries.insert(key, km);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&UnorderedPair, &f64)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Stored symmetric distance between two countries.
pub fn distance(table: &DistanceTable, a: CountryId, b: CountryId) -> Result<f64> {
    table
        .entries
        .get(&UnorderedPair::new(a, b))
        .copied()
        .ok_or(Error::MissingDistance { a, b })
}

/// Capital-city coordinates in degrees.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CapitalTable {
    entries: BTreeMap<CountryId, (f64, f64)>,
}

impl CapitalTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, country: CountryId, lat: f64, lon: f64) -> Result<()> {
        if !lat.is_finite() || !(-90.0..=90.0).contains(&lat) {
            return Err(Error::Domain {
                what: "latitude",
                requirement: "within [-90, 90]",
                value: lat,
            });
        }
        if !lon.is_finite() || !(-180.0..=180.0).contains(&lon) {
            return Err(Error::Domain {
                what: "longitude",
                requirement: "within [-180, 180]",
                value: lon,
            });
        }
        if let Some(&existing) = self.entries.get(&country) {
            if existing != (lat, lon) {
                return Err(Error::Domain {
                    what: "capital coordinates",
                    requirement: "one entry per country",
                    value: lat,
                });
            }
            return Ok(());
        }
        self.entries.insert(country, (lat, lon));
        Ok(())
    }

    pub fn get(&self, country: CountryId) -> Option<(f64, f64)> {
        self.entries.get(&country).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CountryId, &(f64, f64))> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Mean Earth radius used for the great-circle fallback.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Haversine great-circle distance between two capitals, in kilometers.
///
/// Fallback for pairs missing from the distance table. Note the result can be
/// 0 for coincident coordinates; callers that need a strictly positive
/// distance must reject that case.
pub fn great_circle_km(capitals: &CapitalTable, a: CountryId, b: CountryId) -> Result<f64> {
    let (lat1, lon1) = capitals.get(a).ok_or(Error::MissingCapital { country: a })?;
    let (lat2, lon2) = capitals.get(b).ok_or(Error::MissingCapital { country: b })?;
    Ok(haversine_km(lat1, lon1, lat2, lon2))
}

pub(crate) fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let p1 = lat1.to_radians();
    let p2 = lat2.to_radians();
    let dp = (lat2 - lat1).to_radians();
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * a.sqrt().min(1.0).asin()
}

/// A yearly series rescaled by its maximum, so the largest value is exactly 1.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedSeries {
    values: BTreeMap<Year, f64>,
    max_raw: f64,
}

impl NormalizedSeries {
    /// Wrap already-dimensionless values without rescaling. Intended for
    /// series prepared elsewhere (e.g. proportional fixtures); `normalize`
    /// is the standard constructor.
    pub fn from_normalized_values(values: BTreeMap<Year, f64>) -> Result<Self> {
        for v in values.values() {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::Domain {
                    what: "normalized value",
                    requirement: "finite and >= 0",
                    value: *v,
                });
            }
        }
        if values.is_empty() {
            return Err(Error::EmptySeries { what: "series" });
        }
        Ok(Self {
            values,
            max_raw: 1.0,
        })
    }

    pub fn values(&self) -> &BTreeMap<Year, f64> {
        &self.values
    }

    /// Maximum of the raw input series (the divisor used by `normalize`).
    pub fn max_raw(&self) -> f64 {
        self.max_raw
    }
}

/// Divide a yearly series by its maximum. Errors when the series is empty or
/// has no positive value.
pub fn normalize(series: &BTreeMap<Year, f64>) -> Result<NormalizedSeries> {
    let mut max_raw = 0.0f64;
    for v in series.values() {
        if !v.is_finite() || *v < 0.0 {
            return Err(Error::Domain {
                what: "series value",
                requirement: "finite and >= 0",
                value: *v,
            });
        }
        max_raw = max_raw.max(*v);
    }
    if series.is_empty() || max_raw <= 0.0 {
        return Err(Error::EmptySeries { what: "series" });
    }
    let values = series.iter().map(|(y, v)| (*y, *v / max_raw)).collect();
    Ok(NormalizedSeries { values, max_raw })
}
