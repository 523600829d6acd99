//! Readers and writers for the four canonical CSV schemas.
//!
//! All files are UTF-8, comma-separated, decimal-point numbers without
//! thousands separators, one record per line, with a fixed header.

use std::fmt::Write as _;
use std::path::Path;

use super::{CapitalTable, CountryId, DistanceTable, FlowPanel, FlowValue, GdpTable, Year};
use crate::error::{Error, Result};

pub const FLOW_HEADER: &str = "year,reporter,partner,export_usd,import_usd";
pub const GDP_HEADER: &str = "year,country,gdp_usd";
pub const DISTANCE_HEADER: &str = "country_a,country_b,km";
pub const CAPITALS_HEADER: &str = "country,lat,lon";

struct CsvReader<'a> {
    path: &'a Path,
    lines: std::str::Lines<'a>,
    line_no: usize,
}

impl<'a> CsvReader<'a> {
    fn open(path: &'a Path, content: &'a str, expected_header: &str) -> Result<Self> {
        let mut lines = content.lines();
        let header = lines.next().unwrap_or("");
        if header.trim_end_matches('\r') != expected_header {
            return Err(Error::Csv {
                path: path.to_path_buf(),
                line: 1,
                reason: format!("expected header {expected_header:?}, got {header:?}"),
            });
        }
        Ok(Self {
            path,
            lines,
            line_no: 1,
        })
    }

    /// Next non-empty data row, split into exactly `n` fields.
    fn next_row(&mut self, n: usize) -> Result<Option<(usize, Vec<&'a str>)>> {
        loop {
            let Some(line) = self.lines.next() else {
                return Ok(None);
            };
            self.line_no += 1;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != n {
                return Err(Error::Csv {
                    path: self.path.to_path_buf(),
                    line: self.line_no,
                    reason: format!("expected {n} columns, got {}", fields.len()),
                });
            }
            return Ok(Some((self.line_no, fields)));
        }
    }

    fn err(&self, line: usize, reason: String) -> Error {
        Error::Csv {
            path: self.path.to_path_buf(),
            line,
            reason,
        }
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_f64(reader: &CsvReader<'_>, line: usize, field: &str, what: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| reader.err(line, format!("unparsable {what}: {field:?}")))
}

fn parse_country(reader: &CsvReader<'_>, line: usize, field: &str) -> Result<CountryId> {
    CountryId::new(field).map_err(|_| {
        reader.err(
            line,
            format!("invalid country code {field:?}: expected 3 uppercase ASCII letters"),
        )
    })
}

fn parse_year(reader: &CsvReader<'_>, line: usize, field: &str) -> Result<Year> {
    let value: i64 = field
        .parse()
        .map_err(|_| reader.err(line, format!("unparsable year: {field:?}")))?;
    Year::new(value).map_err(|_| reader.err(line, format!("year {value} outside 1900..=2100")))
}

/// Load a flow-CSV (`year,reporter,partner,export_usd,import_usd`).
pub fn load_flows(path: &Path) -> Result<FlowPanel> {
    let content = read_to_string(path)?;
    let mut reader = CsvReader::open(path, &content, FLOW_HEADER)?;
    let mut panel = FlowPanel::new();
    while let Some((line, fields)) = reader.next_row(5)? {
        let year = parse_year(&reader, line, fields[0])?;
        let reporter = parse_country(&reader, line, fields[1])?;
        let partner = parse_country(&reader, line, fields[2])?;
        if reporter == partner {
            return Err(Error::SelfFlow {
                path: path.to_path_buf(),
                line,
            });
        }
        let export_usd = parse_f64(&reader, line, fields[3], "export_usd")?;
        let import_usd = parse_f64(&reader, line, fields[4], "import_usd")?;
        for (v, what) in [(export_usd, "export_usd"), (import_usd, "import_usd")] {
            if !v.is_finite() || v < 0.0 {
                return Err(reader.err(line, format!("{what} must be finite and >= 0, got {v}")));
            }
        }
        if panel.get(reporter, partner, year).is_some() {
            return Err(Error::DuplicateKey {
                path: path.to_path_buf(),
                line,
                reporter,
                partner,
                year,
            });
        }
        panel
            .insert(reporter, partner, year, FlowValue { export_usd, import_usd })
            .map_err(|e| reader.err(line, e.to_string()))?;
    }
    Ok(panel)
}

/// Load a gdp-CSV (`year,country,gdp_usd`).
pub fn load_gdp(path: &Path) -> Result<GdpTable> {
    let content = read_to_string(path)?;
    let mut reader = CsvReader::open(path, &content, GDP_HEADER)?;
    let mut table = GdpTable::new();
    while let Some((line, fields)) = reader.next_row(3)? {
        let year = parse_year(&reader, line, fields[0])?;
        let country = parse_country(&reader, line, fields[1])?;
        let gdp = parse_f64(&reader, line, fields[2], "gdp_usd")?;
        table
            .insert(country, year, gdp)
            .map_err(|e| reader.err(line, e.to_string()))?;
    }
    Ok(table)
}

/// Load a distance-CSV (`country_a,country_b,km`). Pairs are unordered;
/// duplicate rows are allowed only when the distances agree.
pub fn load_distances(path: &Path) -> Result<DistanceTable> {
    let content = read_to_string(path)?;
    let mut reader = CsvReader::open(path, &content, DISTANCE_HEADER)?;
    let mut table = DistanceTable::new();
    while let Some((line, fields)) = reader.next_row(3)? {
        let a = parse_country(&reader, line, fields[0])?;
        let b = parse_country(&reader, line, fields[1])?;
        let km = parse_f64(&reader, line, fields[2], "km")?;
        table
            .insert(a, b, km)
            .map_err(|e| reader.err(line, e.to_string()))?;
    }
    Ok(table)
}

/// Load a capitals-CSV (`country,lat,lon`).
pub fn load_capitals(path: &Path) -> Result<CapitalTable> {
    let content = read_to_string(path)?;
    let mut reader = CsvReader::open(path, &content, CAPITALS_HEADER)?;
    let mut table = CapitalTable::new();
    while let Some((line, fields)) = reader.next_row(3)? {
        let country = parse_country(&reader, line, fields[0])?;
        let lat = parse_f64(&reader, line, fields[1], "lat")?;
        let lon = parse_f64(&reader, line, fields[2], "lon")?;
        table
            .insert(country, lat, lon)
            .map_err(|e| reader.err(line, e.to_string()))?;
    }
    Ok(table)
}

// Writers emit records in key order with round-trip-exact float formatting,
// so identical panels always serialize to identical bytes.

pub fn write_flows(panel: &FlowPanel) -> String {
    let mut out = String::from(FLOW_HEADER);
    out.push('\n');
    for (&(reporter, partner, year), v) in panel.iter() {
        writeln!(
            out,
            "{year},{reporter},{partner},{},{}",
            v.export_usd, v.import_usd
        )
        .unwrap();
    }
    out
}

pub fn write_gdp(table: &GdpTable) -> String {
    let mut out = String::from(GDP_HEADER);
    out.push('\n');
    for (&(country, year), gdp) in table.iter() {
        writeln!(out, "{year},{country},{gdp}").unwrap();
    }
    out
}

pub fn write_distances(table: &DistanceTable) -> String {
    let mut out = String::from(DISTANCE_HEADER);
    out.push('\n');
    for (pair, km) in table.iter() {
        writeln!(out, "{},{},{km}", pair.first(), pair.second()).unwrap();
    }
    out
}

pub fn write_capitals(table: &CapitalTable) -> String {
    let mut out = String::from(CAPITALS_HEADER);
    out.push('\n');
    for (country, (lat, lon)) in table.iter() {
        writeln!(out, "{country},{lat},{lon}").unwrap();
    }
    out
}
