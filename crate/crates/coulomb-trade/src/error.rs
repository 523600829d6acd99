use std::path::PathBuf;

use crate::trade_data::{CountryId, Year};

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by ingestion, fitting, and synthesis.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {reason}")]
    Csv {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("self-flow at line {line} in {path}")]
    SelfFlow { path: PathBuf, line: usize },

    #[error("duplicate record for ({reporter}, {partner}, {year}) at line {line} in {path}")]
    DuplicateKey {
        path: PathBuf,
        line: usize,
        reporter: CountryId,
        partner: CountryId,
        year: Year,
    },

    #[error("conflicting distances for pair ({a}, {b})")]
    ConflictingDistance { a: CountryId, b: CountryId },

    #[error("no distance for pair ({a}, {b})")]
    MissingDistance { a: CountryId, b: CountryId },

    #[error("no capital coordinates for {country}")]
    MissingCapital { country: CountryId },

    #[error("invalid country code {code:?}: expected exactly 3 uppercase ASCII letters")]
    InvalidCountryCode { code: String },

    #[error("year {value} outside supported range 1900..=2100")]
    InvalidYear { value: i64 },

    #[error("{what} must be {requirement}, got {value}")]
    Domain {
        what: &'static str,
        requirement: &'static str,
        value: f64,
    },

    #[error("cannot normalize {what}: series is empty or has no positive value")]
    EmptySeries { what: &'static str },

    #[error("need at least {needed} usable years, got {got}")]
    InsufficientYears { needed: usize, got: usize },

    #[error("regression is degenerate: x values have zero variance")]
    DegenerateX,

    #[error("regression is degenerate: constant y with nonzero residuals")]
    ConstantYResiduals,

    #[error(
        "slope-one unattainable: slope(alpha)-1 has the same sign at both bracket ends \
         (g({lo_alpha}) = {g_lo}, g({hi_alpha}) = {g_hi})"
    )]
    SlopeOneUnattainable {
        lo_alpha: f64,
        hi_alpha: f64,
        g_lo: f64,
        g_hi: f64,
    },

    #[error("beta unidentifiable: the two pair distances are equal")]
    BetaUnidentifiable,

    #[error("non-finite value while computing {what}")]
    NonFinite { what: &'static str },

    #[error("infeasible synthetic configuration: {reason}")]
    InfeasibleSynthesis { reason: String },

    #[error("invalid dataset bundle: {reason}")]
    Bundle { reason: String },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
