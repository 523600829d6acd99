//! Calibration and prediction engine for the Coulomb model of international
//! trade.
//!
//! The model writes bilateral trade as an interaction of the two countries'
//! trade totals divided by a distance power and a per-pair "dielectric
//! constant" that absorbs every other friction:
//!
//! ```text
//! Trade_mn(t) = [ (E_m I_n)^alpha + (I_m E_n)^alpha ] / ( omega_mn * R_mn^beta )
//! ```
//!
//! The crate ingests bilateral trade panels from CSV, calibrates the
//! exponents (alpha per pair via a slope-one log-log fit, beta from a
//! two-pair trade ratio, rho from the export-GDP power law), extracts
//! per-pair dielectric constants, and predicts trade volumes from GDP and
//! distance. A deterministic synthetic-panel generator doubles as the test
//! oracle for parameter recovery.

pub mod dataset;
pub mod error;
pub mod estimation;
pub mod model_core;
mod numeric;
pub mod predict;
pub mod report;
pub mod synth;
pub mod trade_data;

pub use error::{Error, Result};
pub use numeric::SplitMix64;

pub use dataset::{load_bundle, write_bundle, Dataset, Manifest};
pub use estimation::{
    alpha_distribution, beta_from_intercept, cdf_residuals, fit_alpha, fit_beta, fit_linearity,
    fit_rho, normal_cdf, ols, AlphaDistribution, LinearityFit, OlsFit, PairFit, PowerLawFit,
    TripleFit,
};
pub use model_core::{
    interaction_term, invert_dielectric, log_form, symmetry_check, trade_value, ModelParams,
    PairObservation,
};
pub use predict::{
    calibrate_prefactor, compose, predict_trade, residual_omega, ComposedModel, ObservedYear,
};
pub use report::FitReport;
pub use synth::{generate_synthetic, SynthConfig, SynthOutput};
pub use trade_data::{
    aggregate_totals, distance, great_circle_km, normalize, CapitalTable, CountryId, CountryPanel,
    DistanceTable, FlowPanel, FlowValue, GdpTable, NormalizedSeries, UnorderedPair, Year,
};
