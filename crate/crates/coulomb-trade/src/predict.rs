//! Composition of fitted parameters into the predictive trade equation, and
//! residual dielectric extraction over observed panels.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::trade_data::{UnorderedPair, Year};

/// The composed predictive model
/// `Trade = (K / omega) * G_m^a_m * G_n^a_n / R^beta`,
/// where `a = alpha * rho` per country and `K = 2 k' k''`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComposedModel {
    /// Combined GDP exponent for country m (`alpha * rho_m`).
    pub alpha_rho_m: f64,
    /// Combined GDP exponent for country n (`alpha * rho_n`).
    pub alpha_rho_n: f64,
    pub beta: f64,
    /// `K = 2 k' k''`.
    pub prefactor: f64,
    /// Known per-pair dielectric constants, for prediction without an
    /// explicit omega argument.
    pub omega_table: BTreeMap<UnorderedPair, f64>,
}

fn check(v: f64, what: &'static str, positive: bool) -> Result<f64> {
    if !v.is_finite() || (positive && v <= 0.0) {
        return Err(Error::Domain {
            what,
            requirement: if positive { "finite and > 0" } else { "finite" },
            value: v,
        });
    }
    Ok(v)
}

/// Combine the fitted exponents and proportionality constants into the
/// predictive model.
pub fn compose(
    alpha: f64,
    rho_m: f64,
    rho_n: f64,
    beta: f64,
    k_prime: f64,
    k_double_prime: f64,
) -> Result<ComposedModel> {
    check(alpha, "alpha", true)?;
    check(rho_m, "rho_m", false)?;
    check(rho_n, "rho_n", false)?;
    check(beta, "beta", false)?;
    check(k_prime, "k_prime", true)?;
    check(k_double_prime, "k_double_prime", true)?;
    Ok(ComposedModel {
        alpha_rho_m: alpha * rho_m,
        alpha_rho_n: alpha * rho_n,
        beta,
        prefactor: 2.0 * k_prime * k_double_prime,
        omega_table: BTreeMap::new(),
    })
}

fn ln_prediction(model: &ComposedModel, gdp_m: f64, gdp_n: f64, r_km: f64) -> f64 {
    model.prefactor.ln() + model.alpha_rho_m * gdp_m.ln() + model.alpha_rho_n * gdp_n.ln()
        - model.beta * r_km.ln()
}

/// Predicted trade volume for the given GDPs, distance, and dielectric
/// constant. Powers are evaluated in log space.
pub fn predict_trade(
    model: &ComposedModel,
    gdp_m: f64,
    gdp_n: f64,
    r_km: f64,
    omega: f64,
) -> Result<f64> {
    check(gdp_m, "gdp_m", true)?;
    check(gdp_n, "gdp_n", true)?;
    check(r_km, "r_km", true)?;
    check(omega, "omega", true)?;
    let value = (ln_prediction(model, gdp_m, gdp_n, r_km) - omega.ln()).exp();
    if !value.is_finite() {
        return Err(Error::NonFinite { what: "predicted trade" });
    }
    Ok(value)
}

/// One year of observed inputs for residual-dielectric extraction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ObservedYear {
    pub trade_usd: f64,
    pub gdp_m: f64,
    pub gdp_n: f64,
}

/// Residual dielectric constants over an observed panel:
/// `omega(t) = K * G_m^a_m * G_n^a_n / (R^beta * Trade_obs(t))`.
///
/// Zero observed trade (embargo) maps to the `+inf` sentinel.
pub fn residual_omega(
    model: &ComposedModel,
    observed: &BTreeMap<Year, ObservedYear>,
    r_km: f64,
) -> Result<BTreeMap<Year, f64>> {
    check(r_km, "r_km", true)?;
    let mut out = BTreeMap::new();
    for (year, obs) in observed {
        check(obs.gdp_m, "gdp_m", true)?;
        check(obs.gdp_n, "gdp_n", true)?;
        if !obs.trade_usd.is_finite() || obs.trade_usd < 0.0 {
            return Err(Error::Domain {
                what: "observed trade",
                requirement: "finite and >= 0",
                value: obs.trade_usd,
            });
        }
        let omega = if obs.trade_usd == 0.0 {
            f64::INFINITY
        } else {
            let v = (ln_prediction(model, obs.gdp_m, obs.gdp_n, r_km) - obs.trade_usd.ln()).exp();
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    what: "residual dielectric",
                });
            }
            v
        };
        out.insert(*year, omega);
    }
    Ok(out)
}

/// Recompute the prefactor `K` from one reference observation with a known
/// dielectric constant.
///
/// The `k'`/`k''` constants come from fits on max-normalized series, so the
/// composed `2 k' k''` is only valid up to normalization constants; when
/// predicting from raw USD GDPs, calibrate `K` against one observed year
/// instead.
pub fn calibrate_prefactor(
    model: &ComposedModel,
    gdp_m: f64,
    gdp_n: f64,
    r_km: f64,
    observed_trade: f64,
    reference_omega: f64,
) -> Result<f64> {
    check(gdp_m, "gdp_m", true)?;
    check(gdp_n, "gdp_n", true)?;
    check(r_km, "r_km", true)?;
    check(observed_trade, "observed trade", true)?;
    check(reference_omega, "omega", true)?;
    let ln_k = reference_omega.ln() + observed_trade.ln() + model.beta * r_km.ln()
        - model.alpha_rho_m * gdp_m.ln()
        - model.alpha_rho_n * gdp_n.ln();
    let k = ln_k.exp();
    if !k.is_finite() || k <= 0.0 {
        return Err(Error::NonFinite { what: "calibrated prefactor" });
    }
    Ok(k)
}
