//! Pure evaluation of the Coulomb trade model: the export-import interaction
//! term, the full trade equation, its log form, and dielectric inversion.
//!
//! Power computation happens in log space throughout: the products of
//! USD-scale totals reach ~1e24 and alpha powers of those must neither
//! overflow nor lose monotonicity.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::trade_data::Year;

/// One year of paired observations for two countries: each side's totals and
/// the observed bilateral trade between them.
///
/// Totals must be strictly positive (zero flows are excluded upstream before
/// fitting). `trade_mn` may be 0 to represent an embargo year; such
/// observations are only meaningful for dielectric inversion, never fitting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairObservation {
    pub year: Year,
    pub exports_m: f64,
    pub imports_m: f64,
    pub exports_n: f64,
    pub imports_n: f64,
    pub trade_mn: f64,
}

impl PairObservation {
    pub fn new(
        year: Year,
        exports_m: f64,
        imports_m: f64,
        exports_n: f64,
        imports_n: f64,
        trade_mn: f64,
    ) -> Result<Self> {
        for (v, what) in [
            (exports_m, "exports_m"),
            (imports_m, "imports_m"),
            (exports_n, "exports_n"),
            (imports_n, "imports_n"),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Domain {
                    what: match what {
                        "exports_m" => "exports_m",
                        "imports_m" => "imports_m",
                        "exports_n" => "exports_n",
                        _ => "imports_n",
                    },
                    requirement: "finite and > 0",
                    value: v,
                });
            }
        }
        if !trade_mn.is_finite() || trade_mn < 0.0 {
            return Err(Error::Domain {
                what: "trade_mn",
                requirement: "finite and >= 0",
                value: trade_mn,
            });
        }
        Ok(Self {
            year,
            exports_m,
            imports_m,
            exports_n,
            imports_n,
            trade_mn,
        })
    }

    /// The same observation with the two country roles exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            year: self.year,
            exports_m: self.exports_n,
            imports_m: self.imports_n,
            exports_n: self.exports_m,
            imports_n: self.imports_m,
            trade_mn: self.trade_mn,
        }
    }
}

/// Parameter bundle sufficient to evaluate the trade equation for one pair.
///
/// `omega` is the pair's dielectric constant; it absorbs the interaction
/// term's proportionality constant, so the equation needs no separate
/// prefactor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    pub omega: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, beta: f64, omega: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::Domain {
                what: "alpha",
                requirement: "finite and > 0",
                value: alpha,
            });
        }
        if !beta.is_finite() {
            return Err(Error::Domain {
                what: "beta",
                requirement: "finite",
                value: beta,
            });
        }
        if !omega.is_finite() || omega <= 0.0 {
            return Err(Error::Domain {
                what: "omega",
                requirement: "finite and > 0",
                value: omega,
            });
        }
        Ok(Self { alpha, beta, omega })
    }
}

fn check_positive(v: f64, what: &'static str) -> Result<f64> {
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::Domain {
            what,
            requirement: "finite and > 0",
            value: v,
        });
    }
    Ok(v)
}

/// Natural log of the interaction term
/// `(E_m * I_n)^alpha + (I_m * E_n)^alpha`, evaluated without forming the
/// USD^2-scale products.
pub(crate) fn ln_interaction_raw(
    exports_m: f64,
    imports_m: f64,
    exports_n: f64,
    imports_n: f64,
    alpha: f64,
) -> Result<f64> {
    check_positive(alpha, "alpha")?;
    check_positive(exports_m, "exports_m")?;
    check_positive(imports_m, "imports_m")?;
    check_positive(exports_n, "exports_n")?;
    check_positive(imports_n, "imports_n")?;
    // a = alpha * ln(E_m I_n), b = alpha * ln(I_m E_n)
    let a = alpha * (exports_m.ln() + imports_n.ln());
    let b = alpha * (imports_m.ln() + exports_n.ln());
    // ln(e^a + e^b) via the larger exponent to stay finite
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    let ln_sum = hi + (lo - hi).exp().ln_1p();
    if !ln_sum.is_finite() {
        return Err(Error::NonFinite {
            what: "interaction term",
        });
    }
    Ok(ln_sum)
}

/// Interaction term `(E_m * I_n)^alpha + (I_m * E_n)^alpha`.
pub fn interaction_term(obs: &PairObservation, alpha: f64) -> Result<f64> {
    let ln_sum = ln_interaction_raw(
        obs.exports_m,
        obs.imports_m,
        obs.exports_n,
        obs.imports_n,
        alpha,
    )?;
    let value = ln_sum.exp();
    if !value.is_finite() {
        return Err(Error::NonFinite {
            what: "interaction term",
        });
    }
    Ok(value)
}

/// Model trade value `(1/omega) * interaction / R^beta` for given totals,
/// distance, and parameters.
pub fn trade_value(
    exports_m: f64,
    imports_m: f64,
    exports_n: f64,
    imports_n: f64,
    r_km: f64,
    params: &ModelParams,
) -> Result<f64> {
    check_positive(r_km, "r_km")?;
    let ln_sum = ln_interaction_raw(exports_m, imports_m, exports_n, imports_n, params.alpha)?;
    let ln_trade = ln_sum - params.omega.ln() - params.beta * r_km.ln();
    let value = ln_trade.exp();
    if !value.is_finite() {
        return Err(Error::NonFinite { what: "trade value" });
    }
    Ok(value)
}

/// Log form of the trade equation: `y = ln(trade_mn)`,
/// `x = ln(interaction_term)`. The regression point used by the alpha fit.
pub fn log_form(obs: &PairObservation, alpha: f64) -> Result<(f64, f64)> {
    if obs.trade_mn <= 0.0 {
        return Err(Error::Domain {
            what: "trade_mn",
            requirement: "> 0 for the log form",
            value: obs.trade_mn,
        });
    }
    let x = ln_interaction_raw(
        obs.exports_m,
        obs.imports_m,
        obs.exports_n,
        obs.imports_n,
        alpha,
    )?;
    let y = obs.trade_mn.ln();
    Ok((x, y))
}

/// Relative asymmetry between the model trade evaluated as m->n and as n->m
/// with the same omega and distance. Zero up to roundoff: the interaction
/// term is symmetric under exchanging the pair roles.
pub fn symmetry_check(obs: &PairObservation, alpha: f64) -> Result<f64> {
    let params = ModelParams::new(alpha, 1.0, 1.0)?;
    let forward = trade_value(
        obs.exports_m,
        obs.imports_m,
        obs.exports_n,
        obs.imports_n,
        1.0,
        &params,
    )?;
    let swapped = obs.swapped();
    let reverse = trade_value(
        swapped.exports_m,
        swapped.imports_m,
        swapped.exports_n,
        swapped.imports_n,
        1.0,
        &params,
    )?;
    let denom = forward.max(reverse);
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((forward - reverse).abs() / denom)
}

/// Solve the trade equation for the dielectric constant:
/// `omega = interaction / (trade_mn * R^beta)`.
///
/// A zero observed trade (embargo) maps to the `+inf` sentinel.
pub fn invert_dielectric(
    obs: &PairObservation,
    r_km: f64,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    check_positive(r_km, "r_km")?;
    if !beta.is_finite() {
        return Err(Error::Domain {
            what: "beta",
            requirement: "finite",
            value: beta,
        });
    }
    if obs.trade_mn == 0.0 {
        return Ok(f64::INFINITY);
    }
    let ln_sum = ln_interaction_raw(
        obs.exports_m,
        obs.imports_m,
        obs.exports_n,
        obs.imports_n,
        alpha,
    )?;
    let ln_omega = ln_sum - obs.trade_mn.ln() - beta * r_km.ln();
    let omega = ln_omega.exp();
    if !omega.is_finite() {
        return Err(Error::NonFinite {
            what: "dielectric constant",
        });
    }
    Ok(omega)
}
