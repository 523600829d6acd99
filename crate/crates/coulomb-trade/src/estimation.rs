//! Fitting procedures: OLS, the slope-one alpha calibration, the trade-ratio
//! beta estimate, the export-GDP power law, import-export linearity, and
//! alpha-distribution statistics.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model_core::{ln_interaction_raw, log_form, PairObservation};
use crate::numeric::{bisect, erf};
use crate::trade_data::{CountryId, NormalizedSeries, Year};

/// Search bracket for the alpha root-finder.
pub const ALPHA_BRACKET: (f64, f64) = (0.01, 3.0);
/// Documented bound on the alpha root-finder's absolute error.
pub const ALPHA_TOLERANCE: f64 = 1e-4;
/// A converged alpha fit has |slope - 1| within this bound.
pub const SLOPE_TOLERANCE: f64 = 1e-3;
/// Minimum usable years for any fit.
pub const MIN_YEARS: usize = 4;

/// Ordinary least-squares line fit diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

/// Least-squares slope and intercept of `y` on `x`, with `R^2`.
///
/// Errors when fewer than two points are given or the x values have zero
/// variance. A constant-y series fits exactly with `R^2 = 1`; a constant-y
/// series with nonzero residuals has no meaningful `R^2` and is an error.
pub fn ols(points: &[(f64, f64)]) -> Result<OlsFit> {
    let n = points.len();
    if n < 2 {
        return Err(Error::InsufficientYears { needed: 2, got: n });
    }
    for &(x, y) in points {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::NonFinite { what: "regression point" });
        }
    }
    let nf = n as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for &(x, y) in points {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateX);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = points
        .iter()
        .map(|&(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r_squared = if syy == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            return Err(Error::ConstantYResiduals);
        }
    } else {
        1.0 - ss_res / syy
    };
    Ok(OlsFit {
        slope,
        intercept,
        r_squared,
        n_points: n,
    })
}

/// Fitted alpha for one country pair, with the OLS diagnostics at the root.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairFit {
    pub pair: (CountryId, CountryId),
    pub alpha: f64,
    pub fit: OlsFit,
    pub years_used: Vec<Year>,
}

fn usable(series: &[PairObservation]) -> Vec<&PairObservation> {
    series.iter().filter(|o| o.trade_mn > 0.0).collect()
}

fn log_points(series: &[&PairObservation], alpha: f64) -> Result<Vec<(f64, f64)>> {
    series.iter().map(|o| log_form(o, alpha)).collect()
}

/// Calibrate alpha for one pair series so the log-log OLS slope equals one.
///
/// Root-finding is bisection on `g(alpha) = slope(alpha) - 1` over
/// [`ALPHA_BRACKET`]; only a sign change across the bracket is required. The
/// returned alpha is within [`ALPHA_TOLERANCE`] of the root (the solver
/// converges well past it).
pub fn fit_alpha(pair: (CountryId, CountryId), series: &[PairObservation]) -> Result<PairFit> {
    let obs = usable(series);
    if obs.len() < MIN_YEARS {
        return Err(Error::InsufficientYears {
            needed: MIN_YEARS,
            got: obs.len(),
        });
    }
    let slope_gap = |alpha: f64| -> Result<f64> {
        let fit = ols(&log_points(&obs, alpha)?)?;
        Ok(fit.slope - 1.0)
    };
    let alpha = bisect(ALPHA_BRACKET.0, ALPHA_BRACKET.1, slope_gap, 1e-10, 200)?;
    let fit = ols(&log_points(&obs, alpha)?)?;
    Ok(PairFit {
        pair,
        alpha,
        fit,
        years_used: obs.iter().map(|o| o.year).collect(),
    })
}

/// Beta estimated from the trade ratio of two pairs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TripleFit {
    pub numerator_pair: (CountryId, CountryId),
    pub denominator_pair: (CountryId, CountryId),
    pub beta: f64,
    pub fit: OlsFit,
    /// R_den / R_num: the distance ratio whose log scales the intercept.
    pub distance_ratio: f64,
    pub years_used: Vec<Year>,
}

/// The final step of the beta estimate: divide the fitted intercept by the
/// log distance ratio.
///
/// Beta is reported as the positive decay exponent of the trade equation:
/// with the trade ratio oriented numerator/denominator, the intercept equals
/// `beta * ln(R_den / R_num)`.
pub fn beta_from_intercept(intercept: f64, r_num_km: f64, r_den_km: f64) -> Result<f64> {
    for (v, what) in [(r_num_km, "numerator distance"), (r_den_km, "denominator distance")] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::Domain {
                what: if what.starts_with('n') { "numerator distance" } else { "denominator distance" },
                requirement: "finite and > 0",
                value: v,
            });
        }
    }
    let ln_ratio = (r_den_km / r_num_km).ln();
    if ln_ratio.abs() < 1e-12 {
        return Err(Error::BetaUnidentifiable);
    }
    Ok(intercept / ln_ratio)
}

/// Estimate beta from two pair series sharing trade rules (equal dielectric
/// constants), via OLS on the per-year log trade ratio against the log
/// interaction ratio.
#[allow(clippy::too_many_arguments)]
pub fn fit_beta(
    numerator_pair: (CountryId, CountryId),
    numerator_series: &[PairObservation],
    denominator_pair: (CountryId, CountryId),
    denominator_series: &[PairObservation],
    alpha_num: f64,
    alpha_den: f64,
    r_num_km: f64,
    r_den_km: f64,
) -> Result<TripleFit> {
    // pre-check identifiability before doing any work
    beta_from_intercept(0.0, r_num_km, r_den_km)?;

    let mut points = Vec::new();
    let mut years = Vec::new();
    for num in usable(numerator_series) {
        let Some(den) = denominator_series
            .iter()
            .find(|d| d.year == num.year && d.trade_mn > 0.0)
        else {
            continue;
        };
        let x = ln_interaction_raw(
            num.exports_m,
            num.imports_m,
            num.exports_n,
            num.imports_n,
            alpha_num,
        )? - ln_interaction_raw(
            den.exports_m,
            den.imports_m,
            den.exports_n,
            den.imports_n,
            alpha_den,
        )?;
        let y = num.trade_mn.ln() - den.trade_mn.ln();
        points.push((x, y));
        years.push(num.year);
    }
    if points.len() < MIN_YEARS {
        return Err(Error::InsufficientYears {
            needed: MIN_YEARS,
            got: points.len(),
        });
    }
    let fit = ols(&points)?;
    let beta = beta_from_intercept(fit.intercept, r_num_km, r_den_km)?;
    Ok(TripleFit {
        numerator_pair,
        denominator_pair,
        beta,
        fit,
        distance_ratio: r_den_km / r_num_km,
        years_used: years,
    })
}

/// Export-GDP power law fit in normalized variables.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub country: CountryId,
    pub rho: f64,
    pub k_prime: f64,
    pub fit: OlsFit,
}

fn common_positive_points(
    ys: &NormalizedSeries,
    xs: &NormalizedSeries,
) -> Vec<(Year, f64, f64)> {
    ys.values()
        .iter()
        .filter_map(|(year, y)| xs.values().get(year).map(|x| (*year, *x, *y)))
        .collect()
}

/// Fit `ln(E~) = ln(k') + rho * ln(G~)` over the common years of the two
/// normalized series.
pub fn fit_rho(
    country: CountryId,
    exports: &NormalizedSeries,
    gdp: &NormalizedSeries,
) -> Result<PowerLawFit> {
    let joined = common_positive_points(exports, gdp);
    if joined.len() < MIN_YEARS {
        return Err(Error::InsufficientYears {
            needed: MIN_YEARS,
            got: joined.len(),
        });
    }
    let mut points = Vec::with_capacity(joined.len());
    for (_, g, e) in &joined {
        if *g <= 0.0 || *e <= 0.0 {
            return Err(Error::Domain {
                what: "power-law input",
                requirement: "> 0 in all common years",
                value: if *g <= 0.0 { *g } else { *e },
            });
        }
        points.push((g.ln(), e.ln()));
    }
    let fit = ols(&points)?;
    Ok(PowerLawFit {
        country,
        rho: fit.slope,
        k_prime: fit.intercept.exp(),
        fit,
    })
}

/// Through-origin proportionality fit of imports on exports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearityFit {
    pub country: CountryId,
    pub slope: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

/// Fit `I~ = k'' * E~` by through-origin least squares. `R^2` is computed
/// against the mean-centered import totals.
pub fn fit_linearity(
    country: CountryId,
    imports: &NormalizedSeries,
    exports: &NormalizedSeries,
) -> Result<LinearityFit> {
    let joined = common_positive_points(imports, exports);
    if joined.len() < MIN_YEARS {
        return Err(Error::InsufficientYears {
            needed: MIN_YEARS,
            got: joined.len(),
        });
    }
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (_, e, i) in &joined {
        sxx += e * e;
        sxy += e * i;
    }
    if sxx == 0.0 {
        return Err(Error::EmptySeries { what: "export series" });
    }
    let slope = sxy / sxx;
    let n = joined.len() as f64;
    let mean_i = joined.iter().map(|(_, _, i)| i).sum::<f64>() / n;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (_, e, i) in &joined {
        let r = i - slope * e;
        ss_res += r * r;
        let d = i - mean_i;
        ss_tot += d * d;
    }
    let r_squared = if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            return Err(Error::ConstantYResiduals);
        }
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(LinearityFit {
        country,
        slope,
        r_squared,
        n_points: joined.len(),
    })
}

/// Sample statistics of a set of fitted alphas.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaDistribution {
    /// Arithmetic mean of the samples.
    pub mu: f64,
    /// Population standard deviation (divisor N).
    pub sigma: f64,
    pub samples: Vec<f64>,
}

/// Arithmetic mean and population standard deviation of the alpha samples.
pub fn alpha_distribution(samples: &[f64]) -> Result<AlphaDistribution> {
    if samples.len() < 2 {
        return Err(Error::InsufficientYears {
            needed: 2,
            got: samples.len(),
        });
    }
    for &s in samples {
        if !s.is_finite() {
            return Err(Error::NonFinite { what: "alpha sample" });
        }
    }
    let n = samples.len() as f64;
    let mu = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mu) * (s - mu)).sum::<f64>() / n;
    Ok(AlphaDistribution {
        mu,
        sigma: var.sqrt(),
        samples: samples.to_vec(),
    })
}

/// Normal cumulative distribution function
/// `F(x) = (1 + erf((x - mu) / (sigma * sqrt(2)))) / 2`.
pub fn normal_cdf(x: f64, mu: f64, sigma: f64) -> Result<f64> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::Domain {
            what: "sigma",
            requirement: "finite and > 0",
            value: sigma,
        });
    }
    Ok(0.5 * (1.0 + erf((x - mu) / (sigma * std::f64::consts::SQRT_2))))
}

/// One row of the empirical-vs-model CDF comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CdfPoint {
    pub alpha: f64,
    pub empirical_cdf: f64,
    pub model_cdf: f64,
    pub difference: f64,
}

/// Empirical CDF of the samples against the fitted normal CDF.
///
/// Samples are sorted ascending; the empirical CDF at the i-th sorted sample
/// (1-based) is `i / N`, and `difference = empirical - model`. A distribution
/// with zero sigma (all samples equal) degenerates to a step at the mean.
pub fn cdf_residuals(samples: &[f64], dist: &AlphaDistribution) -> Result<Vec<CdfPoint>> {
    if samples.len() < 2 {
        return Err(Error::InsufficientYears {
            needed: 2,
            got: samples.len(),
        });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let empirical_cdf = (i + 1) as f64 / n;
            let model_cdf = if dist.sigma == 0.0 {
                if alpha < dist.mu {
                    0.0
                } else {
                    1.0
                }
            } else {
                normal_cdf(alpha, dist.mu, dist.sigma)?
            };
            Ok(CdfPoint {
                alpha,
                empirical_cdf,
                model_cdf,
                difference: empirical_cdf - model_cdf,
            })
        })
        .collect()
}

/// Parse an alpha-fixture CSV (`region,country1,country2,alpha`) into the
/// list of alpha values.
pub fn parse_alpha_csv(content: &str) -> Result<Vec<f64>> {
    let mut lines = content.lines();
    let header = lines.next().unwrap_or("");
    if header.trim_end_matches('\r') != "region,country1,country2,alpha" {
        return Err(Error::Bundle {
            reason: format!("expected header region,country1,country2,alpha, got {header:?}"),
        });
    }
    let mut out = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Bundle {
                reason: format!("line {}: expected 4 columns, got {}", idx + 2, fields.len()),
            });
        }
        let alpha: f64 = fields[3].parse().map_err(|_| Error::Bundle {
            reason: format!("line {}: unparsable alpha {:?}", idx + 2, fields[3]),
        })?;
        out.push(alpha);
    }
    Ok(out)
}
