//! Deterministic synthetic panel generator.
//!
//! The generator is the estimators' oracle: panels are built so that, at zero
//! noise, every canonical pair's observed trade follows the trade equation
//! *exactly* with respect to the totals a consumer re-derives from the flows.
//!
//! Construction, per year:
//!   1. GDP per country is drawn inside the configured bounds; total exports
//!      follow the power law `E = c_E * G^rho` and imports are proportional,
//!      `I = k'' * E`.
//!   2. Every pair's trade target comes from the trade equation with the
//!      configured alpha, beta, and omega, times lognormal noise
//!      `exp(noise_sigma * z)`.
//!   3. Each pair has one canonical reporter whose row splits the target
//!      into export and import parts, so the pair's observed trade equals the
//!      target exactly.
//!   4. The other orientation's rows are free, and are allocated (tilted
//!      toward their mirror values) so every country's row sums reproduce its
//!      totals exactly.
//!
//! A panel cannot satisfy both the totals identity and the trade equation on
//! *both* orientations of every pair at once, which is why each pair carries
//! a canonical orientation in the bundle manifest. With only two countries
//! there are no free rows at all; such panels are accepted for smoke tests
//! but carry no exactness guarantee.

use std::collections::BTreeMap;

use crate::dataset::{write_bundle, Manifest};
use crate::error::{Error, Result};
use crate::model_core::ln_interaction_raw;
use crate::numeric::SplitMix64;
use crate::trade_data::{
    haversine_km, CapitalTable, CountryId, DistanceTable, FlowPanel, FlowValue, GdpTable,
    UnorderedPair, Year,
};

/// Import-to-export proportionality used for synthetic totals.
const K_DOUBLE_PRIME: f64 = 0.93;
/// Exports as a share of GDP at the geometric center of the GDP range.
const TRADE_SHARE: f64 = 0.25;
/// Target ceiling for (sum of pair trades) / min(exports, imports).
const FEASIBILITY_TARGET: f64 = 0.3;
const FEASIBILITY_LIMIT: f64 = 0.4;
/// Minimum separation between synthetic capitals, in km.
const MIN_CAPITAL_SEPARATION_KM: f64 = 200.0;

/// Configuration for one synthetic panel.
#[derive(Clone, Debug)]
pub struct SynthConfig {
    pub n_countries: usize,
    /// Inclusive year range.
    pub start_year: i64,
    pub end_year: i64,
    pub alpha: f64,
    pub beta: f64,
    /// Dielectric constant for every pair not listed in `omega_overrides`.
    pub omega_default: f64,
    pub omega_overrides: BTreeMap<UnorderedPair, f64>,
    /// Bounds for the per-country reference-year GDP draw, USD.
    pub gdp_min: f64,
    pub gdp_max: f64,
    pub rho: f64,
    /// Standard deviation of the multiplicative lognormal trade noise.
    pub noise_sigma: f64,
    pub rng_seed: u64,
}

impl SynthConfig {
    /// Defaults mirroring the usual analysis window: 2009-2019, alpha 0.5,
    /// beta 1.7, unit omega, rho 1.33, no noise.
    pub fn new(n_countries: usize, rng_seed: u64) -> Self {
        Self {
            n_countries,
            start_year: 2009,
            end_year: 2019,
            alpha: 0.5,
            beta: 1.7,
            omega_default: 1.0,
            omega_overrides: BTreeMap::new(),
            gdp_min: 2.0e11,
            gdp_max: 5.0e12,
            rho: 1.33,
            noise_sigma: 0.0,
            rng_seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_countries < 2 {
            return Err(Error::InfeasibleSynthesis {
                reason: format!("n_countries must be at least 2, got {}", self.n_countries),
            });
        }
        if self.n_countries > 26 * 26 {
            return Err(Error::InfeasibleSynthesis {
                reason: format!("n_countries {} exceeds the synthetic code space", self.n_countries),
            });
        }
        Year::new(self.start_year)?;
        Year::new(self.end_year)?;
        if self.start_year > self.end_year {
            return Err(Error::InfeasibleSynthesis {
                reason: format!("empty year range {}..={}", self.start_year, self.end_year),
            });
        }
        for (v, what) in [
            (self.alpha, "alpha"),
            (self.omega_default, "omega_default"),
            (self.gdp_min, "gdp_min"),
            (self.gdp_max, "gdp_max"),
            (self.rho, "rho"),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InfeasibleSynthesis {
                    reason: format!("{what} must be finite and > 0, got {v}"),
                });
            }
        }
        if !self.beta.is_finite() {
            return Err(Error::InfeasibleSynthesis {
                reason: format!("beta must be finite, got {}", self.beta),
            });
        }
        if self.gdp_min > self.gdp_max {
            return Err(Error::InfeasibleSynthesis {
                reason: format!("gdp_min {} exceeds gdp_max {}", self.gdp_min, self.gdp_max),
            });
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(Error::InfeasibleSynthesis {
                reason: format!("noise_sigma must be finite and >= 0, got {}", self.noise_sigma),
            });
        }
        for (pair, omega) in &self.omega_overrides {
            if !omega.is_finite() || *omega <= 0.0 {
                return Err(Error::InfeasibleSynthesis {
                    reason: format!("omega override for {pair} must be finite and > 0, got {omega}"),
                });
            }
        }
        Ok(())
    }

    fn omega(&self, a: CountryId, b: CountryId) -> f64 {
        self.omega_overrides
            .get(&UnorderedPair::new(a, b))
            .copied()
            .unwrap_or(self.omega_default)
    }
}

/// A generated panel, ready to be written as a bundle.
#[derive(Clone, Debug)]
pub struct SynthOutput {
    pub countries: Vec<CountryId>,
    pub flows: FlowPanel,
    pub gdp: GdpTable,
    pub distances: DistanceTable,
    pub capitals: CapitalTable,
    /// Canonical (reporter, partner) orientation per pair; the orientation
    /// whose observed trade follows the trade equation exactly.
    pub canonical_pairs: Vec<(CountryId, CountryId)>,
}

impl SynthOutput {
    /// Write the panel as a dataset bundle at `dir`.
    pub fn write_bundle(&self, dir: &std::path::Path, config: &SynthConfig) -> Result<Manifest> {
        let notes = vec![
            "synthetic panel generated from the coulomb trade equation".to_string(),
            format!(
                "seed={}; alpha={}; beta={}; omega_default={}; rho={}; noise_sigma={}",
                config.rng_seed,
                config.alpha,
                config.beta,
                config.omega_default,
                config.rho,
                config.noise_sigma
            ),
            "canonical pair orientations carry the exact model trade".to_string(),
        ];
        write_bundle(
            dir,
            &self.flows,
            &self.gdp,
            &self.distances,
            Some(&self.capitals),
            self.canonical_pairs.clone(),
            notes,
        )
    }
}

/// Synthetic ISO-like codes: AAA, AAB, AAC, ...
pub(crate) fn country_codes(n: usize) -> Vec<CountryId> {
    (0..n)
        .map(|i| {
            let bytes = [
                b'A',
                b'A' + (i / 26) as u8,
                b'A' + (i % 26) as u8,
            ];
            CountryId::new(std::str::from_utf8(&bytes).unwrap()).unwrap()
        })
        .collect()
}

struct PairTrades {
    /// Trade target per (pair index, year index).
    values: Vec<Vec<f64>>,
}

fn pair_index(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            out.push((i, j));
        }
    }
    out
}

/// Generate a synthetic panel. Fully deterministic for a fixed config.
pub fn generate_synthetic(config: &SynthConfig) -> Result<SynthOutput> {
    config.validate()?;
    let n = config.n_countries;
    let codes = country_codes(n);
    let years: Vec<Year> = Year::range(config.start_year, config.end_year)?;
    let n_years = years.len();
    let mut rng = SplitMix64::new(config.rng_seed);

    // capitals, spaced apart so every pair distance is usable
    let mut capitals = CapitalTable::new();
    let mut coords: Vec<(f64, f64)> = Vec::with_capacity(n);
    for &code in &codes {
        let mut placed = false;
        for _ in 0..10_000 {
            let lat = rng.uniform(-55.0, 65.0);
            let lon = rng.uniform(-175.0, 175.0);
            if coords
                .iter()
                .all(|&(plat, plon)| haversine_km(lat, lon, plat, plon) >= MIN_CAPITAL_SEPARATION_KM)
            {
                coords.push((lat, lon));
                capitals.insert(code, lat, lon)?;
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::InfeasibleSynthesis {
                reason: "could not place capitals with the required separation".to_string(),
            });
        }
    }
    let mut distances = DistanceTable::new();
    let pairs = pair_index(n);
    for &(i, j) in &pairs {
        let (lat1, lon1) = coords[i];
        let (lat2, lon2) = coords[j];
        distances.insert(codes[i], codes[j], haversine_km(lat1, lon1, lat2, lon2))?;
    }

    // GDP series: reference level, steady growth, small per-year wobble
    let mut gdp_values = vec![vec![0.0f64; n_years]; n];
    for country in gdp_values.iter_mut() {
        let reference = rng.uniform(config.gdp_min, config.gdp_max);
        let growth = rng.uniform(0.01, 0.05);
        for (k, slot) in country.iter_mut().enumerate() {
            let wobble = rng.uniform(-0.04, 0.04);
            *slot = reference * (growth * k as f64 + wobble).exp();
        }
    }

    // totals from the power law; scale chosen so exports sit near a fixed
    // share of GDP at the center of the configured range
    let g_geo = (config.gdp_min * config.gdp_max).sqrt();
    let c_e = TRADE_SHARE * g_geo.powf(1.0 - config.rho);
    if !c_e.is_finite() || c_e <= 0.0 {
        return Err(Error::InfeasibleSynthesis {
            reason: "export scale underflowed; narrow the GDP bounds or lower rho".to_string(),
        });
    }
    let mut exports = vec![vec![0.0f64; n_years]; n];
    let mut imports = vec![vec![0.0f64; n_years]; n];
    for m in 0..n {
        for t in 0..n_years {
            let e = c_e * gdp_values[m][t].powf(config.rho);
            if !e.is_finite() || e <= 0.0 {
                return Err(Error::InfeasibleSynthesis {
                    reason: "synthetic exports left the representable range".to_string(),
                });
            }
            exports[m][t] = e;
            imports[m][t] = K_DOUBLE_PRIME * e;
        }
    }

    // noise factors, one per (pair, year), drawn unconditionally so the
    // stream is identical across noise settings
    let noise: Vec<Vec<f64>> = pairs
        .iter()
        .map(|_| {
            (0..n_years)
                .map(|_| (config.noise_sigma * rng.standard_normal()).exp())
                .collect()
        })
        .collect();

    let trade_targets = |exports: &[Vec<f64>], imports: &[Vec<f64>], with_noise: bool| -> Result<PairTrades> {
        let mut values = Vec::with_capacity(pairs.len());
        for (p, &(i, j)) in pairs.iter().enumerate() {
            let omega = config.omega(codes[i], codes[j]);
            let ln_denominator = omega.ln()
                + config.beta * crate::trade_data::distance(&distances, codes[i], codes[j])?.ln();
            let mut row = Vec::with_capacity(n_years);
            for t in 0..n_years {
                let ln_s = ln_interaction_raw(
                    exports[i][t],
                    imports[i][t],
                    exports[j][t],
                    imports[j][t],
                    config.alpha,
                )?;
                let mut trade = (ln_s - ln_denominator).exp();
                if with_noise {
                    trade *= noise[p][t];
                }
                if !trade.is_finite() || trade <= 0.0 {
                    return Err(Error::InfeasibleSynthesis {
                        reason: "synthetic trade left the representable range".to_string(),
                    });
                }
                row.push(trade);
            }
            values.push(row);
        }
        Ok(PairTrades { values })
    };

    // feasibility: pair trades must stay well below each country's totals so
    // the free rows can absorb the balance
    if n >= 3 {
        fn worst_ratio(
            trades: &PairTrades,
            pairs: &[(usize, usize)],
            exports: &[Vec<f64>],
            imports: &[Vec<f64>],
        ) -> f64 {
            let mut worst = 0.0f64;
            let n = exports.len();
            for t in 0..exports[0].len() {
                for m in 0..n {
                    let sum: f64 = pairs
                        .iter()
                        .enumerate()
                        .filter(|(_, &(i, j))| i == m || j == m)
                        .map(|(p, _)| trades.values[p][t])
                        .sum();
                    worst = worst.max(sum / exports[m][t].min(imports[m][t]));
                }
            }
            worst
        }
        let noiseless = trade_targets(&exports, &imports, false)?;
        let mut r = worst_ratio(&noiseless, &pairs, &exports, &imports);
        if r > FEASIBILITY_LIMIT {
            let homogeneity = 2.0 * config.alpha - 1.0;
            if homogeneity.abs() <= 0.05 {
                return Err(Error::InfeasibleSynthesis {
                    reason: format!(
                        "pair trades reach {r:.2}x of the totals and cannot be rescaled near \
                         alpha = 0.5; increase omega or spread the capitals"
                    ),
                });
            }
            let factor = (FEASIBILITY_TARGET / r).powf(1.0 / homogeneity);
            if !factor.is_finite() || factor <= 0.0 {
                return Err(Error::InfeasibleSynthesis {
                    reason: "total rescaling factor left the representable range".to_string(),
                });
            }
            for m in 0..n {
                for t in 0..n_years {
                    exports[m][t] *= factor;
                    imports[m][t] *= factor;
                }
            }
            r = worst_ratio(&trade_targets(&exports, &imports, false)?, &pairs, &exports, &imports);
            if r > 0.9 {
                return Err(Error::InfeasibleSynthesis {
                    reason: format!("pair trades still reach {r:.2}x of the totals after rescaling"),
                });
            }
        }
    }

    let trades = trade_targets(&exports, &imports, true)?;

    // designated reporter per pair: index parity keeps free rows available
    // for every country once n >= 3
    let designated = |i: usize, j: usize| -> usize {
        if (i + j).is_multiple_of(2) {
            i
        } else {
            j
        }
    };

    let mut flows = FlowPanel::new();
    if n == 2 {
        // no free rows exist: emit a mirror-exact two-country panel
        for (t, &year) in years.iter().enumerate() {
            let trade = trades.values[0][t];
            let d = designated(0, 1);
            let o = 1 - d;
            let theta = exports[d][t] / (exports[d][t] + imports[d][t]);
            let e = theta * trade;
            let i = trade - e;
            flows.insert(codes[d], codes[o], year, FlowValue { export_usd: e, import_usd: i })?;
            flows.insert(codes[o], codes[d], year, FlowValue { export_usd: i, import_usd: e })?;
        }
    } else {
        for (t, &year) in years.iter().enumerate() {
            // canonical rows first: they carry the exact trade targets
            let mut canonical_export = vec![BTreeMap::new(); n]; // d -> {o: e}
            let mut canonical_import = vec![BTreeMap::new(); n]; // d -> {o: i}
            for (p, &(i, j)) in pairs.iter().enumerate() {
                let trade = trades.values[p][t];
                let d = designated(i, j);
                let o = i + j - d;
                let theta = exports[d][t] / (exports[d][t] + imports[d][t]);
                let e = theta * trade;
                canonical_export[d].insert(o, e);
                canonical_import[d].insert(o, trade - e);
            }
            // free rows absorb the remaining totals, tilted toward mirrors
            for m in 0..n {
                let spent_e: f64 = canonical_export[m].values().sum();
                let spent_i: f64 = canonical_import[m].values().sum();
                let free_e = exports[m][t] - spent_e;
                let free_i = imports[m][t] - spent_i;
                let free_partners: Vec<usize> = (0..n)
                    .filter(|&q| q != m && !canonical_export[m].contains_key(&q))
                    .collect();
                if free_e <= 0.0 || free_i <= 0.0 {
                    return Err(Error::InfeasibleSynthesis {
                        reason: format!(
                            "country {} year {} cannot absorb its pair trades; increase omega \
                             or the GDP bounds",
                            codes[m], year
                        ),
                    });
                }
                // mirror targets: the partner's canonical row seen from m
                let export_targets: Vec<f64> = free_partners
                    .iter()
                    .map(|q| canonical_import[*q][&m])
                    .collect();
                let import_targets: Vec<f64> = free_partners
                    .iter()
                    .map(|q| canonical_export[*q][&m])
                    .collect();
                let sum_et: f64 = export_targets.iter().sum();
                let sum_it: f64 = import_targets.iter().sum();
                for (idx, &q) in free_partners.iter().enumerate() {
                    let e = free_e * export_targets[idx] / sum_et;
                    let i = free_i * import_targets[idx] / sum_it;
                    flows.insert(codes[m], codes[q], year, FlowValue { export_usd: e, import_usd: i })?;
                }
                for (&o, &e) in &canonical_export[m] {
                    flows.insert(
                        codes[m],
                        codes[o],
                        year,
                        FlowValue { export_usd: e, import_usd: canonical_import[m][&o] },
                    )?;
                }
            }
            // row sums must reproduce the totals to rounding
            for m in 0..n {
                let sum_e: f64 = (0..n)
                    .filter(|&q| q != m)
                    .map(|q| flows.get(codes[m], codes[q], year).unwrap().export_usd)
                    .sum();
                if (sum_e - exports[m][t]).abs() > 1e-9 * exports[m][t] {
                    return Err(Error::InfeasibleSynthesis {
                        reason: format!("internal balance failure for {} in {}", codes[m], year),
                    });
                }
            }
        }
    }

    let mut gdp = GdpTable::new();
    for (m, code) in codes.iter().enumerate() {
        for (t, &year) in years.iter().enumerate() {
            gdp.insert(*code, year, gdp_values[m][t])?;
        }
    }

    let canonical_pairs = pairs
        .iter()
        .map(|&(i, j)| {
            let d = designated(i, j);
            (codes[d], codes[i + j - d])
        })
        .collect();

    Ok(SynthOutput {
        countries: codes,
        flows,
        gdp,
        distances,
        capitals,
        canonical_pairs,
    })
}
