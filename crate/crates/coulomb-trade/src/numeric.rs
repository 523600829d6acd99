//! Shared numeric plumbing: bracketed bisection, the error function, and a
//! small deterministic RNG for synthetic panels.

// the published erf coefficient digits are kept verbatim
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

/// Bracketed bisection for the root of `f` on `[lo, hi]`.
///
/// Requires a sign change across the bracket. Stops once the bracket width
/// drops below `x_tol` (or after `max_iter` halvings) and returns the bracket
/// midpoint. No monotonicity is assumed.
pub(crate) fn bisect<F>(mut lo: f64, mut hi: f64, mut f: F, x_tol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::SlopeOneUnattainable {
            lo_alpha: lo,
            hi_alpha: hi,
            g_lo: f_lo,
            g_hi: f_hi,
        });
    }

    let mut f_lo = f_lo;
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || (hi - lo) < x_tol {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

// Rational approximations for erf on the standard five intervals; the
// coefficient tables are the widely used Sun/FDLIBM set, accurate to ~1 ulp.
// At x = 0 the result is exactly 0, which downstream code relies on for
// normal_cdf(mu) == 0.5. The full published digits are kept verbatim.

const ERX: f64 = 8.450_629_115_104_675_292_97e-1;

const EFX: f64 = 1.283_791_670_955_125_863_16e-1;
const EFX8: f64 = 1.027_033_336_764_100_690_53e0;

const PP0: f64 = 1.283_791_670_955_125_585_61e-1;
const PP1: f64 = -3.250_421_072_470_014_993_70e-1;
const PP2: f64 = -2.848_174_957_559_851_047_66e-2;
const PP3: f64 = -5.770_270_296_489_441_591_57e-3;
const PP4: f64 = -2.376_301_665_665_016_260_84e-5;
const QQ1: f64 = 3.979_172_239_591_553_528_19e-1;
const QQ2: f64 = 6.502_224_998_876_729_444_85e-2;
const QQ3: f64 = 5.081_306_281_875_765_627_76e-3;
const QQ4: f64 = 1.324_947_380_043_216_445_26e-4;
const QQ5: f64 = -3.960_228_278_775_368_123_20e-6;

const PA0: f64 = -2.362_118_560_752_659_440_77e-3;
const PA1: f64 = 4.148_561_186_837_483_316_66e-1;
const PA2: f64 = -3.722_078_760_357_013_238_47e-1;
const PA3: f64 = 3.183_466_199_011_617_536_74e-1;
const PA4: f64 = -1.108_946_942_823_966_774_76e-1;
const PA5: f64 = 3.547_830_432_561_823_593_71e-2;
const PA6: f64 = -2.166_375_594_868_790_843_00e-3;
const QA1: f64 = 1.064_208_804_008_442_282_86e-1;
const QA2: f64 = 5.403_979_177_021_710_489_37e-1;
const QA3: f64 = 7.182_865_441_419_626_628_68e-2;
const QA4: f64 = 1.261_712_198_087_616_421_12e-1;
const QA5: f64 = 1.363_708_391_202_905_073_62e-2;
const QA6: f64 = 1.198_449_984_679_910_741_70e-2;

const RA0: f64 = -9.864_944_034_847_148_227_05e-3;
const RA1: f64 = -6.938_585_727_071_817_643_72e-1;
const RA2: f64 = -1.055_862_622_532_329_098_14e1;
const RA3: f64 = -6.237_533_245_032_600_603_96e1;
const RA4: f64 = -1.623_966_694_625_734_703_55e2;
const RA5: f64 = -1.846_050_929_067_110_359_94e2;
const RA6: f64 = -8.128_743_550_630_659_342_46e1;
const RA7: f64 = -9.814_329_344_169_145_485_92e0;
const SA1: f64 = 1.965_127_166_743_925_712_92e1;
const SA2: f64 = 1.376_577_541_435_190_426_00e2;
const SA3: f64 = 4.345_658_774_752_292_288_21e2;
const SA4: f64 = 6.453_872_717_332_678_803_36e2;
const SA5: f64 = 4.290_081_400_275_678_333_86e2;
const SA6: f64 = 1.086_350_055_417_794_351_34e2;
const SA7: f64 = 6.570_249_770_319_281_701_35e0;
const SA8: f64 = -6.042_441_521_485_809_874_38e-2;

const RB0: f64 = -9.864_942_924_700_099_285_97e-3;
const RB1: f64 = -7.992_832_376_805_230_065_74e-1;
const RB2: f64 = -1.775_795_491_775_475_198_89e1;
const RB3: f64 = -1.606_363_848_558_219_160_62e2;
const RB4: f64 = -6.375_664_433_683_896_277_22e2;
const RB5: f64 = -1.025_095_131_611_077_249_54e3;
const RB6: f64 = -4.835_191_916_086_513_970_19e2;
const SB1: f64 = 3.033_806_074_348_245_829_24e1;
const SB2: f64 = 3.257_925_129_965_739_188_26e2;
const SB3: f64 = 1.536_729_586_084_436_959_94e3;
const SB4: f64 = 3.199_858_219_508_595_539_08e3;
const SB5: f64 = 2.553_050_406_433_164_425_83e3;
const SB6: f64 = 4.745_285_412_069_553_672_15e2;
const SB7: f64 = -2.244_095_244_658_581_833_62e1;

/// Error function, accurate to roughly one ulp over the real line.
pub(crate) fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return -1.0;
    }

    let sign = x < 0.0;
    let ax = x.abs();

    if ax < 0.84375 {
        // |x| < 0.84375
        let temp = if ax < 3.725_290_298_461_914e-9 {
            // |x| < 2^-28: avoid underflow in x*x
            if ax < 2.848e-306 {
                0.125 * (8.0 * x + EFX8 * x)
            } else {
                x + EFX * x
            }
        } else {
            let z = x * x;
            let r = PP0 + z * (PP1 + z * (PP2 + z * (PP3 + z * PP4)));
            let s = 1.0 + z * (QQ1 + z * (QQ2 + z * (QQ3 + z * (QQ4 + z * QQ5))));
            let y = r / s;
            x + x * y
        };
        return temp;
    }

    if ax < 1.25 {
        // 0.84375 <= |x| < 1.25
        let s = ax - 1.0;
        let p = PA0 + s * (PA1 + s * (PA2 + s * (PA3 + s * (PA4 + s * (PA5 + s * PA6)))));
        let q = 1.0 + s * (QA1 + s * (QA2 + s * (QA3 + s * (QA4 + s * (QA5 + s * QA6)))));
        return if sign { -ERX - p / q } else { ERX + p / q };
    }

    if ax >= 6.0 {
        // erf saturates well past machine precision
        return if sign { -1.0 } else { 1.0 };
    }

    // 1.25 <= |x| < 6: compute via the complementary function
    let s = 1.0 / (ax * ax);
    let (r, big_s) = if ax < 1.0 / 0.35 {
        (
            RA0 + s * (RA1 + s * (RA2 + s * (RA3 + s * (RA4 + s * (RA5 + s * (RA6 + s * RA7)))))),
            1.0 + s * (SA1 + s * (SA2 + s * (SA3 + s * (SA4 + s * (SA5 + s * (SA6 + s * (SA7 + s * SA8))))))),
        )
    } else {
        (
            RB0 + s * (RB1 + s * (RB2 + s * (RB3 + s * (RB4 + s * (RB5 + s * RB6))))),
            1.0 + s * (SB1 + s * (SB2 + s * (SB3 + s * (SB4 + s * (SB5 + s * (SB6 + s * SB7)))))),
        )
    };
    // split off the low mantissa bits so exp argument stays exact
    let z = f64::from_bits(ax.to_bits() & 0xffff_ffff_0000_0000);
    let r = f64::exp(-z * z - 0.5625) * f64::exp((z - ax) * (z + ax) + r / big_s);
    if sign {
        r / ax - 1.0
    } else {
        1.0 - r / ax
    }
}

/// SplitMix64: tiny, fast, and stable across platforms and releases.
///
/// Backs every random draw in the synthetic generator so that a given seed
/// always reproduces the same panel byte for byte.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
    spare_normal: Option<f64>,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self {
            state: seed,
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal draw via Box-Muller.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // u in (0, 1] so ln(u) is finite
        let u = 1.0 - self.next_f64();
        let v = self.next_f64();
        let r = (-2.0 * u.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * v;
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_simple_root() {
        let root = bisect(0.0, 4.0, |x| Ok(x * x - 2.0), 1e-12, 200).unwrap();
        assert!((root - std::f64::consts::SQRT_2).abs() < 1e-10);
    }

    #[test]
    fn bisect_rejects_same_sign_bracket() {
        let err = bisect(2.0, 3.0, |x| Ok(x * x - 2.0), 1e-12, 200).unwrap_err();
        assert!(matches!(err, Error::SlopeOneUnattainable { .. }));
    }

    #[test]
    fn erf_is_exact_at_zero_and_odd() {
        assert_eq!(erf(0.0), 0.0);
        for &x in &[0.1, 0.7, 1.1, 2.3, 4.5] {
            assert_eq!(erf(-x), -erf(x));
        }
    }

    #[test]
    fn erf_matches_reference_values() {
        // Reference values from a correctly rounded libm.
        let cases = [
            (0.001, 1.1283787909692363e-3),
            (0.1, 0.1124629160182849),
            (0.25, 0.2763263901682369),
            (0.5, 0.5204998778130465),
            (0.84375, 0.7672256612323416), // interval seam
            (1.0, 0.8427007929497149),
            (1.25, 0.9229001282564582), // interval seam
            (1.5, 0.9661051464753108),
            (2.0, 0.9953222650189527),
            (2.857142857142857, 0.9999466876886117), // interval seam
            (3.0, 0.9999779095030014),
            (4.0, 0.9999999845827421),
            (5.5, 0.9999999999999927),
            (6.5, 1.0),
        ];
        for &(x, want) in &cases {
            let got = erf(x);
            assert!(
                (got - want).abs() < 1e-15,
                "erf({x}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn splitmix_is_deterministic_and_uniformish() {
        let mut a = SplitMix64::new(42);
        let mut b = SplitMix64::new(42);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut rng = SplitMix64::new(7);
        let mean = (0..10_000).map(|_| rng.next_f64()).sum::<f64>() / 10_000.0;
        assert!((mean - 0.5).abs() < 0.02, "mean = {mean}");
    }

    #[test]
    fn box_muller_moments_are_sane() {
        let mut rng = SplitMix64::new(123);
        let n = 50_000;
        let draws: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|z| (z - mean) * (z - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.02, "mean = {mean}");
        assert!((var - 1.0).abs() < 0.03, "var = {var}");
    }
}
