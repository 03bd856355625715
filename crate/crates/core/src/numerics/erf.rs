// The erf/erfc kernels below follow FreeBSD's s_erf.c (via Go's math/erf.go),
// which carries this notice:
//
// ====================================================
// Copyright (C) 1993 by Sun Microsystems, Inc. All rights reserved.
//
// Developed at SunPro, a Sun Microsystems, Inc. business.
// Permission to use, copy, modify, and distribute this
// software is freely granted, provided that this notice
// is preserved.
// ====================================================

//! Error function, its complement, the scaled complement and the inverse.

use super::SQRT_PI;
use crate::{Error, Result};

const ERX: f64 = 8.45062911510467529297e-01; // 0x3FEB0AC160000000

// coefficients for approximation to  erf in [0, 0.84375]
const EFX: f64 = 1.28379167095512586316e-01; // 0x3FC06EBA8214DB69
const EFX8: f64 = 1.02703333676410069053e+00; // 0x3FF06EBA8214DB69
const PP0: f64 = 1.28379167095512558561e-01; // 0x3FC06EBA8214DB68
const PP1: f64 = -3.25042107247001499370e-01; // 0xBFD4CD7D691CB913
const PP2: f64 = -2.84817495755985104766e-02; // 0xBF9D2A51DBD7194F
const PP3: f64 = -5.77027029648944159157e-03; // 0xBF77A291236668E4
const PP4: f64 = -2.37630166566501626084e-05; // 0xBEF8EAD6120016AC
const QQ1: f64 = 3.97917223959155352819e-01; // 0x3FD97779CDDADC09
const QQ2: f64 = 6.50222499887672944485e-02; // 0x3FB0A54C5536CEBA
const QQ3: f64 = 5.08130628187576562776e-03; // 0x3F74D022C4D36B0F
const QQ4: f64 = 1.32494738004321644526e-04; // 0x3F215DC9221C1A10
const QQ5: f64 = -3.96022827877536812320e-06; // 0xBED09C4342A26120

// coefficients for approximation to  erf  in [0.84375, 1.25]
const PA0: f64 = -2.36211856075265944077e-03; // 0xBF6359B8BEF77538
const PA1: f64 = 4.14856118683748331666e-01; // 0x3FDA8D00AD92B34D
const PA2: f64 = -3.72207876035701323847e-01; // 0xBFD7D240FBB8C3F1
const PA3: f64 = 3.18346619901161753674e-01; // 0x3FD45FCA805120E4
const PA4: f64 = -1.10894694282396677476e-01; // 0xBFBC63983D3E28EC
const PA5: f64 = 3.54783043256182359371e-02; // 0x3FA22A36599795EB
const PA6: f64 = -2.16637559486879084300e-03; // 0xBF61BF380A96073F
const QA1: f64 = 1.06420880400844228286e-01; // 0x3FBB3E6618EEE323
const QA2: f64 = 5.40397917702171048937e-01; // 0x3FE14AF092EB6F33
const QA3: f64 = 7.18286544141962662868e-02; // 0x3FB2635CD99FE9A7
const QA4: f64 = 1.26171219808761642112e-01; // 0x3FC02660E763351F
const QA5: f64 = 1.36370839120290507362e-02; // 0x3F8BEDC26B51DD1C
const QA6: f64 = 1.19844998467991074170e-02; // 0x3F888B545735151D

// coefficients for approximation to  erfc in [1.25, 1/0.35]
const RA0: f64 = -9.86494403484714822705e-03; // 0xBF843412600D6435
const RA1: f64 = -6.93858572707181764372e-01; // 0xBFE63416E4BA7360
const RA2: f64 = -1.05586262253232909814e+01; // 0xC0251E0441B0E726
const RA3: f64 = -6.23753324503260060396e+01; // 0xC04F300AE4CBA38D
const RA4: f64 = -1.62396669462573470355e+02; // 0xC0644CB184282266
const RA5: f64 = -1.84605092906711035994e+02; // 0xC067135CEBCCABB2
const RA6: f64 = -8.12874355063065934246e+01; // 0xC054526557E4D2F2
const RA7: f64 = -9.81432934416914548592e+00; // 0xC023A0EFC69AC25C
const SA1: f64 = 1.96512716674392571292e+01; // 0x4033A6B9BD707687
const SA2: f64 = 1.37657754143519042600e+02; // 0x4061350C526AE721
const SA3: f64 = 4.34565877475229228821e+02; // 0x407B290DD58A1A71
const SA4: f64 = 6.45387271733267880336e+02; // 0x40842B1921EC2868
const SA5: f64 = 4.29008140027567833386e+02; // 0x407AD02157700314
const SA6: f64 = 1.08635005541779435134e+02; // 0x405B28A3EE48AE2C
const SA7: f64 = 6.57024977031928170135e+00; // 0x401A47EF8E484A93
const SA8: f64 = -6.04244152148580987438e-02; // 0xBFAEEFF2EE749A62

// coefficients for approximation to  erfc in [1/.35, 28]
const RB0: f64 = -9.86494292470009928597e-03; // 0xBF84341239E86F4A
const RB1: f64 = -7.99283237680523006574e-01; // 0xBFE993BA70C285DE
const RB2: f64 = -1.77579549177547519889e+01; // 0xC031C209555F995A
const RB3: f64 = -1.60636384855821916062e+02; // 0xC064145D43C5ED98
const RB4: f64 = -6.37566443368389627722e+02; // 0xC083EC881375F228
const RB5: f64 = -1.02509513161107724954e+03; // 0xC09004616A2E5992
const RB6: f64 = -4.83519191608651397019e+02; // 0xC07E384E9BDC383F
const SB1: f64 = 3.03380607434824582924e+01; // 0x403E568B261D5190
const SB2: f64 = 3.25792512996573918826e+02; // 0x40745CAE221B9F0A
const SB3: f64 = 1.53672958608443695994e+03; // 0x409802EB189D5118
const SB4: f64 = 3.19985821950859553908e+03; // 0x40A8FFB7688C246A
const SB5: f64 = 2.55305040643316442583e+03; // 0x40A3F219CEDF3BE6
const SB6: f64 = 4.74528541206955367215e+02; // 0x407DA874E79FE763
const SB7: f64 = -2.24409524465858183362e+01; // 0xC03670E242712D62

const VERY_TINY: f64 = 2.848094538889218e-306;
const SMALL: f64 = 3.725_290_298_461_914e-9; // 2^-28
const TINY: f64 = 1.387_778_780_781_445_7e-17; // 2^-56

#[inline]
fn small_poly(z: f64) -> f64 {
    let r = PP0 + z * (PP1 + z * (PP2 + z * (PP3 + z * PP4)));
    let s = 1.0 + z * (QQ1 + z * (QQ2 + z * (QQ3 + z * (QQ4 + z * QQ5))));
    r / s
}

#[inline]
fn mid_ratio(s: f64) -> f64 {
    let p = PA0 + s * (PA1 + s * (PA2 + s * (PA3 + s * (PA4 + s * (PA5 + s * PA6)))));
    let q = 1.0 + s * (QA1 + s * (QA2 + s * (QA3 + s * (QA4 + s * (QA5 + s * QA6)))));
    p / q
}

/// `R/S` of the tail approximation `erfc(x) = exp(-x^2 - 0.5625 + R/S) / x`,
/// valid for `x >= 1.25`.
#[inline]
fn tail_ratio(x: f64) -> f64 {
    let s = 1.0 / (x * x);
    if x < 1.0 / 0.35 {
        let r = RA0 + s * (RA1 + s * (RA2 + s * (RA3 + s * (RA4 + s * (RA5 + s * (RA6 + s * RA7))))));
        let q = 1.0 + s * (SA1 + s * (SA2 + s * (SA3 + s * (SA4 + s * (SA5 + s * (SA6 + s * (SA7 + s * SA8)))))));
        r / q
    } else {
        let r = RB0 + s * (RB1 + s * (RB2 + s * (RB3 + s * (RB4 + s * (RB5 + s * RB6)))));
        let q = 1.0 + s * (SB1 + s * (SB2 + s * (SB3 + s * (SB4 + s * (SB5 + s * (SB6 + s * SB7))))));
        r / q
    }
}

/// `x * erfc(x)` rescaled by `exp(x^2)` is `exp(-0.5625 + R/S)` up to the
/// split of `x^2`; this returns `x * erfc(x)` for `1.25 <= x < 28`.
#[inline]
fn tail_erfc_times_x(x: f64) -> f64 {
    // z carries x to 20 bits so that z*z is exact
    let z = f64::from_bits(x.to_bits() & 0xffff_ffff_0000_0000);
    (-z * z - 0.5625).exp() * ((z - x) * (z + x) + tail_ratio(x)).exp()
}

/// The error function.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let sign = x < 0.0;
    let a = x.abs();
    let value = if a < 0.84375 {
        if a < SMALL {
            if a < VERY_TINY {
                0.125 * (8.0 * a + EFX8 * a)
            } else {
                a + EFX * a
            }
        } else {
            a + a * small_poly(a * a)
        }
    } else if a < 1.25 {
        ERX + mid_ratio(a - 1.0)
    } else if a >= 6.0 {
        1.0
    } else {
        1.0 - tail_erfc_times_x(a) / a
    };
    if sign {
        -value
    } else {
        value
    }
}

/// The complementary error function `1 - erf(x)`, accurate in the relative
/// sense for large positive `x`.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let sign = x < 0.0;
    let a = x.abs();
    if a < 0.84375 {
        let t = if a < TINY {
            a
        } else {
            let y = small_poly(a * a);
            if a < 0.25 {
                a + a * y
            } else {
                0.5 + (a * y + (a - 0.5))
            }
        };
        return if sign { 1.0 + t } else { 1.0 - t };
    }
    if a < 1.25 {
        let p = mid_ratio(a - 1.0);
        return if sign { 1.0 + ERX + p } else { 1.0 - ERX - p };
    }
    if a < 28.0 {
        if sign && a > 6.0 {
            return 2.0;
        }
        let r = tail_erfc_times_x(a) / a;
        return if sign { 2.0 - r } else { r };
    }
    if sign {
        2.0
    } else {
        0.0
    }
}

/// Scaled complementary error function `exp(x^2) erfc(x)` for `x >= 0`.
/// Negative arguments fall back to the direct product.
pub fn erfcx(x: f64) -> f64 {
    if x < 1.25 {
        return (x * x).exp() * erfc(x);
    }
    if x < 28.0 {
        return (-0.5625 + tail_ratio(x)).exp() / x;
    }
    // asymptotic series, truncated well below double precision for x >= 28
    let s = 1.0 / (2.0 * x * x);
    let mut sum = 1.0;
    for k in (1..=7).rev() {
        sum = 1.0 - (2 * k - 1) as f64 * s * sum;
    }
    sum / (x * SQRT_PI)
}

/// Inverse error function on `(-1, 1)`.
///
/// Safeguarded Newton iteration on `erf` (on `erfc` in the upper half, where
/// `erf` is flat) started from Winitzki's closed-form approximation, with a
/// bisection fallback whenever a Newton step leaves the current bracket.
pub fn erf_inv(p: f64) -> Result<f64> {
    if !(p > -1.0 && p < 1.0) {
        return Err(Error::Domain(format!("erf_inv argument {p} outside (-1, 1)")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    let target = p.abs();
    // 1 - target is exact for target >= 0.5
    let use_complement = target > 0.5;
    let q = 1.0 - target;

    let residual = |x: f64| -> f64 {
        if use_complement {
            q - erfc(x)
        } else {
            erf(x) - target
        }
    };

    let a = 0.147;
    let ln = (-target * target).ln_1p();
    let b = 2.0 / (std::f64::consts::PI * a) + 0.5 * ln;
    let mut x = ((b * b - ln / a).sqrt() - b).sqrt();

    let (mut lo, mut hi) = (0.0, 6.5);
    for _ in 0..200 {
        let r = residual(x);
        if r == 0.0 {
            break;
        }
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let slope = 2.0 / SQRT_PI * (-x * x).exp();
        let mut next = x - r / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs() || hi - lo <= f64::EPSILON * hi {
            x = next;
            break;
        }
        x = next;
    }
    Ok(if p < 0.0 { -x } else { x })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Maclaurin series summed in compensated form; converges well for |x| <= 2.
    fn erf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        let mut comp = 0.0;
        let mut n = 0.0;
        loop {
            n += 1.0;
            term *= -x * x / n;
            let add = term / (2.0 * n + 1.0);
            let y = add - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            if add.abs() < 1e-20 {
                break;
            }
        }
        2.0 / SQRT_PI * sum
    }

    #[test]
    fn known_values() {
        assert_eq!(erf(0.0), 0.0);
        assert_eq!(erfc(0.0), 1.0);
        assert_abs_diff_eq!(erf(1.0), 0.842_700_792_949_714_9, epsilon = 1e-15);
        assert_abs_diff_eq!(erfc(1.0), 0.157_299_207_050_285_13, epsilon = 1e-15);
        assert_abs_diff_eq!(erfc(5.0) / 1.537_459_794_428_034_8e-12, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn matches_series_oracle() {
        for k in -200..=200 {
            let x = k as f64 / 100.0;
            assert_abs_diff_eq!(erf(x), erf_series(x), epsilon = 1e-15);
            assert_abs_diff_eq!(erfc(x), 1.0 - erf_series(x), epsilon = 2e-15);
        }
    }

    #[test]
    fn erfcx_is_scaled_erfc() {
        for k in 0..=250 {
            let x = k as f64 / 10.0;
            let direct = (x * x).exp() * erfc(x);
            assert!((erfcx(x) / direct - 1.0).abs() < 1e-13, "x = {x}");
        }
        // extended-precision values on both sides of the asymptotic switch
        for (x, want) in [
            (10.0, 0.056_140_992_743_822_585_86),
            (20.0, 0.028_174_348_741_051_319_32),
            (27.999_999_999, 0.020_136_801_964_932_533_94),
            (28.000_000_001, 0.020_136_801_963_496_019_62),
        ] {
            assert!((erfcx(x) / want - 1.0).abs() < 1e-14, "x = {x}");
        }
    }

    #[test]
    fn erf_inv_values() {
        assert_eq!(erf_inv(0.0).unwrap(), 0.0);
        let x = erf_inv(0.8).unwrap();
        assert_abs_diff_eq!(x, 0.906_193_802_436_822_9, epsilon = 1e-13);
        assert_abs_diff_eq!(erf_inv(-0.8).unwrap(), -x, epsilon = 0.0);
        assert!(matches!(erf_inv(1.0), Err(Error::Domain(_))));
        assert!(erf_inv(-1.0).is_err());
        assert!(erf_inv(f64::NAN).is_err());
        let p = 1.0 - 1e-15;
        let deep = erf_inv(p).unwrap();
        assert!((erfc(deep) / (1.0 - p) - 1.0).abs() < 1e-12, "{deep}");
    }

    #[test]
    fn erf_inv_matches_bisection_oracle() {
        for p in [0.1, 0.35, 0.5, 0.8, 0.95, 0.999] {
            let (mut lo, mut hi) = (0.0f64, 5.0f64);
            while hi - lo > 1e-15 {
                let mid = 0.5 * (lo + hi);
                if erf(mid) < p {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert_abs_diff_eq!(erf_inv(p).unwrap(), 0.5 * (lo + hi), epsilon = 1e-13);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn erf_inv_round_trip(p in -0.999f64..0.999) {
            let x = erf_inv(p).unwrap();
            prop_assert!((erf(x) - p).abs() < 1e-12);
            prop_assert_eq!(erf_inv(-p).unwrap(), -x);
        }

        #[test]
        fn erf_is_odd_and_bounded(x in -30.0f64..30.0) {
            prop_assert_eq!(erf(-x), -erf(x));
            prop_assert!(erf(x).abs() <= 1.0);
            prop_assert!((erfc(x) - (1.0 - erf(x))).abs() < 2e-16 * 4.0);
        }
    }
}
