//! Adaptive Gauss-Kronrod quadrature, finite and semi-infinite.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Result};

// 15-point Kronrod abscissae and weights, with the embedded 7-point Gauss weights
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub est_error: f64,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = half * XGK[j];
        let sum = f(center - x) + f(center + x);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Globally adaptive G7-K15 quadrature on `[a, b]`.
///
/// The panel with the largest `|K15 - G7|` is bisected until the summed
/// estimate drops below `tol` (or below the round-off floor of the result).
pub fn gauss_kronrod<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_evals: usize,
) -> Result<QuadratureResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("finite limits required, got [{a}, {b}]")));
    }
    if max_evals < 15 {
        return Err(Error::Quadrature {
            partial: 0.0,
            est_error: f64::INFINITY,
            evaluations: 0,
        });
    }
    let first = gk15(&mut f, a, b);
    let mut evaluations = 15;
    let mut value = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    loop {
        let floor = 50.0 * f64::EPSILON * value.abs();
        if error <= tol.max(floor) {
            break;
        }
        if evaluations + 30 > max_evals {
            return Err(Error::Quadrature {
                partial: value,
                est_error: error,
                evaluations,
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // panel cannot be split further; accept what we have
            heap.push(worst);
            break;
        }
        let left = gk15(&mut f, worst.a, mid);
        let right = gk15(&mut f, mid, worst.b);
        evaluations += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // re-sum to shed the drift of the running updates
    let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    Ok(QuadratureResult {
        value,
        est_error: error,
        evaluations,
    })
}

/// Controls for [`quad_semi_infinite_with`].
#[derive(Clone, Debug)]
pub struct SemiInfiniteOptions {
    /// Absolute error target.
    pub tol: f64,
    /// Evaluation budget covering both the truncation search and refinement.
    pub max_evals: usize,
    /// Integrand magnitude regarded as negligible.
    pub negligible: f64,
    /// Number of consecutive negligible samples that fixes the truncation point.
    pub run: usize,
    /// Multiplies the truncation depth found by the search (2 doubles it).
    pub depth_factor: f64,
}

impl Default for SemiInfiniteOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_evals: 1_000_000,
            negligible: 1e-16,
            run: 8,
            depth_factor: 1.0,
        }
    }
}

/// Walks left from `upper` in steps of `decay_hint` and returns the first
/// abscissa `L` that ends a run of `run` samples with `|f| < negligible`,
/// together with the number of evaluations spent.
pub fn truncation_point<F: FnMut(f64) -> f64>(
    mut f: F,
    upper: f64,
    decay_hint: f64,
    opts: &SemiInfiniteOptions,
) -> Result<(f64, usize)> {
    if !(decay_hint > 0.0) {
        return Err(Error::Domain(format!("decay_hint = {decay_hint} must be positive")));
    }
    let mut streak = 0;
    let mut evaluations = 0;
    let mut k = 0usize;
    while evaluations < opts.max_evals {
        k += 1;
        let x = upper - k as f64 * decay_hint;
        let fx = f(x);
        evaluations += 1;
        if fx.abs() < opts.negligible {
            streak += 1;
            if streak >= opts.run {
                return Ok((x, evaluations));
            }
        } else {
            streak = 0;
        }
    }
    Err(Error::Quadrature {
        partial: f64::NAN,
        est_error: f64::INFINITY,
        evaluations,
    })
}

/// `int_{-inf}^{upper} f` with the default options.
pub fn quad_semi_infinite<F: FnMut(f64) -> f64>(f: F, upper: f64, decay_hint: f64) -> Result<QuadratureResult> {
    quad_semi_infinite_with(f, upper, decay_hint, &SemiInfiniteOptions::default())
}

/// `int_{-inf}^{upper} f`, truncated at the point located by
/// [`truncation_point`] (scaled by `depth_factor`) and refined adaptively.
pub fn quad_semi_infinite_with<F: FnMut(f64) -> f64>(
    mut f: F,
    upper: f64,
    decay_hint: f64,
    opts: &SemiInfiniteOptions,
) -> Result<QuadratureResult> {
    let (cut, spent) = truncation_point(&mut f, upper, decay_hint, opts)?;
    let lower = upper - opts.depth_factor * (upper - cut);
    // split by decay length so the first panels resolve the integrand's scale
    let budget = opts.max_evals.saturating_sub(spent);
    let pieces = (((upper - lower) / decay_hint).ceil() as usize).clamp(1, 64);
    let width = (upper - lower) / pieces as f64;
    let mut total = QuadratureResult {
        value: 0.0,
        est_error: 0.0,
        evaluations: spent,
    };
    for i in 0..pieces {
        let a = lower + i as f64 * width;
        let b = if i + 1 == pieces { upper } else { a + width };
        let remaining = budget.saturating_sub(total.evaluations - spent);
        let r = gauss_kronrod(&mut f, a, b, opts.tol / pieces as f64, remaining).map_err(|e| match e {
            Error::Quadrature {
                partial,
                est_error,
                evaluations,
            } => Error::Quadrature {
                partial: total.value + partial,
                est_error: total.est_error + est_error,
                evaluations: total.evaluations + evaluations,
            },
            other => other,
        })?;
        total.value += r.value;
        total.est_error += r.est_error;
        total.evaluations += r.evaluations;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{erf, SQRT_PI};
    use approx::assert_abs_diff_eq;

    #[test]
    fn finite_polynomial_exact() {
        let r = gauss_kronrod(|x| x.powi(5) - 3.0 * x * x, 0.0, 2.0, 1e-12, 10_000).unwrap();
        assert_abs_diff_eq!(r.value, 64.0 / 6.0 - 8.0, epsilon = 1e-13);
        assert_eq!(r.evaluations, 15);
    }

    #[test]
    fn exponential_tail() {
        let r = quad_semi_infinite(|x: f64| x.exp(), 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-10);
        assert!(r.est_error < 1e-10 && r.evaluations >= 1);
    }

    #[test]
    fn shifted_gaussian() {
        let g = |x: f64| (-(x + 1.0) * (x + 1.0)).exp() / SQRT_PI;
        let r = quad_semi_infinite(g, 0.0, 0.5).unwrap();
        let exact = 0.5 * (1.0 + erf(1.0));
        assert_abs_diff_eq!(r.value, exact, epsilon = 1e-10);
        assert_abs_diff_eq!(exact, 0.921_350, epsilon = 1e-6);
        assert!((r.value - exact).abs() <= r.est_error.max(1e-14));
    }

    #[test]
    fn doubled_depth_is_consistent() {
        let g = |x: f64| x * x * (0.5 * x).exp();
        let one = quad_semi_infinite(g, 0.0, 2.0).unwrap();
        let opts = SemiInfiniteOptions {
            depth_factor: 2.0,
            ..Default::default()
        };
        let two = quad_semi_infinite_with(g, 0.0, 2.0, &opts).unwrap();
        assert_abs_diff_eq!(one.value, 16.0, epsilon = 1e-9);
        assert!((one.value - two.value).abs() < 1e-9);
    }

    #[test]
    fn truncation_point_meets_criterion() {
        let opts = SemiInfiniteOptions::default();
        let (cut, _) = truncation_point(|x: f64| x.exp(), 0.0, 1.0, &opts).unwrap();
        for k in 0..opts.run {
            assert!((cut + k as f64).exp() < 1e-16);
        }
        assert!(cut > -50.0);
    }

    #[test]
    fn budget_exhaustion_reports_partial() {
        let opts = SemiInfiniteOptions {
            max_evals: 50,
            ..Default::default()
        };
        let err = quad_semi_infinite_with(|x: f64| x.exp(), 0.0, 1.0, &opts).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
        let err = gauss_kronrod(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, 1e-14, 300).unwrap_err();
        match err {
            Error::Quadrature {
                evaluations, partial, ..
            } => {
                assert!(evaluations <= 300 && partial.is_finite());
            }
            other => panic!("{other}"),
        }
    }
}
