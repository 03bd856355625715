//! Bracketing root finders and a 2x2 linear solve.

use crate::{Error, Result};

/// Bisection on a sign change of `fun`; returns the midpoint of the final
/// bracket of width at most `tol`.
pub fn bisect<F: FnMut(f64) -> f64>(mut fun: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (flo, fhi) = (fun(lo), fun(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.signum() != fhi.signum()) || flo.is_nan() || fhi.is_nan() {
        return Err(Error::Bracket { lo, hi });
    }
    bisect_classified(|x| Ok((fun(x) > 0.0) == (fhi > 0.0)), lo, hi, tol)
}

/// Bisection on a classification: `above(x)` is true when the sought point
/// lies below `x`. Requires `above(lo) == false` and `above(hi) == true`.
pub fn bisect_classified<F>(mut above: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<bool>,
{
    if above(lo)? || !above(hi)? {
        return Err(Error::Bracket { lo, hi });
    }
    while (hi - lo).abs() > tol {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if above(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Solves `a x = b` by Cramer's rule.
pub fn solve_2x2(a: [[f64; 2]; 2], b: [f64; 2]) -> Result<[f64; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(det.abs() > 1e-14 * scale * scale) {
        return Err(Error::Domain(format!("singular 2x2 system (det = {det:e})")));
    }
    Ok([
        (b[0] * a[1][1] - a[0][1] * b[1]) / det,
        (a[0][0] * b[1] - b[0] * a[1][0]) / det,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{erf, erf_inv};
    use approx::assert_abs_diff_eq;

    #[test]
    fn square_root_of_two() {
        let r = bisect(|x| x * x - 2.0, 1.0, 2.0, 1e-12).unwrap();
        assert_abs_diff_eq!(r, std::f64::consts::SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn agrees_with_erf_inv() {
        let r = bisect(|x| erf(x) - 0.8, 0.0, 2.0, 1e-14).unwrap();
        assert_abs_diff_eq!(r, erf_inv(0.8).unwrap(), epsilon = 1e-13);
    }

    #[test]
    fn same_sign_is_rejected() {
        let err = bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).unwrap_err();
        assert!(matches!(err, Error::Bracket { .. }));
        assert!(bisect_classified(|x| Ok(x > 5.0), 0.0, 1.0, 1e-9).is_err());
    }

    #[test]
    fn classifier_errors_propagate() {
        let err = bisect_classified(
            |x| {
                if x > 0.7 {
                    Err(Error::Shooting("boom".into()))
                } else {
                    Ok(x > 0.3)
                }
            },
            0.0,
            0.6,
            1e-9,
        );
        assert!(err.is_ok());
        let err = bisect_classified(
            |x| {
                if x > 0.55 && x < 0.6 {
                    Err(Error::Shooting("boom".into()))
                } else {
                    Ok(x > 0.58)
                }
            },
            0.0,
            1.0,
            1e-9,
        );
        assert!(matches!(err, Err(Error::Shooting(_))));
    }

    #[test]
    fn linear_solve() {
        let x = solve_2x2([[2.0, 1.0], [1.0, 3.0]], [3.0, 5.0]).unwrap();
        assert_abs_diff_eq!(x[0], 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(x[1], 1.4, epsilon = 1e-15);
        assert!(solve_2x2([[1.0, 2.0], [2.0, 4.0]], [1.0, 1.0]).is_err());
    }
}
