//! Small-time structure of the moving-boundary problem.
//!
//! With `eta = y / sqrt(t)` and `z = (eta + s0) / 2` the inner solution is
//! `u ~ u_0(eta) + t u_1(eta)` and the front moves as
//! `s(t) ~ s0 t^(1/2) + s1 t^(3/2)`. Quantities carrying `exp(z^2)` are
//! evaluated through `erfcx` so that nothing overflows for large `|eta|`.

use std::f64::consts::PI;

use crate::numerics::{
    erf, erf_inv, erfc, erfcx, gauss_kronrod, quad_semi_infinite_with, solve_2x2, QuadratureResult,
    SemiInfiniteOptions, SQRT_PI,
};
use crate::{Error, ReactionSpec, Result};

fn check_cutoff(u_c: f64) -> Result<()> {
    if u_c > 0.0 && u_c < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("cut-off u_c = {u_c} must lie in (0, 1)")))
    }
}

/// `s0 = 2 erf^-1(1 - 2 u_c)`.
pub fn compute_s0(u_c: f64) -> Result<f64> {
    check_cutoff(u_c)?;
    Ok(2.0 * erf_inv(1.0 - 2.0 * u_c)?)
}

/// `u_0(eta) = (1 - erf(eta/2 + erf^-1(1 - 2u_c))) / 2`, valid on both sides.
pub fn inner_leading(u_c: f64, eta: f64) -> Result<f64> {
    let s0 = compute_s0(u_c)?;
    Ok(0.5 * erfc(0.5 * (eta + s0)))
}

/// `u_bar = 1 + (eta + s0)^2 / 2` in terms of `z`.
#[inline]
fn u_bar(z: f64) -> f64 {
    1.0 + 2.0 * z * z
}

/// `u_hat = sqrt(pi) u_bar erf(z) + 2 z exp(-z^2)`.
#[inline]
fn u_hat(z: f64) -> f64 {
    SQRT_PI * u_bar(z) * erf(z) + 2.0 * z * (-z * z).exp()
}

/// `exp(z^2) (1 - u_0)`.
#[inline]
fn scaled_deficit(z: f64) -> f64 {
    0.5 * erfcx(-z)
}

/// `exp(z^2) f(u_0)` with `f(u) = (1 - u) g(u)`.
#[inline]
fn scaled_reaction<G: Fn(f64) -> f64>(g: &G, z: f64) -> f64 {
    let u0 = 0.5 * erfc(z);
    scaled_deficit(z) * g(u0)
}

/// `sqrt(pi) I_1 + I_2`. The bracket `sqrt(pi) u_bar + u_hat` equals
/// `exp(-z^2) (sqrt(pi) u_bar erfcx(-z) + 2z)`, which decays like
/// `exp(-z^2) / |z|^3` as `z -> -inf`.
#[inline]
fn d_hat1_integrand<G: Fn(f64) -> f64>(g: &G, eta: f64, s0: f64) -> f64 {
    let z = 0.5 * (eta + s0);
    let bracket = SQRT_PI * u_bar(z) * erfcx(-z) + 2.0 * z;
    let e = (-z * z).exp();
    if e == 0.0 {
        return 0.0;
    }
    scaled_reaction(g, z) * e * bracket
}

/// Decay length handed to the truncation search for the `d_hat1` integral.
const D_HAT1_DECAY: f64 = 1.0;

/// `d_hat1` for a reaction given as `g(u) = f(u) / (1 - u)`.
pub fn compute_d_hat1_for<G: Fn(f64) -> f64>(u_c: f64, g: G, opts: &SemiInfiniteOptions) -> Result<QuadratureResult> {
    let s0 = compute_s0(u_c)?;
    quad_semi_infinite_with(|eta| d_hat1_integrand(&g, eta, s0), 0.0, D_HAT1_DECAY, opts)
}

/// `d_hat1 = int_{-inf}^0 (sqrt(pi) I_1 + I_2)` with the smooth reaction.
pub fn compute_d_hat1(spec: &ReactionSpec) -> Result<f64> {
    Ok(compute_d_hat1_with(spec, &SemiInfiniteOptions::default())?.value)
}

pub fn compute_d_hat1_with(spec: &ReactionSpec, opts: &SemiInfiniteOptions) -> Result<QuadratureResult> {
    compute_d_hat1_for(spec.u_c(), |u| spec.f_over_deficit(u), opts)
}

/// `s1 = (sqrt(pi) (s0^2 + 2) erfc(s0/2) exp(s0^2/4) - 2 s0) d_hat1 / 4`.
pub fn compute_s1(u_c: f64, d_hat1: f64) -> Result<f64> {
    let s0 = compute_s0(u_c)?;
    Ok(s1_factor(s0) * d_hat1)
}

fn s1_factor(s0: f64) -> f64 {
    // erfc(x) exp(x^2) = erfcx(x)
    0.25 * (SQRT_PI * (s0 * s0 + 2.0) * erfcx(0.5 * s0) - 2.0 * s0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmallTimeCoefficients {
    pub u_c: f64,
    pub s0: f64,
    pub s1: f64,
    pub d_hat1: f64,
    pub d1: f64,
    pub d2: f64,
}

impl SmallTimeCoefficients {
    pub fn compute(spec: &ReactionSpec) -> Result<Self> {
        Self::from_d_hat1(spec.u_c(), compute_d_hat1(spec)?)
    }

    /// Coefficients from a known `d_hat1`. `(d1, d2)` solve the front
    /// condition `u_L1(0) = 0` together with the far-field condition
    /// `d2 = sqrt(pi) d1 + d_hat1 / 2`.
    pub fn from_d_hat1(u_c: f64, d_hat1: f64) -> Result<Self> {
        let s0 = compute_s0(u_c)?;
        let s1 = s1_factor(s0) * d_hat1;
        let (row, rhs) = front_condition(s0, s1);
        let [d1, d2] = solve_2x2([row, [-SQRT_PI, 1.0]], [rhs, 0.5 * d_hat1])?;
        Ok(Self {
            u_c,
            s0,
            s1,
            d_hat1,
            d1,
            d2,
        })
    }

    /// Right-side constants; derivative continuity at the front makes them
    /// equal to the left ones.
    pub fn d_bar(&self) -> (f64, f64) {
        (self.d1, self.d2)
    }

    /// Residuals of the front condition, the left far-field condition and the
    /// right far-field condition `d2 = -sqrt(pi) d1`.
    pub fn residuals(&self) -> [f64; 3] {
        let (row, rhs) = front_condition(self.s0, self.s1);
        [
            row[0] * self.d1 + row[1] * self.d2 - rhs,
            self.d2 - SQRT_PI * self.d1 - 0.5 * self.d_hat1,
            self.d2 + SQRT_PI * self.d1,
        ]
    }

    /// `u_R1(eta)` for `eta >= 0`.
    pub fn right_correction(&self, eta: f64) -> f64 {
        let z = 0.5 * (eta + self.s0);
        self.d1 * u_hat(z) + self.d2 * u_bar(z) - self.s1 / (2.0 * SQRT_PI) * (-z * z).exp()
    }

    /// `s0 t^(1/2) + s1 t^(3/2)`.
    pub fn front(&self, t: f64) -> f64 {
        self.s0 * t.sqrt() + self.s1 * t.powf(1.5)
    }
}

/// `d2 + (2 s0 e / (s0^2 + 2) + sqrt(pi) erf(s0/2)) d1 = s1 e / (sqrt(pi) (s0^2 + 2))`
/// with `e = exp(-s0^2 / 4)`.
fn front_condition(s0: f64, s1: f64) -> ([f64; 2], f64) {
    let e = (-0.25 * s0 * s0).exp();
    let q = s0 * s0 + 2.0;
    (
        [2.0 * s0 * e / q + SQRT_PI * erf(0.5 * s0), 1.0],
        s1 * e / (SQRT_PI * q),
    )
}

/// First-order inner correction with the cumulative integrals of `I_1`,
/// `I_2` tabulated once on `[-depth, 0]`.
#[derive(Clone, Debug)]
pub struct InnerCorrection {
    coeffs: SmallTimeCoefficients,
    spec: ReactionSpec,
    h: f64,
    depth: f64,
    /// `int_{-k h}^0 I_1` and `int_{-k h}^0 I_2`.
    cum1: Vec<f64>,
    cum2: Vec<f64>,
}

const PANEL_TOL: f64 = 1e-13;

impl InnerCorrection {
    pub fn new(spec: &ReactionSpec) -> Result<Self> {
        Self::with_coefficients(spec, SmallTimeCoefficients::compute(spec)?)
    }

    pub fn with_coefficients(spec: &ReactionSpec, coeffs: SmallTimeCoefficients) -> Result<Self> {
        let h = 0.05;
        // beyond this depth every term of u_L1 is below double precision
        let depth = 2.0 * 9.0 + coeffs.s0.max(0.0);
        let n = (depth / h).ceil() as usize;
        let mut this = Self {
            coeffs,
            spec: spec.clone(),
            h,
            depth: n as f64 * h,
            cum1: vec![0.0; n + 1],
            cum2: vec![0.0; n + 1],
        };
        for k in 0..n {
            let (a, b) = (-((k + 1) as f64) * h, -(k as f64) * h);
            let (p1, p2) = this.panel(a, b)?;
            this.cum1[k + 1] = this.cum1[k] + p1;
            this.cum2[k + 1] = this.cum2[k] + p2;
        }
        Ok(this)
    }

    pub fn coefficients(&self) -> &SmallTimeCoefficients {
        &self.coeffs
    }

    fn integrands(&self, eta: f64) -> (f64, f64) {
        let z = 0.5 * (eta + self.coeffs.s0);
        let r = scaled_reaction(&|u| self.spec.f_over_deficit(u), z);
        (u_bar(z) * r, u_hat(z) * r)
    }

    fn panel(&self, a: f64, b: f64) -> Result<(f64, f64)> {
        let i1 = gauss_kronrod(|x| self.integrands(x).0, a, b, PANEL_TOL, 100_000)?;
        let i2 = gauss_kronrod(|x| self.integrands(x).1, a, b, PANEL_TOL, 100_000)?;
        Ok((i1.value, i2.value))
    }

    /// `(int_eta^0 I_1, int_eta^0 I_2)`.
    pub fn cumulative(&self, eta: f64) -> Result<(f64, f64)> {
        if eta > 0.0 || eta < -self.depth {
            return Err(Error::Domain(format!(
                "eta = {eta} outside the tabulated range [{}, 0]",
                -self.depth
            )));
        }
        let k = ((-eta / self.h).floor() as usize).min(self.cum1.len() - 1);
        let node = -(k as f64) * self.h;
        if node == eta {
            return Ok((self.cum1[k], self.cum2[k]));
        }
        let (p1, p2) = self.panel(eta, node)?;
        Ok((self.cum1[k] + p1, self.cum2[k] + p2))
    }

    /// `u_p2(eta) = u_hat/2 int_eta^0 I_1 - u_bar/2 int_eta^0 I_2`.
    pub fn u_p2(&self, eta: f64) -> Result<f64> {
        let z = 0.5 * (eta + self.coeffs.s0);
        let (a1, a2) = self.cumulative(eta)?;
        Ok(0.5 * u_hat(z) * a1 - 0.5 * u_bar(z) * a2)
    }

    /// `u_L1(eta)` for `eta <= 0`, `u_R1(eta)` for `eta >= 0`. Below the
    /// tabulated depth the correction is zero to double precision.
    pub fn eval(&self, eta: f64) -> Result<f64> {
        if eta >= 0.0 {
            return Ok(self.coeffs.right_correction(eta));
        }
        if eta < -self.depth {
            return Ok(0.0);
        }
        Ok(self.coeffs.right_correction(eta) + self.u_p2(eta)?)
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }
}

/// One-off evaluation of the inner correction.
pub fn inner_correction(spec: &ReactionSpec, eta: f64) -> Result<f64> {
    InnerCorrection::new(spec)?.eval(eta)
}

/// Outer solution away from the front: `1 - exp(E)` for `y < 0` and `exp(E)`
/// for `y > 0`, where
/// `E = -y^2/4t - y s0 / (2 sqrt t) + ln(t)/2 - ln|y| - ln(pi)/2 - s0^2/4`.
pub fn outer_profile(u_c: f64, y: f64, t: f64) -> Result<f64> {
    if y == 0.0 {
        return Err(Error::Domain("the outer regions exclude y = 0".into()));
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t = {t} must be positive")));
    }
    let s0 = compute_s0(u_c)?;
    let e = outer_exponent(s0, y, t);
    Ok(if y < 0.0 { 1.0 - e.exp() } else { e.exp() })
}

/// Exponent `E` of [`outer_profile`].
pub fn outer_exponent(s0: f64, y: f64, t: f64) -> f64 {
    -y * y / (4.0 * t) - y * s0 / (2.0 * t.sqrt()) + 0.5 * t.ln() - y.abs().ln() - 0.5 * PI.ln() - 0.25 * s0 * s0
}

/// `s'(t) ~ s0 t^(-1/2) / 2 + 3 s1 t^(1/2) / 2`.
pub fn sdot_small(coeffs: &SmallTimeCoefficients, t: f64) -> f64 {
    0.5 * coeffs.s0 / t.sqrt() + 1.5 * coeffs.s1 * t.sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinimumEstimate {
    pub t_m: f64,
    /// False once `t_m` leaves the small-time range (`t_m >= 1`).
    pub reliable: bool,
}

/// Location `t_m = s0 / (3 s1)` of the minimum of the two-term front speed;
/// `None` when the two-term law has no minimum (`u_c >= 1/2` or `s1 <= 0`).
pub fn sdot_minimum_estimate(coeffs: &SmallTimeCoefficients) -> Option<MinimumEstimate> {
    if !(coeffs.u_c < 0.5 && coeffs.s0 > 0.0 && coeffs.s1 > 0.0) {
        return None;
    }
    let t_m = coeffs.s0 / (3.0 * coeffs.s1);
    Some(MinimumEstimate {
        t_m,
        reliable: t_m < 1.0,
    })
}
