//! Large-time structure: far-field exponents, the envelope-linear exponents
//! of the outer regions, the transition layers, and the basis function
//! `phi_+` that decides the form of the exponentially small speed correction
//!
//! ```text
//! s'(t) = v* + c3 t^gamma exp(-v*^2 t / 4).
//! ```

use crate::numerics::{erfc, ode_integrate, Crossing, Event, OdeOptions};
use crate::ptw::{lambda_plus, WaveSolution};
use crate::reaction::ReactionSpec;
use crate::{Error, Result};
use std::f64::consts::PI;

/// Threshold below which `phi_+(0)` (or `E4 / A_L`) counts as zero.
pub const TOL_ZERO: f64 = 1e-8;

/// Offset of the starting point off the saddle, as a deficit `1 - U`.
pub const SADDLE_OFFSET: f64 = 1e-10;

/// Kinks of the outer exponents and the data they are built from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LargeTimeExponents {
    pub v_star: f64,
    pub f_prime_at_1: f64,
    /// `-sqrt(v*^2 - 4 f'(1))`, the kink of `G0` behind the front.
    pub kink_left: f64,
    /// `-2 sqrt(-f'(1))`, where `H` changes branch.
    pub kink_inner: f64,
    pub a_minus_inf: f64,
}

impl LargeTimeExponents {
    pub fn new(v_star: f64, f_prime_at_1: f64, a_minus_inf: f64) -> Result<Self> {
        if !(v_star > 0.0 && v_star.is_finite()) {
            return Err(Error::Domain(format!("wave speed {v_star} must be positive")));
        }
        if !(f_prime_at_1 < 0.0) {
            return Err(Error::Domain(format!("f'(1) = {f_prime_at_1} must be negative")));
        }
        Ok(Self {
            v_star,
            f_prime_at_1,
            kink_left: -(v_star * v_star - 4.0 * f_prime_at_1).sqrt(),
            kink_inner: -2.0 * (-f_prime_at_1).sqrt(),
            a_minus_inf,
        })
    }

    pub fn from_wave(spec: &ReactionSpec, ws: &WaveSolution) -> Result<Self> {
        Self::new(ws.v_star(), spec.f_prime_at_1(), ws.a_minus_inf())
    }

    /// `G0(w)` for `w < 0`. The linear branch is returned unchanged for
    /// `w >= 0`.
    pub fn g0_left(&self, w: f64) -> f64 {
        let v = self.v_star;
        if w < self.kink_left {
            0.25 * (w + v).powi(2) - self.f_prime_at_1
        } else {
            0.5 * (v + self.kink_left) * w
        }
    }

    /// `G0_bar(w)` for `w > 0`.
    pub fn g0_right(&self, w: f64) -> f64 {
        let c0 = self.v_star;
        if w <= c0 {
            c0 * w
        } else {
            0.25 * (w + c0).powi(2)
        }
    }

    /// `H(w)` on `(kink_left, 0)`.
    pub fn h_exponent(&self, w: f64) -> Result<f64> {
        if !(w > self.kink_left && w < 0.0) {
            return Err(Error::Domain(format!(
                "H is defined on ({}, 0), got w = {w}",
                self.kink_left
            )));
        }
        let v = self.v_star;
        Ok(if w < self.kink_inner {
            0.25 * (w + v).powi(2) - self.f_prime_at_1
        } else {
            0.25 * v * v + (0.5 * v - (-self.f_prime_at_1).sqrt()) * w
        })
    }
}

/// Right transition layer `F0_bar(zeta) = u_c erfc(zeta / 2) / 2`.
pub fn transition_right(u_c: f64, zeta: f64) -> f64 {
    0.5 * u_c * erfc(0.5 * zeta)
}

/// Left transition layer `F0(zeta) = A_-inf (1 + erf(zeta / 2)) / 2`.
pub fn transition_left(a_minus_inf: f64, zeta: f64) -> f64 {
    0.5 * a_minus_inf * erfc(-0.5 * zeta)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Gaussian exponent `-ln u` of the far field at `y`, given the front
/// position `s` at time `t`.
pub fn farfield_exponent(spec: &ReactionSpec, s: f64, y: f64, t: f64, side: Side) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("time t = {t} must be positive")));
    }
    let wrong = match side {
        Side::Left => !(y < 0.0),
        Side::Right => !(y > 0.0),
    };
    if wrong {
        return Err(Error::Domain(format!("y = {y} lies on the wrong side ({side:?})")));
    }
    let common =
        y * y / (4.0 * t) + y * s / (2.0 * t) + y.abs().ln() + s * s / (4.0 * t) - 0.5 * t.ln() + 0.5 * PI.ln();
    Ok(match side {
        Side::Left => common - spec.f_prime_at_1() * t,
        Side::Right => common,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LargeTimeCase {
    /// `phi_+(0) != 0`, so `c3 != 0`.
    I,
    /// `phi_+(0) = 0`, so `c3 = 0`.
    II,
}

/// The outcome of the basis problem and what it implies for the speed
/// correction.
#[derive(Clone, Debug, PartialEq)]
pub struct LargeTimeClassification {
    pub v_star: f64,
    pub phi_plus_0: f64,
    pub dphi_plus_0: f64,
    pub e4_over_al: f64,
    pub c3_over_al: f64,
    pub case: LargeTimeCase,
    pub gamma: f64,
    /// Set when `|phi_+(0)|` or `|E4 / A_L|` lies in `[TOL_ZERO, 10 TOL_ZERO]`.
    pub warning: Option<String>,
}

impl LargeTimeClassification {
    /// Applies the case table to `phi_+(0)` and `phi_+'(0)`.
    pub fn from_basis(spec: &ReactionSpec, v_star: f64, phi0: f64, dphi0: f64) -> Self {
        let u_c = spec.u_c();
        let e4 = dphi0 + phi0 * (0.5 * v_star - spec.f_c_plus() / (v_star * u_c));
        let near = |x: f64| (TOL_ZERO..=10.0 * TOL_ZERO).contains(&x.abs());
        let mut warning = None;
        if near(phi0) {
            warning = Some(format!("ambiguous classification: |phi_+(0)| = {:e}", phi0.abs()));
        }
        let (case, c3, gamma) = if phi0.abs() < TOL_ZERO {
            (LargeTimeCase::II, 0.0, -1.5)
        } else {
            if near(e4) && warning.is_none() {
                warning = Some(format!("ambiguous classification: |E4/A_L| = {:e}", e4.abs()));
            }
            let gamma = if e4.abs() < TOL_ZERO { -0.5 } else { -1.5 };
            (LargeTimeCase::I, -v_star * phi0 / (4.0 * u_c), gamma)
        };
        Self {
            v_star,
            phi_plus_0: phi0,
            dphi_plus_0: dphi0,
            e4_over_al: e4,
            c3_over_al: c3,
            case,
            gamma,
            warning,
        }
    }
}

/// `psi_+` sampled on `[-M, 0]`, together with the classification.
#[derive(Clone, Debug)]
pub struct BasisTable {
    pub y: Vec<f64>,
    pub psi: Vec<f64>,
    pub dpsi: Vec<f64>,
    pub m: f64,
    pub classification: LargeTimeClassification,
}

struct BasisRun {
    m: f64,
    psi0: f64,
    dpsi0: f64,
    samples: Vec<(f64, [f64; 4])>,
}

// State: (1 - U_T, -U_T', psi, psi'), all starting at the scale of the
// saddle offset so a single absolute tolerance fits every component.
fn integrate_basis(spec: &ReactionSpec, v: f64, tol: f64, spacing: Option<f64>) -> Result<BasisRun> {
    if !(1e-14..1e-3).contains(&tol) {
        return Err(Error::Domain(format!("ODE tolerance {tol:e} outside [1e-14, 1e-3)")));
    }
    let kappa = (-spec.f_prime_at_1()).sqrt();
    let lp = lambda_plus(v, spec.f_prime_at_1());
    let eps = SADDLE_OFFSET;
    let start = [eps, lp * eps, eps, kappa * eps];
    let target = 1.0 - spec.u_c();
    let rhs = |_: f64, s: &[f64; 4]| {
        let w = s[0];
        let u = 1.0 - w;
        [
            s[1],
            w * spec.f_over_deficit(u) - v * s[1],
            s[3],
            -spec.f_prime(u) * s[2],
        ]
    };
    let front = || {
        [Event::new("front", Crossing::Rising, true, move |_, s: &[f64; 4]| {
            s[0] - target
        })]
    };
    let mut opts = OdeOptions {
        atol: tol * eps,
        keep_steps: false,
        require_event: true,
        ..OdeOptions::with_tol(tol)
    };
    let span = (0.0, 2000.0);
    let first = ode_integrate(rhs, start, span, &opts, &front())?;
    let hit = first.terminal_event.as_ref().expect("required event");
    let m = hit.at;
    let scale = (-kappa * m).exp() / eps;
    let mut samples = Vec::new();
    if let Some(h) = spacing {
        let k_max = (m / h).floor() as usize;
        opts.samples = (0..=k_max).rev().map(|k| m - k as f64 * h).collect();
        let second = ode_integrate(rhs, start, span, &opts, &front())?;
        samples = second
            .sample_abscissae
            .iter()
            .zip(&second.sample_states)
            .map(|(&x, s)| (x - m, *s))
            .collect();
    }
    for (_, s) in samples.iter_mut() {
        s[2] *= scale;
        s[3] *= scale;
    }
    Ok(BasisRun {
        m,
        psi0: hit.state[2] * scale,
        dpsi0: hit.state[3] * scale,
        samples,
    })
}

/// Solves the basis problem `psi'' + f'(U_T) psi = 0`, `psi ~ exp(kappa y)`,
/// jointly with the wave ODE, then classifies.
pub fn solve_basis(spec: &ReactionSpec, ws: &WaveSolution, tol: f64) -> Result<LargeTimeClassification> {
    let v = ws.v_star();
    let run = integrate_basis(spec, v, tol, None)?;
    let phi0 = run.psi0;
    let dphi0 = run.dpsi0 - 0.5 * v * run.psi0;
    Ok(LargeTimeClassification::from_basis(spec, v, phi0, dphi0))
}

/// As [`solve_basis`], also returning `psi_+` on a uniform mesh ending at 0.
pub fn basis_table(spec: &ReactionSpec, ws: &WaveSolution, tol: f64, spacing: f64) -> Result<BasisTable> {
    if !(spacing > 0.0) {
        return Err(Error::Domain(format!("spacing {spacing} must be positive")));
    }
    let v = ws.v_star();
    let run = integrate_basis(spec, v, tol, Some(spacing))?;
    let classification = LargeTimeClassification::from_basis(spec, v, run.psi0, run.dpsi0 - 0.5 * v * run.psi0);
    let (y, states): (Vec<f64>, Vec<[f64; 4]>) = run.samples.into_iter().unzip();
    Ok(BasisTable {
        y,
        psi: states.iter().map(|s| s[2]).collect(),
        dpsi: states.iter().map(|s| s[3]).collect(),
        m: run.m,
        classification,
    })
}

/// `v* + c3 t^gamma exp(-v*^2 t / 4)` with `c3 = A_L c3_over_al`, for `t > 0`.
pub fn speed_correction(cls: &LargeTimeClassification, a_l: f64, t: f64) -> f64 {
    let v = cls.v_star;
    v + a_l * cls.c3_over_al * t.powf(cls.gamma) * (-0.25 * v * v * t).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fisher_exps(v: f64) -> LargeTimeExponents {
        LargeTimeExponents::new(v, -1.0, 1.0).unwrap()
    }

    #[test]
    fn kinks_ordered() {
        let e = fisher_exps(0.558);
        assert!((e.kink_left + 2.0764).abs() < 1e-4);
        assert!(e.kink_left < e.kink_inner && e.kink_inner < 0.0);
        assert!(LargeTimeExponents::new(0.5, 0.0, 1.0).is_err());
    }

    #[test]
    fn exponent_values() {
        let v = 0.558;
        let e = fisher_exps(v);
        assert!((e.g0_right(2.0 * v) - 2.25 * v * v).abs() < 1e-14);
        assert!((e.g0_right(v) - v * v).abs() < 1e-15);
        let h = e.h_exponent(-1.0).unwrap();
        assert!((h - (0.25 * v * v + -(0.5 * v - 1.0))).abs() < 1e-15);
        assert!((h - 0.7988).abs() < 1e-4);
        assert!(e.h_exponent(0.0).is_err() && e.h_exponent(e.kink_left).is_err());
    }

    #[test]
    fn transition_layers() {
        assert_eq!(transition_right(0.4, 0.0), 0.2);
        assert_eq!(transition_left(0.3, 0.0), 0.15);
        assert!((transition_right(1.0, 2.0) - 0.078_649_603_525_142_57).abs() < 1e-15);
        assert!((transition_left(1.0, -2.0) - 0.078_649_603_525_142_57).abs() < 1e-15);
        assert!((transition_right(0.7, -40.0) - 0.7).abs() < 1e-15);
        assert!(transition_left(1.0, -40.0) > 0.0);
    }

    #[test]
    fn case_table() {
        let spec = ReactionSpec::fisher(0.5).unwrap();
        let c = LargeTimeClassification::from_basis(&spec, 0.5, 0.0, 1.0);
        assert_eq!((c.case, c.c3_over_al, c.gamma), (LargeTimeCase::II, 0.0, -1.5));
        // dphi0 chosen to cancel E4 exactly
        let phi0 = 2.0;
        let dphi0 = -phi0 * (0.25 - 0.25 / 0.25);
        let c = LargeTimeClassification::from_basis(&spec, 0.5, phi0, dphi0);
        assert_eq!((c.case, c.gamma), (LargeTimeCase::I, -0.5));
        assert_eq!(c.c3_over_al, -0.5 * 2.0 / 2.0);
        let c = LargeTimeClassification::from_basis(&spec, 0.5, 5e-8, 1.0);
        assert_eq!(c.case, LargeTimeCase::I);
        assert!(c.warning.is_some());
    }

    #[test]
    fn farfield_right_value() {
        let spec = ReactionSpec::fisher(0.5).unwrap();
        let r = farfield_exponent(&spec, 0.0, 10.0, 1.0, Side::Right).unwrap();
        assert!((r - (25.0 + 10f64.ln() + 0.5 * PI.ln())).abs() < 1e-13);
        let l = farfield_exponent(&spec, 0.0, -10.0, 1.0, Side::Left).unwrap();
        assert!((l - r - 1.0).abs() < 1e-13);
        assert!(farfield_exponent(&spec, 0.0, -1.0, 1.0, Side::Right).is_err());
        assert!(farfield_exponent(&spec, 0.0, 1.0, 0.0, Side::Right).is_err());
    }
}
