//! Permanent-form travelling waves of the cut-off problem.
//!
//! Ahead of the front (`y >= 0`) the wave is `u_c exp(-v* y)`. Behind it the
//! profile solves `U'' + v U' + f(U) = 0` and connects `(u_c, -v u_c)` at
//! `y = 0` to the saddle `(1, 0)`. Both the shooting and the tabulation work
//! with the deficit `w = 1 - U`, which keeps relative accuracy in the tail
//! where `1 - U` is far below machine epsilon of `U`.

use crate::numerics::{bisect_classified, ode_integrate, Crossing, Event, OdeOptions};
use crate::reaction::{ReactionKind, ReactionSpec};
use crate::{Error, Result};

/// Controls for [`shoot_speed_with`].
#[derive(Clone, Debug)]
pub struct ShootingOptions {
    /// Lower edge of the speed bracket; the upper edge is 2.
    pub eps_v: f64,
    /// Overshoot/turn-back margin around `U = 1`.
    pub eps_ov: f64,
    /// Backward integration limit.
    pub y_max: f64,
    pub ode_tol: f64,
    /// Deficit `1 - U` at which the tabulated trajectory leaves the saddle.
    pub tail_deficit: f64,
    /// Spacing of the tabulated profile.
    pub spacing: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            eps_v: 1e-4,
            eps_ov: 1e-9,
            y_max: 200.0,
            ode_tol: 1e-13,
            tail_deficit: 1e-10,
            spacing: 1e-3,
        }
    }
}

/// How a backward trajectory from the front misses the saddle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Misfire {
    /// `U` passes above 1: the trial speed is too large.
    Overshoot,
    /// `U'` changes sign below 1: the trial speed is too small.
    TurnBack,
}

#[derive(Clone, Debug)]
pub struct WaveSolution {
    v_star: f64,
    u_c: f64,
    m: f64,
    lambda_plus: f64,
    a_minus_inf: f64,
    spacing: f64,
    y: Vec<f64>,
    u: Vec<f64>,
    du: Vec<f64>,
}

impl WaveSolution {
    pub fn v_star(&self) -> f64 {
        self.v_star
    }

    pub fn u_c(&self) -> f64 {
        self.u_c
    }

    /// Left truncation depth: the profile is tabulated on `[-M, 0]`.
    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn lambda_plus(&self) -> f64 {
        self.lambda_plus
    }

    pub fn a_minus_inf(&self) -> f64 {
        self.a_minus_inf
    }

    /// Tabulation abscissae, increasing from `-M` to `0`.
    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn du(&self) -> &[f64] {
        &self.du
    }

    /// `U_T(y)` for any `y`: the analytic branch ahead of the front, cubic
    /// Hermite interpolation on the table, and the exponential tail beyond
    /// `-M`.
    pub fn eval(&self, y: f64) -> f64 {
        self.eval_with_slope(y).0
    }

    /// `(U_T(y), U_T'(y))`.
    pub fn eval_with_slope(&self, y: f64) -> (f64, f64) {
        if y >= 0.0 {
            let u = wave_right(self.v_star, self.u_c, y);
            return (u, -self.v_star * u);
        }
        if y <= -self.m {
            let deficit = self.a_minus_inf * (self.lambda_plus * y).exp();
            return (1.0 - deficit, -self.lambda_plus * deficit);
        }
        let n = self.y.len();
        let pos = (y + self.m) / self.spacing;
        let i = (pos.floor() as usize).min(n - 2);
        let h = self.y[i + 1] - self.y[i];
        let t = (y - self.y[i]) / h;
        let (u0, u1) = (self.u[i], self.u[i + 1]);
        let (d0, d1) = (self.du[i] * h, self.du[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let u =
            (2.0 * t3 - 3.0 * t2 + 1.0) * u0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * u1 + (t3 - t2) * d1;
        let du = ((6.0 * t2 - 6.0 * t) * u0
            + (3.0 * t2 - 4.0 * t + 1.0) * d0
            + (-6.0 * t2 + 6.0 * t) * u1
            + (3.0 * t2 - 2.0 * t) * d1)
            / h;
        (u, du)
    }

    /// Leading-order far-field deficit `A_{-inf} exp(lambda_+ y)`.
    pub fn tail_deficit(&self, y: f64) -> f64 {
        self.a_minus_inf * (self.lambda_plus * y).exp()
    }
}

/// The branch ahead of the front, `u_c exp(-v* y)`.
pub fn wave_right(v_star: f64, u_c: f64, y: f64) -> f64 {
    u_c * (-v_star * y).exp()
}

/// Positive root of `r^2 + v r + f'(1) = 0`.
pub fn lambda_plus(v: f64, f_prime_at_1: f64) -> f64 {
    debug_assert!(f_prime_at_1 < 0.0);
    0.5 * (-v + (v * v - 4.0 * f_prime_at_1).sqrt())
}

/// Exact speed for the piecewise-linear reaction.
pub fn pwl_speed(lambda: f64, u_c: f64) -> Result<f64> {
    ReactionSpec::piecewise_linear(lambda, u_c)?;
    Ok(lambda.sqrt() * (1.0 - u_c) / u_c.sqrt())
}

/// Exact wave for the piecewise-linear reaction.
pub fn wave_closed_form_pwl(lambda: f64, u_c: f64, y: f64) -> Result<f64> {
    let v = pwl_speed(lambda, u_c)?;
    if y >= 0.0 {
        Ok(wave_right(v, u_c, y))
    } else {
        let lp = lambda_plus(v, -lambda);
        Ok(1.0 - (1.0 - u_c) * (lp * y).exp())
    }
}

/// `(w, w')' = (w', f(1 - w) - v w')` with `f(1 - w) = w f(U) / (1 - U)`.
fn deficit_rhs(spec: &ReactionSpec, v: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
    move |_, s| {
        let w = s[0];
        [s[1], w * spec.f_over_deficit(1.0 - w) - v * s[1]]
    }
}

/// Integrates backward from the front at trial speed `v` and reports which
/// way the trajectory misses the saddle.
pub fn classify(spec: &ReactionSpec, v: f64, opts: &ShootingOptions) -> Result<Misfire> {
    let eps = opts.eps_ov;
    let u_c = spec.u_c();
    let events = [
        Event::new("overshoot", Crossing::Rising, true, move |_, s: &[f64; 2]| -s[0] - eps),
        Event::new("turn-back", Crossing::Rising, true, move |_, s: &[f64; 2]| {
            if s[0] > eps {
                -s[1]
            } else {
                -1.0
            }
        }),
    ];
    let ode = OdeOptions {
        keep_steps: false,
        ..OdeOptions::with_tol(opts.ode_tol)
    };
    let sol = ode_integrate(
        deficit_rhs(spec, v),
        [1.0 - u_c, v * u_c],
        (0.0, -opts.y_max),
        &ode,
        &events,
    )?;
    match sol.terminal_event {
        Some(hit) if hit.index == 0 => Ok(Misfire::Overshoot),
        Some(_) => Ok(Misfire::TurnBack),
        None => Err(Error::Inconclusive { v, y_max: opts.y_max }),
    }
}

/// Wave speed and profile with default shooting options.
pub fn shoot_speed(spec: &ReactionSpec, tol: f64) -> Result<WaveSolution> {
    shoot_speed_with(spec, tol, &ShootingOptions::default())
}

/// Bisects the speed on `(eps_v, 2)` to width `tol`, then tabulates the
/// profile by integrating off the saddle's unstable manifold at that speed.
pub fn shoot_speed_with(spec: &ReactionSpec, tol: f64, opts: &ShootingOptions) -> Result<WaveSolution> {
    if !(tol >= 1e-12) {
        return Err(Error::Domain(format!("shooting tolerance {tol} below 1e-12")));
    }
    let v_star = bisect_classified(
        |v| Ok(classify(spec, v, opts)? == Misfire::Overshoot),
        opts.eps_v,
        2.0,
        tol,
    )
    .map_err(|e| match e {
        Error::Bracket { lo, hi } => Error::Shooting(format!(
            "classifier does not change over ({lo}, {hi}) for {}",
            spec.name()
        )),
        other => other,
    })?;
    tabulate(spec, v_star, opts)
}

/// Builds the [`WaveSolution`] for a known speed.
pub fn tabulate(spec: &ReactionSpec, v_star: f64, opts: &ShootingOptions) -> Result<WaveSolution> {
    let u_c = spec.u_c();
    let lp = lambda_plus(v_star, spec.f_prime_at_1());
    let eps = opts.tail_deficit;
    let start = [eps, lp * eps];
    let target = 1.0 - u_c;
    let front = || {
        [Event::new("front", Crossing::Rising, true, move |_, s: &[f64; 2]| {
            s[0] - target
        })]
    };
    let mut ode = OdeOptions {
        atol: opts.ode_tol * eps,
        keep_steps: false,
        require_event: true,
        ..OdeOptions::with_tol(opts.ode_tol)
    };
    let span = (0.0, 10.0 * opts.y_max);
    let first = ode_integrate(deficit_rhs(spec, v_star), start, span, &ode, &front())?;
    let hit = first.terminal_event.expect("required event").at;

    let h = opts.spacing;
    let k_max = (hit / h).floor() as usize;
    ode.samples = (0..=k_max).rev().map(|k| hit - k as f64 * h).collect();
    let second = ode_integrate(deficit_rhs(spec, v_star), start, span, &ode, &front())?;
    let n = second.sample_abscissae.len();
    if n != k_max + 1 {
        return Err(Error::Shooting(format!(
            "tabulation reached {n} of {} samples",
            k_max + 1
        )));
    }
    let mut y = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    let mut du = Vec::with_capacity(n);
    for (k, s) in second.sample_states.iter().enumerate() {
        y.push(-((k_max - k) as f64) * h);
        u.push(1.0 - s[0]);
        du.push(-s[1]);
    }
    u[n - 1] = u_c;
    let mut ws = WaveSolution {
        v_star,
        u_c,
        m: k_max as f64 * h,
        lambda_plus: lp,
        a_minus_inf: f64::NAN,
        spacing: h,
        y,
        u,
        du,
    };
    ws.a_minus_inf = extract_a_minus_inf(&ws)?;
    Ok(ws)
}

/// Spread of the window estimates, relative to their mean, above which the
/// tail is rejected.
pub const TAIL_SPREAD_LIMIT: f64 = 0.01;

/// Tail amplitude from the average of `(1 - U) exp(-lambda_+ y)` over
/// `[-M, -M + dW]`, with the window split into five sub-windows whose
/// estimates must agree to within [`TAIL_SPREAD_LIMIT`].
pub fn extract_a_minus_inf(ws: &WaveSolution) -> Result<f64> {
    let (a, spread) = tail_window_estimate(ws)?;
    if spread >= TAIL_SPREAD_LIMIT {
        return Err(Error::TailNotAsymptotic { spread });
    }
    Ok(a)
}

/// `(mean, relative spread)` of the sub-window tail estimates.
pub fn tail_window_estimate(ws: &WaveSolution) -> Result<(f64, f64)> {
    let deficit_limit = 1e-6;
    if !(1.0 - ws.u[0] < deficit_limit) {
        return Err(Error::TailNotAsymptotic { spread: f64::INFINITY });
    }
    // the window stays where the deficit is below 1e-6
    let last =
        ws.u.iter()
            .position(|&u| 1.0 - u >= deficit_limit)
            .unwrap_or(ws.u.len());
    let width = (last / 5).max(1);
    let mut estimates = Vec::with_capacity(5);
    for w in 0..5 {
        let lo = w * width;
        let hi = ((w + 1) * width).min(last.max(1));
        if lo >= hi {
            break;
        }
        let mean = (lo..hi)
            .map(|i| (1.0 - ws.u[i]) * (-ws.lambda_plus * ws.y[i]).exp())
            .sum::<f64>()
            / (hi - lo) as f64;
        estimates.push(mean);
    }
    let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
    let (lo, hi) = estimates
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &e| (a.min(e), b.max(e)));
    Ok((mean, (hi - lo) / mean))
}

/// Closed-form speed when one exists, else shooting.
pub fn wave_speed(spec: &ReactionSpec, tol: f64) -> Result<f64> {
    match spec.kind() {
        ReactionKind::PiecewiseLinear { lambda } => pwl_speed(lambda, spec.u_c()),
        ReactionKind::Fisher => Ok(shoot_speed(spec, tol)?.v_star()),
    }
}
