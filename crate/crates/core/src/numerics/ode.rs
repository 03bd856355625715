//! Dormand-Prince 5(4) integration with event location and exact sampling.

use crate::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Which sign changes of an event function count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Crossing {
    Rising,
    Falling,
    Either,
}

impl Crossing {
    fn fires(self, before: f64, after: f64) -> bool {
        let rising = before < 0.0 && after >= 0.0;
        let falling = before > 0.0 && after <= 0.0;
        match self {
            Crossing::Rising => rising,
            Crossing::Falling => falling,
            Crossing::Either => rising || falling,
        }
    }
}

pub type EventFn<'a, const N: usize> = Box<dyn Fn(f64, &[f64; N]) -> f64 + 'a>;

/// A scalar event function `g(x, y)` watched for sign changes.
pub struct Event<'a, const N: usize> {
    pub tag: &'static str,
    pub g: EventFn<'a, N>,
    pub crossing: Crossing,
    pub terminal: bool,
}

impl<'a, const N: usize> Event<'a, N> {
    pub fn new(tag: &'static str, crossing: Crossing, terminal: bool, g: impl Fn(f64, &[f64; N]) -> f64 + 'a) -> Self {
        Self {
            tag,
            g: Box::new(g),
            crossing,
            terminal,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EventHit<const N: usize> {
    pub index: usize,
    pub tag: &'static str,
    pub at: f64,
    pub state: [f64; N],
}

#[derive(Clone, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step magnitude; estimated from the right-hand side when `None`.
    pub first_step: Option<f64>,
    pub max_step: f64,
    pub max_steps: usize,
    /// Bracket width at which event bisection stops.
    pub event_tol: f64,
    /// Fail with [`Error::NoEvent`] when no terminal event fires.
    pub require_event: bool,
    /// Record every accepted step in the solution.
    pub keep_steps: bool,
    /// Abscissae at which the state is reported exactly, ordered in the
    /// direction of integration.
    pub samples: Vec<f64>,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            first_step: None,
            max_step: f64::INFINITY,
            max_steps: 10_000_000,
            event_tol: 1e-12,
            require_event: false,
            keep_steps: true,
            samples: Vec::new(),
        }
    }
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self::with_tol(1e-10)
    }
}

#[derive(Clone, Debug)]
pub struct OdeSolution<const N: usize> {
    /// Accepted step ends (when kept) starting from the initial point.
    pub abscissae: Vec<f64>,
    pub states: Vec<[f64; N]>,
    /// States at the requested sample abscissae reached before termination.
    pub sample_abscissae: Vec<f64>,
    pub sample_states: Vec<[f64; N]>,
    /// Non-terminal event crossings in order of occurrence.
    pub crossings: Vec<EventHit<N>>,
    pub terminal_event: Option<EventHit<N>>,
    /// End point reached and its state.
    pub end: f64,
    pub end_state: [f64; N],
    pub steps: usize,
}

struct Stepper<F, const N: usize> {
    rhs: F,
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut s = 0.0;
        for (c, k) in terms {
            s += c * k[i];
        }
        out[i] += h * s;
    }
    out
}

impl<F: FnMut(f64, &[f64; N]) -> [f64; N], const N: usize> Stepper<F, N> {
    /// One Dormand-Prince step of size `h` from `(x, y)` with `k1 = f(x, y)`.
    /// Returns the fifth-order state, the error vector and `f` at the new
    /// point.
    fn step(&mut self, x: f64, y: &[f64; N], k1: &[f64; N], h: f64) -> ([f64; N], [f64; N], [f64; N]) {
        let f = &mut self.rhs;
        let k2 = f(x + C2 * h, &axpy(y, h, &[(A21, k1)]));
        let k3 = f(x + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
        let k4 = f(x + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            x + C5 * h,
            &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            x + h,
            &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = axpy(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(x + h, &y_new);
        let mut err = [0.0; N];
        for i in 0..N {
            err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        (y_new, err, k7)
    }

    fn state_at(&mut self, x: f64, y: &[f64; N], k1: &[f64; N], h: f64) -> [f64; N] {
        if h == 0.0 {
            *y
        } else {
            self.step(x, y, k1, h).0
        }
    }
}

fn error_norm<const N: usize>(err: &[f64; N], y0: &[f64; N], y1: &[f64; N], opts: &OdeOptions) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        let scale = opts.atol + opts.rtol * y0[i].abs().max(y1[i].abs());
        let r = err[i] / scale;
        s += r * r;
    }
    (s / N as f64).sqrt()
}

/// Integrates `y' = rhs(x, y)` from `span.0` towards `span.1` (either
/// direction).
///
/// Events are sampled at accepted steps; a firing event is located by
/// bisection in `x`, each trial point obtained by re-stepping from the start
/// of the accepted step. Sample abscissae are reached the same way, so their
/// states carry single-step accuracy.
pub fn ode_integrate<const N: usize, F>(
    rhs: F,
    y0: [f64; N],
    span: (f64, f64),
    opts: &OdeOptions,
    events: &[Event<'_, N>],
) -> Result<OdeSolution<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let (x0, x_end) = span;
    let dir = if x_end >= x0 { 1.0 } else { -1.0 };
    let mut st = Stepper { rhs };
    let mut x = x0;
    let mut y = y0;
    let mut k1 = (st.rhs)(x, &y);

    let mut sol = OdeSolution {
        abscissae: vec![x0],
        states: vec![y0],
        sample_abscissae: Vec::new(),
        sample_states: Vec::new(),
        crossings: Vec::new(),
        terminal_event: None,
        end: x0,
        end_state: y0,
        steps: 0,
    };
    let mut next_sample = 0;
    while next_sample < opts.samples.len() && (opts.samples[next_sample] - x0) * dir < 0.0 {
        next_sample += 1;
    }
    let mut g_prev: Vec<f64> = events.iter().map(|e| (e.g)(x, &y)).collect();

    let span_len = (x_end - x0).abs();
    let mut h = match opts.first_step {
        Some(h) => h.abs(),
        None => {
            let d0 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            let d1 = k1.iter().map(|v| v * v).sum::<f64>().sqrt();
            let guess = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
            guess.min(opts.rtol.max(1e-14).powf(0.2) * 0.1 * span_len.max(1e-6))
        }
    }
    .min(opts.max_step)
    .min(span_len);

    while (x_end - x) * dir > 0.0 {
        if sol.steps >= opts.max_steps {
            return Err(Error::TooManySteps(opts.max_steps));
        }
        let remaining = (x_end - x).abs();
        let last = h >= remaining;
        let hs = if last { remaining } else { h } * dir;
        if hs.abs() < 1e-14 * x.abs().max(1.0) && !last {
            return Err(Error::StepUnderflow { at: x, step: hs.abs() });
        }
        let (y_new, err, k_new) = st.step(x, &y, &k1, hs);
        let e = error_norm(&err, &y, &y_new, opts);
        if !(e <= 1.0) {
            let factor = if e.is_finite() {
                (0.9 * e.powf(-0.2)).max(0.2)
            } else {
                0.2
            };
            h = hs.abs() * factor;
            if h < 1e-14 * x.abs().max(1.0) {
                return Err(Error::StepUnderflow { at: x, step: h });
            }
            continue;
        }
        sol.steps += 1;
        let x_new = if last { x_end } else { x + hs };

        // events: first firing one in the direction of integration wins
        let mut terminal: Option<(f64, usize)> = None;
        let mut fired: Vec<(f64, usize)> = Vec::new();
        let g_new: Vec<f64> = events.iter().map(|ev| (ev.g)(x_new, &y_new)).collect();
        for (i, ev) in events.iter().enumerate() {
            if !ev.crossing.fires(g_prev[i], g_new[i]) {
                continue;
            }
            let (mut lo, mut hi) = (0.0, hs);
            while (hi - lo).abs() > opts.event_tol {
                let mid = 0.5 * (lo + hi);
                let ym = st.state_at(x, &y, &k1, mid);
                if ev.crossing.fires(g_prev[i], (ev.g)(x + mid, &ym)) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            if ev.terminal {
                if terminal.is_none_or(|(t, _)| hi.abs() < t.abs()) {
                    terminal = Some((hi, i));
                }
            } else {
                fired.push((hi, i));
            }
        }
        let stop_at = terminal.map(|(t, _)| t);
        fired.retain(|(t, _)| stop_at.is_none_or(|s| t.abs() <= s.abs()));
        fired.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()));
        for (t, i) in fired {
            let state = st.state_at(x, &y, &k1, t);
            sol.crossings.push(EventHit {
                index: i,
                tag: events[i].tag,
                at: x + t,
                state,
            });
        }

        let reach = stop_at.map_or(x_new, |t| x + t);
        while next_sample < opts.samples.len() && (reach - opts.samples[next_sample]) * dir >= 0.0 {
            let xs = opts.samples[next_sample];
            let ys = if xs == x_new && stop_at.is_none() {
                y_new
            } else {
                st.state_at(x, &y, &k1, xs - x)
            };
            sol.sample_abscissae.push(xs);
            sol.sample_states.push(ys);
            next_sample += 1;
        }

        if let Some((t, i)) = terminal {
            let state = st.state_at(x, &y, &k1, t);
            let at = x + t;
            sol.terminal_event = Some(EventHit {
                index: i,
                tag: events[i].tag,
                at,
                state,
            });
            if opts.keep_steps && at != x {
                sol.abscissae.push(at);
                sol.states.push(state);
            }
            sol.end = at;
            sol.end_state = state;
            return Ok(sol);
        }

        x = x_new;
        y = y_new;
        k1 = k_new;
        g_prev = g_new;
        if opts.keep_steps {
            sol.abscissae.push(x);
            sol.states.push(y);
        }
        let factor = if e == 0.0 {
            5.0
        } else {
            (0.9 * e.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = (hs.abs() * factor).min(opts.max_step);
    }

    sol.end = x;
    sol.end_state = y;
    if opts.require_event {
        return Err(Error::NoEvent { at: x });
    }
    Ok(sol)
}
