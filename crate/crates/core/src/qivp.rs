//! Explicit moving-boundary solver in the front-attached frame.
//!
//! Solves `u_t - s'(t) u_y = u_yy + f_c(u)` on `[-M_left, M_right]` with the
//! front pinned at the grid node `y_I = 0` (`u = u_c` there). The front speed
//! enters linearly, so each step is one scalar solve for `dS` followed by an
//! explicit sweep.

use crate::ptw::{lambda_plus, wave_speed};
use crate::reaction::{ReactionKind, ReactionSpec};
use crate::{Error, Result};

/// Grid spacing of the desk-scale grid.
pub const COARSE_DY: f64 = 0.02;
/// Grid spacing of the reference grid.
pub const FINE_DY: f64 = 5e-3;
/// Ratio `dt / dy^2`.
pub const DEFAULT_MU: f64 = 0.4;
/// Largest `exp(lambda_+ y_0)` and `exp(-v* y_end)` the auto extents allow.
pub const TRUNCATION_LEVEL: f64 = 5e-5;
/// Steps counted as the start-up transient, during which the pinned front
/// node may push neighbours outside `[0, 1]`; bounds are enforced after it.
pub const TRANSIENT_STEPS: usize = 50;

#[derive(Clone, Debug)]
pub struct QivpParams {
    pub dy: f64,
    pub dt: f64,
    pub m_left: f64,
    pub m_right: f64,
    pub t_final: f64,
    pub reaction: ReactionSpec,
    /// Profile snapshot times; each is taken at the nearest step.
    pub sample_times: Vec<f64>,
    /// Time between front-history samples.
    pub front_dt: f64,
}

impl QivpParams {
    /// Parameters with `dt = 0.4 dy^2` and explicit extents.
    pub fn new(reaction: ReactionSpec, dy: f64, m_left: f64, m_right: f64, t_final: f64) -> Self {
        Self {
            dy,
            dt: DEFAULT_MU * dy * dy,
            m_left,
            m_right,
            t_final,
            reaction,
            sample_times: Vec::new(),
            front_dt: 0.01,
        }
    }

    /// Parameters with extents from the wave's decay rates, see
    /// [`auto_extents`].
    pub fn auto(reaction: ReactionSpec, dy: f64, t_final: f64) -> Result<Self> {
        let (m_left, m_right) = auto_extents(&reaction, dy)?;
        Ok(Self::new(reaction, dy, m_left, m_right, t_final))
    }

    pub fn with_samples(mut self, times: Vec<f64>) -> Self {
        self.sample_times = times;
        self
    }

    pub fn with_front_dt(mut self, front_dt: f64) -> Self {
        self.front_dt = front_dt;
        self
    }

    pub fn mu(&self) -> f64 {
        self.dt / (self.dy * self.dy)
    }

    /// `(I, I + 𝓘)`: front index and last node index.
    pub fn layout(&self) -> Result<(usize, usize)> {
        let left = self.m_left / self.dy;
        let right = self.m_right / self.dy;
        let (i_front, extra) = (left.round(), right.round());
        if (left - i_front).abs() > 1e-9 * left.max(1.0) || (right - extra).abs() > 1e-9 * right.max(1.0) {
            return Err(Error::Config(format!(
                "extents {} and {} are not multiples of dy = {}, so y = 0 is not a node",
                self.m_left, self.m_right, self.dy
            )));
        }
        if i_front < 3.0 || extra < 3.0 {
            return Err(Error::Config("each side of the front needs at least 3 nodes".into()));
        }
        Ok((i_front as usize, i_front as usize + extra as usize))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dy > 0.0 && self.dt > 0.0 && self.t_final >= 0.0 && self.front_dt > 0.0) {
            return Err(Error::Config(
                "dy, dt and front_dt must be positive, T non-negative".into(),
            ));
        }
        if self.dt > 0.5 * self.dy * self.dy {
            return Err(Error::Config(format!(
                "dt = {} exceeds the explicit limit 0.5 dy^2 = {}",
                self.dt,
                0.5 * self.dy * self.dy
            )));
        }
        self.layout().map(|_| ())
    }

    /// Grid abscissae `y_i = -M_left + i dy`.
    pub fn grid(&self) -> Result<Vec<f64>> {
        let (i_front, last) = self.layout()?;
        Ok((0..=last).map(|i| (i as f64 - i_front as f64) * self.dy).collect())
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// Extents `M_left = ln(1/level) / lambda_+` and `M_right = ln(1/level) / v*`
/// rounded up to whole multiples of `dy`.
pub fn auto_extents(reaction: &ReactionSpec, dy: f64) -> Result<(f64, f64)> {
    let v = wave_speed(reaction, 1e-10)?;
    let lp = lambda_plus(v, reaction.f_prime_at_1());
    let depth = (1.0 / TRUNCATION_LEVEL).ln();
    let round_up = |x: f64| (x / dy).ceil() * dy;
    Ok((round_up(depth / lp), round_up(depth / v)))
}

/// Solver state: concentrations on the grid, front position and step count.
#[derive(Clone, Debug)]
pub struct QivpState {
    u: Vec<f64>,
    next: Vec<f64>,
    i_front: usize,
    s: f64,
    j: usize,
    mu: f64,
    nu: f64,
    dt: f64,
    reaction: ReactionSpec,
}

impl QivpState {
    /// Discrete Heaviside data: 1 left of the front node, 0 from it on.
    pub fn init(params: &QivpParams) -> Result<Self> {
        params.validate()?;
        let (i_front, last) = params.layout()?;
        let mut u = vec![0.0; last + 1];
        u[..i_front].fill(1.0);
        Ok(Self {
            next: u.clone(),
            u,
            i_front,
            s: 0.0,
            j: 0,
            mu: params.mu(),
            nu: 1.0 / (2.0 * params.dy),
            dt: params.dt,
            reaction: params.reaction.clone(),
        })
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn front_index(&self) -> usize {
        self.i_front
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn step_index(&self) -> usize {
        self.j
    }

    pub fn time(&self) -> f64 {
        self.j as f64 * self.dt
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Advances one step and returns `dS`.
    pub fn step(&mut self) -> Result<f64> {
        let u_c = self.reaction.u_c();
        match self.reaction.kind() {
            ReactionKind::Fisher => self.step_with(move |u| if u > u_c { u * (1.0 - u) } else { 0.0 }),
            ReactionKind::PiecewiseLinear { lambda } => {
                // admissible cut-offs sit on the linear branch
                self.step_with(move |u| if u > u_c { lambda * (1.0 - u) } else { 0.0 })
            }
        }
    }

    #[inline(always)]
    fn step_with<F: Fn(f64) -> f64>(&mut self, f_c: F) -> Result<f64> {
        let (mu, nu, dt) = (self.mu, self.nu, self.dt);
        let u_c = self.reaction.u_c();
        let i = self.i_front;
        let u = &self.u;
        let gap = u[i + 2] - u[i - 2];
        if gap.abs() < 1e-12 {
            return Err(Error::FrontDegeneracy { step: self.j, gap });
        }
        let a = |k: usize| u[k] + mu * (u[k + 1] - 2.0 * u[k] + u[k - 1]) + dt * f_c(u[k]);
        let ds = (2.0 * u_c - a(i + 1) - a(i - 1)) / (nu * gap);
        let c = nu * ds;

        let n = u.len();
        let outside = sweep_dispatch(u, &mut self.next, mu, dt, c, &f_c);
        self.next[i] = u_c;
        self.next[0] = 1.0;
        self.next[n - 1] = 0.0;
        std::mem::swap(&mut self.u, &mut self.next);
        self.s += ds;
        self.j += 1;

        if outside && self.j > TRANSIENT_STEPS {
            let (node, value) = self
                .u
                .iter()
                .enumerate()
                .find(|(_, &v)| !(-1e-6..=1.0 + 1e-6).contains(&v))
                .map(|(k, &v)| (k, v))
                .unwrap_or((0, f64::NAN));
            return Err(Error::Stability {
                step: self.j,
                node,
                value,
            });
        }
        Ok(ds)
    }
}

/// Interior update `U_i + mu (U_{i+1} - 2U_i + U_{i-1}) + dt f_c(U_i) +
/// c (U_{i+1} - U_{i-1})`; returns whether any value left `[-1e-6, 1 + 1e-6]`.
#[inline(always)]
#[allow(clippy::manual_range_contains)]
fn sweep<F: Fn(f64) -> f64>(u: &[f64], next: &mut [f64], mu: f64, dt: f64, c: f64, f_c: &F) -> bool {
    let n = u.len();
    let mut outside = false;
    for (out, w) in next[1..n - 1].iter_mut().zip(u.windows(3)) {
        let (l, m, r) = (w[0], w[1], w[2]);
        let v = m + mu * (r - 2.0 * m + l) + dt * f_c(m) + c * (r - l);
        // non-short-circuit, keeps the loop vectorised
        outside |= (v < -1e-6) | (v > 1.0 + 1e-6);
        *out = v;
    }
    outside
}

// Same arithmetic with wider vectors; no FMA, so results are bit-identical.
#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn sweep_avx2<F: Fn(f64) -> f64>(u: &[f64], next: &mut [f64], mu: f64, dt: f64, c: f64, f_c: &F) -> bool {
    sweep(u, next, mu, dt, c, f_c)
}

#[inline(always)]
fn sweep_dispatch<F: Fn(f64) -> f64>(u: &[f64], next: &mut [f64], mu: f64, dt: f64, c: f64, f_c: &F) -> bool {
    #[cfg(target_arch = "x86_64")]
    {
        if std::is_x86_feature_detected!("avx2") {
            // SAFETY: the feature was detected at runtime
            return unsafe { sweep_avx2(u, next, mu, dt, c, f_c) };
        }
    }
    sweep(u, next, mu, dt, c, f_c)
}

/// Sampled front positions with centred-difference speeds.
#[derive(Clone, Debug, Default)]
pub struct FrontHistory {
    pub t: Vec<f64>,
    pub s: Vec<f64>,
    pub sdot: Vec<f64>,
}

impl FrontHistory {
    pub fn from_samples(t: Vec<f64>, s: Vec<f64>) -> Self {
        let n = t.len();
        let sdot = (0..n)
            .map(|k| {
                if n < 2 {
                    return f64::NAN;
                }
                let (a, b) = (k.saturating_sub(1), (k + 1).min(n - 1));
                (s[b] - s[a]) / (t[b] - t[a])
            })
            .collect();
        Self { t, s, sdot }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Mean of `sdot` over the final 10% of samples.
    pub fn v_inf_estimate(&self) -> f64 {
        let n = self.len();
        let k = (n / 10).max(1).min(n);
        self.sdot[n - k..].iter().sum::<f64>() / k as f64
    }

    /// `sdot` at the sample nearest to `t`.
    pub fn sdot_at(&self, t: f64) -> f64 {
        let k = self
            .t
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(k, _)| k)
            .unwrap_or(0);
        self.sdot[k]
    }
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct QivpRun {
    pub params: QivpParams,
    pub y: Vec<f64>,
    pub i_front: usize,
    pub snapshots: Vec<Snapshot>,
    pub front: FrontHistory,
    pub steps: usize,
}

impl QivpRun {
    pub fn v_inf_estimate(&self) -> f64 {
        self.front.v_inf_estimate()
    }
}

/// Advances to `T`, recording snapshots and the front history. The front
/// history starts at `t = 0` and is sampled every `front_dt` (rounded to whole
/// steps).
pub fn run(params: &QivpParams) -> Result<QivpRun> {
    run_with(params, |_| Ok(()))
}

/// [`run`] with a hook called after every step.
pub fn run_with<H>(params: &QivpParams, mut hook: H) -> Result<QivpRun>
where
    H: FnMut(&QivpState) -> Result<()>,
{
    let mut state = QivpState::init(params)?;
    let y = params.grid()?;
    let steps = params.steps();
    let stride = ((params.front_dt / params.dt).round() as usize).max(1);

    let mut wanted: Vec<(usize, f64)> = params
        .sample_times
        .iter()
        .map(|&t| (((t / params.dt).round() as usize).min(steps), t))
        .collect();
    wanted.sort_by_key(|a| a.0);
    let mut snapshots = Vec::with_capacity(wanted.len());
    let mut next_snap = 0;
    let take = |state: &QivpState, snapshots: &mut Vec<Snapshot>, next: &mut usize| {
        while *next < wanted.len() && wanted[*next].0 == state.step_index() {
            snapshots.push(Snapshot {
                t: state.time(),
                u: state.u().to_vec(),
            });
            *next += 1;
        }
    };
    take(&state, &mut snapshots, &mut next_snap);

    let mut t = vec![0.0];
    let mut s = vec![0.0];
    for _ in 0..steps {
        state.step()?;
        hook(&state)?;
        if state.step_index() % stride == 0 {
            t.push(state.time());
            s.push(state.s());
        }
        take(&state, &mut snapshots, &mut next_snap);
    }
    Ok(QivpRun {
        params: params.clone(),
        y,
        i_front: state.front_index(),
        snapshots,
        front: FrontHistory::from_samples(t, s),
        steps,
    })
}

/// Sign of the centred-difference front speed at `t_small` on a grid of
/// spacing `dy`.
pub fn sdot_sign_probe(reaction: &ReactionSpec, t_small: f64, dy: f64) -> Result<f64> {
    let dt = DEFAULT_MU * dy * dy;
    if t_small < 50.0 * dt {
        return Err(Error::Config(format!(
            "t_small = {t_small} is inside the start-up transient (< 50 dt = {})",
            50.0 * dt
        )));
    }
    // far fields are irrelevant this early; a few diffusion lengths suffice
    let extent = ((8.0 * t_small.sqrt()).max(1.0) / dy).ceil() * dy;
    let params = QivpParams::new(reaction.clone(), dy, extent, extent, 2.0 * t_small).with_front_dt(t_small / 10.0);
    let run = run(&params)?;
    Ok(run.front.sdot_at(t_small).signum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small(u_c: f64) -> QivpParams {
        QivpParams::new(ReactionSpec::fisher(u_c).unwrap(), 0.005, 2.0, 2.0, 0.0)
    }

    #[test]
    fn heaviside_initial_data() {
        let st = QivpState::init(&small(0.3)).unwrap();
        let i = st.front_index();
        assert_eq!(i, 400);
        assert!(st.u()[..i].iter().all(|&v| v == 1.0));
        assert!(st.u()[i..].iter().all(|&v| v == 0.0));
        assert_eq!(st.s(), 0.0);
        assert_eq!(st.u(), QivpState::init(&small(0.8)).unwrap().u());
    }

    #[test]
    fn first_step_front_jump() {
        for u_c in [0.1, 0.5, 0.9] {
            let mut st = QivpState::init(&small(u_c)).unwrap();
            let ds = st.step().unwrap();
            let mu = st.mu();
            assert_abs_diff_eq!(mu, 0.4, epsilon = 1e-15);
            assert_abs_diff_eq!(ds, (1.0 - mu - 2.0 * u_c) * 2.0 * 0.005, epsilon = 1e-15);
            let i = st.front_index();
            assert_abs_diff_eq!(st.u()[i + 1] + st.u()[i - 1], 2.0 * u_c, epsilon = 1e-15);
            assert_eq!(st.u()[i], u_c);
        }
        let mut st = QivpState::init(&small(0.5)).unwrap();
        assert_abs_diff_eq!(st.step().unwrap(), -0.004, epsilon = 1e-15);
    }

    #[test]
    fn layout_requires_node_at_front() {
        let mut p = small(0.5);
        p.m_left = 2.0012;
        assert!(matches!(QivpState::init(&p), Err(Error::Config(_))));
        let mut p = small(0.5);
        p.dt = 0.6 * p.dy * p.dy;
        assert!(matches!(p.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn history_differences() {
        let t: Vec<f64> = (0..11).map(|k| k as f64 * 0.1).collect();
        let s: Vec<f64> = t.iter().map(|t| t * t).collect();
        let h = FrontHistory::from_samples(t.clone(), s);
        assert_abs_diff_eq!(h.sdot[5], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(h.v_inf_estimate(), 1.9, epsilon = 1e-12);
        assert_abs_diff_eq!(h.sdot_at(0.31), 0.6, epsilon = 1e-12);
    }

    #[test]
    fn snapshots_at_nearest_steps() {
        let p = small(0.5).with_samples(vec![0.0, 0.01, 0.02]);
        let p = QivpParams { t_final: 0.02, ..p };
        let r = run(&p).unwrap();
        assert_eq!(r.snapshots.len(), 3);
        assert_eq!(r.snapshots[0].t, 0.0);
        assert_abs_diff_eq!(r.snapshots[2].t, 0.02, epsilon = 1e-12);
        assert_eq!(r.y[r.i_front], 0.0);
        assert_eq!(r.front.t.len(), 3);
    }
}
