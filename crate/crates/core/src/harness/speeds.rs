use super::{fan_out, num, opt_num, provenance, same_cutoff, ExperimentConfig, ExperimentKind, Report, Table, PTW_TOL};
use crate::asym_small::{sdot_minimum_estimate, SmallTimeCoefficients};
use crate::harness::ReactionSelector;
use crate::ptw::shoot_speed;
use crate::qivp::{run, FrontHistory, QivpParams};
use crate::{Error, Result};
use std::time::{Duration, Instant};

/// Long-time front speeds reported for the Fisher reaction.
pub const REFERENCE_SPEEDS: [(f64, f64); 3] = [(0.1, 1.248), (0.5, 0.558), (0.9, 0.100)];

/// Start of the judged part of a speed trace; earlier samples sit in the
/// start-up transient of the scheme.
pub const SDOT_START: f64 = 0.05;

pub fn reference_speed(reaction: ReactionSelector, u_c: f64) -> Option<f64> {
    match reaction {
        ReactionSelector::Fisher => REFERENCE_SPEEDS.iter().find(|p| same_cutoff(p.0, u_c)).map(|p| p.1),
        ReactionSelector::PiecewiseLinear { .. } => None,
    }
}

/// The approach to the wave is slow for large cut-offs; the long run follows
/// the longest published run.
fn speed_table_t_final(u_c: f64) -> f64 {
    if u_c >= 0.8 {
        400.0
    } else {
        30.0
    }
}

#[derive(Clone, Debug)]
pub struct SpeedRow {
    pub u_c: f64,
    pub t_final: f64,
    pub v_inf: Option<f64>,
    pub v_star: Option<f64>,
    pub abs_diff: Option<f64>,
    /// `abs_diff <= tolerance`.
    pub pass: bool,
    pub reference: Option<f64>,
    pub reference_pass: Option<bool>,
    pub error: Option<String>,
    /// Wall time of the row; not written to the CSV.
    pub elapsed: Duration,
}

/// `v_inf` from the PDE against `v*` from shooting, per cut-off.
#[derive(Clone, Debug)]
pub struct ComparisonReport {
    pub provenance: Vec<(String, String)>,
    pub tolerance: f64,
    pub reference_tolerance: f64,
    pub rows: Vec<SpeedRow>,
    /// `v_inf` strictly decreasing in `u_c`; `None` with fewer than two rows.
    pub monotone: Option<bool>,
}

pub fn run_speed_table(cfg: &ExperimentConfig) -> Result<ComparisonReport> {
    let th = &cfg.thresholds;
    let tolerance = th.speed_vs_ptw;
    let reference_tolerance = if cfg.is_fine() {
        th.speed_vs_reference_fine
    } else {
        th.speed_vs_reference_coarse
    };
    let rows = fan_out(&cfg.u_c, cfg.workers, |&u_c| {
        let clock = Instant::now();
        let t_final = cfg.t_final.unwrap_or_else(|| speed_table_t_final(u_c));
        let reference = reference_speed(cfg.reaction, u_c);
        let outcome = (|| -> Result<(f64, f64)> {
            let spec = cfg.reaction.spec(u_c)?;
            let v_star = shoot_speed(&spec, PTW_TOL)?.v_star();
            let params = QivpParams::auto(spec, cfg.dy, t_final)?.with_front_dt(cfg.front_dt);
            Ok((run(&params)?.v_inf_estimate(), v_star))
        })();
        let mut row = SpeedRow {
            u_c,
            t_final,
            v_inf: None,
            v_star: None,
            abs_diff: None,
            pass: false,
            reference,
            reference_pass: None,
            error: None,
            elapsed: Duration::ZERO,
        };
        match outcome {
            Ok((v_inf, v_star)) => {
                let diff = (v_inf - v_star).abs();
                row.v_inf = Some(v_inf);
                row.v_star = Some(v_star);
                row.abs_diff = Some(diff);
                row.pass = diff <= tolerance;
                row.reference_pass = reference.map(|p| (v_inf - p).abs() <= reference_tolerance);
            }
            Err(e) => {
                row.error = Some(e.to_string());
                row.reference_pass = reference.map(|_| false);
            }
        }
        row.elapsed = clock.elapsed();
        row
    });
    let mut ordered: Vec<(f64, f64)> = rows.iter().filter_map(|r| Some((r.u_c, r.v_inf?))).collect();
    ordered.sort_by(|a, b| a.0.total_cmp(&b.0));
    let monotone = (ordered.len() >= 2).then(|| ordered.windows(2).all(|w| w[1].1 < w[0].1));
    Ok(ComparisonReport {
        provenance: provenance(cfg),
        tolerance,
        reference_tolerance,
        rows,
        monotone,
    })
}

impl Report for ComparisonReport {
    fn kind(&self) -> ExperimentKind {
        ExperimentKind::SpeedTable
    }

    fn file_name(&self) -> &'static str {
        "speed_table.csv"
    }

    fn table(&self) -> Table {
        let mut t = Table::new([
            "u_c",
            "t_final",
            "v_inf",
            "v_star",
            "abs_diff",
            "tolerance",
            "pass",
            "reference_v_inf",
            "reference_tolerance",
            "reference_pass",
            "error",
        ]);
        t.preamble = self.provenance.clone();
        t.note("result.monotone_decreasing", fmt_opt_bool(self.monotone));
        t.note("result.pass", self.passed());
        for r in &self.rows {
            t.push(vec![
                num(r.u_c),
                num(r.t_final),
                opt_num(r.v_inf),
                opt_num(r.v_star),
                opt_num(r.abs_diff),
                num(self.tolerance),
                r.pass.to_string(),
                opt_num(r.reference),
                if r.reference.is_some() {
                    num(self.reference_tolerance)
                } else {
                    String::new()
                },
                fmt_opt_bool(r.reference_pass),
                r.error.clone().unwrap_or_default(),
            ]);
        }
        t
    }

    fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass && r.reference_pass != Some(false)) && self.monotone != Some(false)
    }

    fn summary(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .rows
            .iter()
            .map(|r| match (&r.error, r.v_inf, r.v_star) {
                (Some(e), ..) => format!("u_c={:.3} FAILED: {e}", r.u_c),
                (None, Some(vi), Some(vs)) => format!(
                    "u_c={:.3} T={} v_inf={vi:.5} v*={vs:.5} |diff|={:.2e} {}{} ({:.1}s)",
                    r.u_c,
                    r.t_final,
                    (vi - vs).abs(),
                    if r.pass { "ok" } else { "FAIL" },
                    match (r.reference, r.reference_pass) {
                        (Some(p), Some(ok)) => format!(" reference={p} {}", if ok { "ok" } else { "FAIL" }),
                        _ => String::new(),
                    },
                    r.elapsed.as_secs_f64()
                ),
                _ => unreachable!("successful rows carry both speeds"),
            })
            .collect();
        out.push(format!("v_inf decreasing in u_c: {}", fmt_opt_bool(self.monotone)));
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialSign {
    Positive,
    Flat,
    Negative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceShape {
    MonotoneDown,
    DipThenUp,
    MonotoneUp,
    Irregular,
}

impl InitialSign {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Positive => "positive",
            Self::Flat => "flat",
            Self::Negative => "negative",
        }
    }
}

impl TraceShape {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::MonotoneDown => "monotone-down",
            Self::DipThenUp => "dip-then-up",
            Self::MonotoneUp => "monotone-up",
            Self::Irregular => "irregular",
        }
    }
}

/// Summary of a front-speed trace from `t_start` on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdotTrace {
    pub initial: InitialSign,
    pub shape: TraceShape,
    pub sdot_start: f64,
    pub t_min: f64,
    pub sdot_min: f64,
    pub sdot_end: f64,
}

/// Classifies `sdot` on `[t_start, T]`. Changes of direction smaller than
/// `noise` are ignored.
pub fn classify_trace(front: &FrontHistory, t_start: f64, flat: f64, noise: f64) -> Result<SdotTrace> {
    let n = front.len();
    let k0 = front.t.iter().position(|&t| t >= t_start).unwrap_or(n);
    // the last sample only has a one-sided difference
    if n < 2 || k0 + 3 > n - 1 {
        return Err(Error::Config(format!(
            "trace has {} samples after t = {t_start}; need at least 3",
            (n - 1).saturating_sub(k0)
        )));
    }
    let v = &front.sdot[k0..n - 1];
    let (km, &vmin) = v
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    let rise = |w: &[f64]| {
        let mut lo = f64::INFINITY;
        w.iter().fold(0.0f64, |m, &x| {
            lo = lo.min(x);
            m.max(x - lo)
        })
    };
    let fall = |w: &[f64]| {
        let mut hi = f64::NEG_INFINITY;
        w.iter().fold(0.0f64, |m, &x| {
            hi = hi.max(x);
            m.max(hi - x)
        })
    };
    let (start, end) = (v[0], v[v.len() - 1]);
    let dropped = start - vmin > noise;
    let recovered = v[km..].iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x)) - vmin > noise;
    let shape = match (dropped, recovered) {
        (true, true) if rise(&v[..=km]) <= noise && fall(&v[km..]) <= noise => TraceShape::DipThenUp,
        (true, false) if rise(v) <= noise => TraceShape::MonotoneDown,
        (false, true) if fall(v) <= noise => TraceShape::MonotoneUp,
        _ => TraceShape::Irregular,
    };
    let initial = if start > flat {
        InitialSign::Positive
    } else if start < -flat {
        InitialSign::Negative
    } else {
        InitialSign::Flat
    };
    Ok(SdotTrace {
        initial,
        shape,
        sdot_start: start,
        t_min: front.t[k0 + km],
        sdot_min: vmin,
        sdot_end: end,
    })
}

/// The regime described for the Fisher reaction: positive start below one
/// half, negative above, flat at one half; monotone decrease for small
/// cut-offs, a dip up to one half, monotone increase above. `None` in the
/// loosely specified band around `u_c = 0.2`.
pub fn expected_regime(u_c: f64) -> Option<(InitialSign, TraceShape)> {
    if same_cutoff(u_c, 0.5) {
        Some((InitialSign::Flat, TraceShape::MonotoneUp))
    } else if u_c > 0.5 {
        Some((InitialSign::Negative, TraceShape::MonotoneUp))
    } else if u_c < 0.15 {
        Some((InitialSign::Positive, TraceShape::MonotoneDown))
    } else if u_c > 0.25 {
        Some((InitialSign::Positive, TraceShape::DipThenUp))
    } else {
        None
    }
}

#[derive(Clone, Debug)]
pub struct SdotRow {
    pub u_c: f64,
    pub t_final: f64,
    pub trace: Option<SdotTrace>,
    pub expected: Option<(InitialSign, TraceShape)>,
    /// Predicted time of minimum speed, when the small-time estimate applies.
    pub t_m: Option<f64>,
    /// Observed over predicted time of minimum.
    pub minimum_ratio: Option<f64>,
    pub pass: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct SdotReport {
    pub provenance: Vec<(String, String)>,
    pub rows: Vec<SdotRow>,
}

pub fn run_sdot_signs(cfg: &ExperimentConfig) -> Result<SdotReport> {
    let th = &cfg.thresholds;
    let t_final = cfg.t_final.unwrap_or(10.0);
    let rows = fan_out(&cfg.u_c, cfg.workers, |&u_c| {
        let outcome = (|| -> Result<(SdotTrace, Option<f64>)> {
            let spec = cfg.reaction.spec(u_c)?;
            let coeffs = SmallTimeCoefficients::compute(&spec)?;
            let t_m = sdot_minimum_estimate(&coeffs).filter(|m| m.reliable).map(|m| m.t_m);
            let params = QivpParams::auto(spec, cfg.dy, t_final)?.with_front_dt(cfg.front_dt);
            let trace = classify_trace(&run(&params)?.front, SDOT_START, th.sdot_flat, th.sdot_noise)?;
            Ok((trace, t_m))
        })();
        let expected = expected_regime(u_c);
        match outcome {
            Ok((trace, t_m)) => {
                let minimum_ratio = match (trace.shape, t_m) {
                    (TraceShape::DipThenUp, Some(t_m)) => Some(trace.t_min / t_m),
                    _ => None,
                };
                let regime_ok = expected.is_none_or(|(i, s)| trace.initial == i && trace.shape == s);
                let minimum_ok = minimum_ratio.is_none_or(|r| r <= th.minimum_factor && r >= 1.0 / th.minimum_factor);
                SdotRow {
                    u_c,
                    t_final,
                    trace: Some(trace),
                    expected,
                    t_m,
                    minimum_ratio,
                    pass: regime_ok && minimum_ok,
                    error: None,
                }
            }
            Err(e) => SdotRow {
                u_c,
                t_final,
                trace: None,
                expected,
                t_m: None,
                minimum_ratio: None,
                pass: false,
                error: Some(e.to_string()),
            },
        }
    });
    Ok(SdotReport {
        provenance: provenance(cfg),
        rows,
    })
}

fn regime_label(r: Option<(InitialSign, TraceShape)>) -> String {
    r.map(|(i, s)| format!("{}/{}", i.as_str(), s.as_str()))
        .unwrap_or_default()
}

fn fmt_opt_bool(b: Option<bool>) -> String {
    b.map(|b| b.to_string()).unwrap_or_default()
}

impl Report for SdotReport {
    fn kind(&self) -> ExperimentKind {
        ExperimentKind::SdotSigns
    }

    fn file_name(&self) -> &'static str {
        "sdot_signs.csv"
    }

    fn table(&self) -> Table {
        let mut t = Table::new([
            "u_c",
            "t_final",
            "sdot_start",
            "t_min",
            "sdot_min",
            "sdot_end",
            "regime",
            "expected",
            "t_m_estimate",
            "minimum_ratio",
            "pass",
            "error",
        ]);
        t.preamble = self.provenance.clone();
        t.note("result.t_start", SDOT_START);
        t.note("result.pass", self.passed());
        for r in &self.rows {
            let tr = r.trace;
            t.push(vec![
                num(r.u_c),
                num(r.t_final),
                opt_num(tr.map(|x| x.sdot_start)),
                opt_num(tr.map(|x| x.t_min)),
                opt_num(tr.map(|x| x.sdot_min)),
                opt_num(tr.map(|x| x.sdot_end)),
                regime_label(tr.map(|x| (x.initial, x.shape))),
                regime_label(r.expected),
                opt_num(r.t_m),
                opt_num(r.minimum_ratio),
                r.pass.to_string(),
                r.error.clone().unwrap_or_default(),
            ]);
        }
        t
    }

    fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    fn summary(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| match (&r.error, r.trace) {
                (Some(e), _) => format!("u_c={:.3} FAILED: {e}", r.u_c),
                (None, Some(tr)) => format!(
                    "u_c={:.3} sdot({SDOT_START})={:+.4} min {:.4} at t={:.3} -> {}, expected {}{} {}",
                    r.u_c,
                    tr.sdot_start,
                    tr.sdot_min,
                    tr.t_min,
                    regime_label(Some((tr.initial, tr.shape))),
                    regime_label(r.expected),
                    r.minimum_ratio
                        .map(|x| format!(", t_min/t_m={x:.2}"))
                        .unwrap_or_default(),
                    if r.pass { "ok" } else { "FAIL" }
                ),
                _ => unreachable!("rows without error carry a trace"),
            })
            .collect()
    }
}
