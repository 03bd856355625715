use super::{fan_out, num, opt_num, provenance, same_cutoff, ExperimentConfig, ExperimentKind, Report, Table, PTW_TOL};
use crate::harness::ReactionSelector;
use crate::ptw::{shoot_speed, WaveSolution};
use crate::qivp::{run, QivpParams};
use crate::Result;

/// Snapshot times at which the distance to the wave is measured.
pub const CONVERGENCE_TIMES: [f64; 9] = [0.5, 1.0, 2.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0];

/// Window on which the distance must decrease.
pub const DECREASING_WINDOW: (f64, f64) = (5.0, 30.0);

/// `sup_j |u_j - U_T(y_j)|` over the grid. No shift is fitted; the pinning
/// `u(0, t) = u_c` already fixes the phase.
pub fn sup_error(ws: &WaveSolution, y: &[f64], u: &[f64]) -> f64 {
    y.iter()
        .zip(u)
        .map(|(&y, &u)| (u - ws.eval(y)).abs())
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug)]
pub struct ConvergenceRow {
    pub u_c: f64,
    pub t: f64,
    pub sup_error: f64,
    pub ratio_to_previous: Option<f64>,
    /// Before `pre_asymptotic_t`; reported, never judged.
    pub pre_asymptotic: bool,
}

#[derive(Clone, Debug)]
pub struct ConvergenceSummary {
    pub u_c: f64,
    /// `e(20) / e(10)`.
    pub ratio_20_10: Option<f64>,
    /// `e` strictly decreasing over the snapshots in [`DECREASING_WINDOW`].
    pub decreasing: Option<bool>,
    /// `e(5) / e(1)`, used to compare decay between cut-offs.
    pub decay_1_5: Option<f64>,
    /// Whether this cut-off's checks count towards pass/fail.
    pub gated: bool,
    pub pass: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub provenance: Vec<(String, String)>,
    pub rows: Vec<ConvergenceRow>,
    pub summaries: Vec<ConvergenceSummary>,
    /// The largest Fisher cut-off decays more slowly over `[1, 5]` than the
    /// smallest; `None` unless both are present.
    pub slower_at_high_cutoff: Option<bool>,
}

pub fn run_ptw_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    let th = &cfg.thresholds;
    let t_final = cfg.t_final.unwrap_or(30.0);
    let times: Vec<f64> = CONVERGENCE_TIMES.iter().copied().filter(|&t| t <= t_final).collect();
    let results = fan_out(&cfg.u_c, cfg.workers, |&u_c| {
        (|| -> Result<Vec<(f64, f64)>> {
            let spec = cfg.reaction.spec(u_c)?;
            let ws = shoot_speed(&spec, PTW_TOL)?;
            let params = QivpParams::auto(spec, cfg.dy, t_final)?
                .with_front_dt(cfg.front_dt)
                .with_samples(times.clone());
            let out = run(&params)?;
            Ok(out
                .snapshots
                .iter()
                .map(|snap| (snap.t, sup_error(&ws, &out.y, &snap.u)))
                .collect())
        })()
    });

    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for (&u_c, result) in cfg.u_c.iter().zip(results) {
        let gated = cfg.convergence_gate.iter().any(|&g| same_cutoff(g, u_c));
        let errors = match result {
            Ok(e) => e,
            Err(e) => {
                summaries.push(ConvergenceSummary {
                    u_c,
                    ratio_20_10: None,
                    decreasing: None,
                    decay_1_5: None,
                    gated,
                    pass: !gated,
                    error: Some(e.to_string()),
                });
                continue;
            }
        };
        let mut previous: Option<f64> = None;
        for &(t, e) in &errors {
            rows.push(ConvergenceRow {
                u_c,
                t,
                sup_error: e,
                ratio_to_previous: previous.map(|p| e / p),
                pre_asymptotic: t < th.pre_asymptotic_t,
            });
            previous = Some(e);
        }
        let at = |t: f64| errors.iter().find(|p| (p.0 - t).abs() < 1e-6).map(|p| p.1);
        let ratio_20_10 = at(20.0).zip(at(10.0)).map(|(a, b)| a / b);
        let window: Vec<f64> = errors
            .iter()
            .filter(|p| p.0 >= DECREASING_WINDOW.0 - 1e-6 && p.0 <= DECREASING_WINDOW.1 + 1e-6)
            .filter(|p| p.0 >= th.pre_asymptotic_t)
            .map(|p| p.1)
            .collect();
        let decreasing = (window.len() >= 2).then(|| window.windows(2).all(|w| w[1] < w[0]));
        let checks_hold = ratio_20_10.is_some_and(|r| r <= th.convergence_ratio) && decreasing == Some(true);
        summaries.push(ConvergenceSummary {
            u_c,
            ratio_20_10,
            decreasing,
            decay_1_5: at(5.0).zip(at(1.0)).map(|(a, b)| a / b),
            gated,
            pass: !gated || checks_hold,
            error: None,
        });
    }

    let slower_at_high_cutoff = if cfg.reaction == ReactionSelector::Fisher && summaries.len() >= 2 {
        let lo = summaries
            .iter()
            .min_by(|a, b| a.u_c.total_cmp(&b.u_c))
            .expect("nonempty");
        let hi = summaries
            .iter()
            .max_by(|a, b| a.u_c.total_cmp(&b.u_c))
            .expect("nonempty");
        lo.decay_1_5.zip(hi.decay_1_5).map(|(l, h)| h > l)
    } else {
        None
    };
    Ok(ConvergenceReport {
        provenance: provenance(cfg),
        rows,
        summaries,
        slower_at_high_cutoff,
    })
}

impl Report for ConvergenceReport {
    fn kind(&self) -> ExperimentKind {
        ExperimentKind::PtwConvergence
    }

    fn file_name(&self) -> &'static str {
        "convergence.csv"
    }

    fn table(&self) -> Table {
        let mut t = Table::new(["u_c", "t", "sup_error", "ratio_to_previous", "pre_asymptotic"]);
        t.preamble = self.provenance.clone();
        for s in &self.summaries {
            let key = format!("result.u_c={}", s.u_c);
            let mut line = format!(
                "ratio_20_10={} decreasing={} decay_1_5={} gated={} pass={}",
                opt_num(s.ratio_20_10),
                s.decreasing.map(|b| b.to_string()).unwrap_or_default(),
                opt_num(s.decay_1_5),
                s.gated,
                s.pass
            );
            if let Some(e) = &s.error {
                line.push_str(&format!(" error={e}"));
            }
            t.note(key, line);
        }
        t.note(
            "result.slower_at_high_cutoff",
            self.slower_at_high_cutoff.map(|b| b.to_string()).unwrap_or_default(),
        );
        t.note("result.pass", self.passed());
        for r in &self.rows {
            t.push(vec![
                num(r.u_c),
                num(r.t),
                num(r.sup_error),
                opt_num(r.ratio_to_previous),
                r.pre_asymptotic.to_string(),
            ]);
        }
        t
    }

    fn passed(&self) -> bool {
        self.summaries.iter().all(|s| s.pass) && self.slower_at_high_cutoff != Some(false)
    }

    fn summary(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .summaries
            .iter()
            .map(|s| {
                if let Some(e) = &s.error {
                    return format!("u_c={:.3} FAILED: {e}", s.u_c);
                }
                let errs: Vec<String> = self
                    .rows
                    .iter()
                    .filter(|r| r.u_c == s.u_c)
                    .map(|r| format!("e({})={:.2e}", (r.t * 1e6).round() / 1e6, r.sup_error))
                    .collect();
                format!(
                    "u_c={:.3} {} | e(20)/e(10)={} decreasing={} {}",
                    s.u_c,
                    errs.join(" "),
                    s.ratio_20_10.map(|r| format!("{r:.3}")).unwrap_or_else(|| "n/a".into()),
                    s.decreasing.map(|b| b.to_string()).unwrap_or_else(|| "n/a".into()),
                    match (s.gated, s.pass) {
                        (false, _) => "(not judged)",
                        (true, true) => "ok",
                        (true, false) => "FAIL",
                    }
                )
            })
            .collect();
        if let Some(b) = self.slower_at_high_cutoff {
            out.push(format!("largest cut-off converges more slowly: {b}"));
        }
        out
    }
}
