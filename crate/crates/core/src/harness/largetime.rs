use super::{fan_out, num, opt_num, provenance, ExperimentConfig, ExperimentKind, Report, Table, BASIS_TOL, PTW_TOL};
use crate::asym_large::{solve_basis, LargeTimeCase, LargeTimeClassification};
use crate::harness::ReactionSelector;
use crate::ptw::shoot_speed;
use crate::Result;

#[derive(Clone, Debug)]
pub struct ClassificationRow {
    pub u_c: f64,
    pub classification: Option<LargeTimeClassification>,
    pub pass: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ClassificationReport {
    pub provenance: Vec<(String, String)>,
    pub rows: Vec<ClassificationRow>,
}

/// Fisher is expected in case (I) with `gamma = -3/2` throughout; the pwl
/// example is judged against its closed-form basis function.
pub fn run_classification_sweep(cfg: &ExperimentConfig) -> Result<ClassificationReport> {
    let tol = cfg.thresholds.basis_closed_form;
    let rows = fan_out(&cfg.u_c, cfg.workers, |&u_c| {
        let outcome = (|| -> Result<LargeTimeClassification> {
            let spec = cfg.reaction.spec(u_c)?;
            let ws = shoot_speed(&spec, PTW_TOL)?;
            solve_basis(&spec, &ws, BASIS_TOL)
        })();
        match outcome {
            Ok(c) => {
                let pass = c.warning.is_none()
                    && match cfg.reaction {
                        ReactionSelector::Fisher => c.case == LargeTimeCase::I && c.gamma == -1.5,
                        ReactionSelector::PiecewiseLinear { lambda } => {
                            (c.phi_plus_0 - 1.0).abs() <= tol
                                && (c.dphi_plus_0 - (lambda.sqrt() - 0.5 * c.v_star)).abs() <= tol
                        }
                    };
                ClassificationRow {
                    u_c,
                    classification: Some(c),
                    pass,
                    error: None,
                }
            }
            Err(e) => ClassificationRow {
                u_c,
                classification: None,
                pass: false,
                error: Some(e.to_string()),
            },
        }
    });
    Ok(ClassificationReport {
        provenance: provenance(cfg),
        rows,
    })
}

fn case_name(c: LargeTimeCase) -> &'static str {
    match c {
        LargeTimeCase::I => "I",
        LargeTimeCase::II => "II",
    }
}

impl Report for ClassificationReport {
    fn kind(&self) -> ExperimentKind {
        ExperimentKind::ClassificationSweep
    }

    fn file_name(&self) -> &'static str {
        "classification.csv"
    }

    fn table(&self) -> Table {
        let mut t = Table::new([
            "u_c",
            "v_star",
            "phi0",
            "dphi0",
            "E4_over_AL",
            "c3_over_AL",
            "case",
            "gamma",
            "warning",
            "pass",
            "error",
        ]);
        t.preamble = self.provenance.clone();
        t.note("result.pass", self.passed());
        for r in &self.rows {
            let c = r.classification.as_ref();
            t.push(vec![
                num(r.u_c),
                opt_num(c.map(|c| c.v_star)),
                opt_num(c.map(|c| c.phi_plus_0)),
                opt_num(c.map(|c| c.dphi_plus_0)),
                opt_num(c.map(|c| c.e4_over_al)),
                opt_num(c.map(|c| c.c3_over_al)),
                c.map(|c| case_name(c.case).to_owned()).unwrap_or_default(),
                opt_num(c.map(|c| c.gamma)),
                c.and_then(|c| c.warning.clone()).unwrap_or_default(),
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
            .map(|r| match (&r.error, &r.classification) {
                (Some(e), _) => format!("u_c={:.3} FAILED: {e}", r.u_c),
                (None, Some(c)) => format!(
                    "u_c={:.3} v*={:.5} phi+(0)={:+.6} phi+'(0)={:+.6} E4/A_L={:+.6} c3/A_L={:+.6} case {} gamma={} {}{}",
                    r.u_c,
                    c.v_star,
                    c.phi_plus_0,
                    c.dphi_plus_0,
                    c.e4_over_al,
                    c.c3_over_al,
                    case_name(c.case),
                    c.gamma,
                    if r.pass { "ok" } else { "FAIL" },
                    c.warning.as_ref().map(|w| format!(" [{w}]")).unwrap_or_default()
                ),
                _ => unreachable!("rows without error carry a classification"),
            })
            .collect()
    }
}
