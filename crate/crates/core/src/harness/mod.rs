//! Experiment driver. Each experiment takes an [`ExperimentConfig`], fans
//! the cut-offs out over a bounded pool of worker threads, and reduces the
//! results into a report that renders as a versioned CSV file.
//!
//! Reports contain no timings or other run-dependent data, so re-running a
//! config on the same build reproduces its CSV byte for byte.

mod config;
mod convergence;
mod largetime;
mod smalltime;
mod speeds;
mod table;

pub use config::{ExperimentConfig, ExperimentKind, ReactionSelector, Thresholds};
pub use convergence::{run_ptw_convergence, sup_error, ConvergenceReport, ConvergenceRow, ConvergenceSummary};
pub use largetime::{run_classification_sweep, ClassificationReport, ClassificationRow};
pub use smalltime::{
    fit_front, run_smalltime_fit, FitRow, FrontFit, SmalltimeFitReport, FIT_WINDOW, REFERENCE_S1_HALF,
};
pub use speeds::{
    classify_trace, expected_regime, reference_speed, run_sdot_signs, run_speed_table, ComparisonReport, InitialSign,
    SdotReport, SdotRow, SdotTrace, SpeedRow, TraceShape, REFERENCE_SPEEDS, SDOT_START,
};
pub use table::{build_id, num, opt_num, Table, SCHEMA_VERSION};

use crate::Result;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Tolerance of the wave-speed shooting used by every experiment.
pub const PTW_TOL: f64 = 1e-10;

/// ODE tolerance of the basis problem.
pub const BASIS_TOL: f64 = 1e-13;

/// Common surface of every experiment's report.
pub trait Report: Send {
    fn kind(&self) -> ExperimentKind;

    /// CSV file name inside the output directory.
    fn file_name(&self) -> &'static str;

    fn table(&self) -> Table;

    /// True when every judged row and summary check passes.
    fn passed(&self) -> bool;

    /// Human-readable one-line-per-row summary.
    fn summary(&self) -> Vec<String>;

    fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(self.file_name());
        self.table().write(&path)?;
        Ok(path)
    }
}

/// Runs the experiment named by `cfg.kind`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Box<dyn Report>> {
    cfg.validate()?;
    Ok(match cfg.kind {
        ExperimentKind::SpeedTable => Box::new(run_speed_table(cfg)?),
        ExperimentKind::SdotSigns => Box::new(run_sdot_signs(cfg)?),
        ExperimentKind::SmalltimeFit => Box::new(run_smalltime_fit(cfg)?),
        ExperimentKind::PtwConvergence => Box::new(run_ptw_convergence(cfg)?),
        ExperimentKind::ClassificationSweep => Box::new(run_classification_sweep(cfg)?),
    })
}

/// Provenance lines shared by every report.
pub(crate) fn provenance(cfg: &ExperimentConfig) -> Vec<(String, String)> {
    let mut p = vec![("build".to_owned(), build_id())];
    p.extend(cfg.provenance());
    p
}

/// Maps `f` over `items` on at most `workers` threads (0 means the available
/// parallelism). Output order matches input order.
pub(crate) fn fan_out<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let workers = match workers {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        n => n,
    }
    .min(items.len())
    .max(1);
    if workers == 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= items.len() {
                    break;
                }
                let r = f(&items[k]);
                slots.lock().expect("worker panicked")[k] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect()
}

/// Same cut-off up to round-off in a config file.
pub(crate) fn same_cutoff(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fan_out_keeps_order() {
        let items: Vec<u64> = (0..37).collect();
        for workers in [0, 1, 3, 64] {
            let out = fan_out(&items, workers, |&k| k * k);
            assert_eq!(out, items.iter().map(|k| k * k).collect::<Vec<_>>());
        }
        assert!(fan_out(&[] as &[u8], 4, |&k| k).is_empty());
    }
}
