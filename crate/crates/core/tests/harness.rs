use cutoff_kpp::harness::{
    run_experiment, run_speed_table, ExperimentConfig, ExperimentKind, ReactionSelector, SCHEMA_VERSION,
};
use proptest::prelude::*;

fn short_speed_table() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(ExperimentKind::SpeedTable);
    cfg.u_c = vec![0.3, 0.5, 0.7];
    cfg.t_final = Some(2.0);
    cfg
}

#[test]
fn csv_is_byte_reproducible_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for (k, workers) in [1, 3, 1].into_iter().enumerate() {
        let mut cfg = short_speed_table();
        cfg.workers = workers;
        let report = run_experiment(&cfg).unwrap();
        let path = report.write(&dir.path().join(k.to_string())).unwrap();
        files.push(std::fs::read(path).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(files[0], files[2]);
    let text = String::from_utf8(files.remove(0)).unwrap();
    assert!(text.starts_with(&format!("# schema={SCHEMA_VERSION}\n# build=")));
    assert!(text.contains("# t_final=2\n") && text.contains("# threshold.speed_vs_ptw=0.01\n"));
}

#[test]
fn provenance_reparses_to_the_same_config() {
    let cfg = short_speed_table();
    let report = run_experiment(&cfg).unwrap();
    let table = report.table();
    let text: String = table
        .preamble
        .iter()
        .filter(|(k, _)| k != "build" && !k.starts_with("result."))
        .map(|(k, v)| format!("{k}={v}\n"))
        .collect();
    assert_eq!(ExperimentConfig::parse(&text).unwrap(), cfg);
}

#[test]
fn empty_cutoff_list_gives_empty_passing_report() {
    for kind in ExperimentKind::ALL {
        let mut cfg = ExperimentConfig::new(kind);
        cfg.u_c.clear();
        let report = run_experiment(&cfg).unwrap();
        assert!(report.passed(), "{}", kind.as_str());
        assert!(report.table().rows.is_empty());
    }
}

#[test]
fn failed_rows_do_not_stop_the_run() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::SmalltimeFit);
    cfg.u_c = vec![0.5];
    cfg.dy = 0.02;
    // the fit window is never reached
    cfg.t_final = Some(0.005);
    let report = run_experiment(&cfg).unwrap();
    assert!(!report.passed());
    assert_eq!(report.table().rows.len(), 1);
    assert!(report.summary()[0].contains("FAILED"));
}

#[test]
fn speed_rows_judge_against_wave_speed() {
    let mut cfg = short_speed_table();
    cfg.u_c = vec![0.5];
    cfg.t_final = Some(20.0);
    let report = run_speed_table(&cfg).unwrap();
    let row = &report.rows[0];
    assert_eq!(row.pass, row.abs_diff.unwrap() <= report.tolerance);
    assert!(row.pass, "{row:?}");
    assert_eq!(row.reference, Some(0.558));

    cfg.reaction = ReactionSelector::PiecewiseLinear { lambda: 1.0 };
    cfg.u_c = vec![0.8];
    cfg.thresholds.speed_vs_ptw = 0.0;
    let strict = run_speed_table(&cfg).unwrap();
    assert!(!strict.rows[0].pass && strict.rows[0].reference.is_none());
}

proptest! {
    #[test]
    fn config_text_round_trips(
        u_c in proptest::collection::vec(0.01f64..0.99, 0..5),
        dy in 1e-3f64..0.1,
        t_final in proptest::option::of(0.1f64..500.0),
        kind in 0usize..5,
        tol in 1e-9f64..1.0,
    ) {
        let mut cfg = ExperimentConfig::new(ExperimentKind::ALL[kind]);
        cfg.u_c = u_c;
        cfg.dy = dy;
        cfg.t_final = t_final;
        cfg.thresholds.speed_vs_ptw = tol;
        prop_assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }
}
