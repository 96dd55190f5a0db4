use gramspec::estimator::Method;
use gramspec::harness::{
    coupled_rate, run_experiment, run_experiment_with_threads, summarize, summary_median,
    write_records_csv, write_summary_csv, ExperimentKind, ExperimentSpec, TrialRecord,
};
use gramspec::Error;

fn matrix_spec() -> ExperimentSpec {
    ExperimentSpec {
        d1: Some(20),
        d2: Some(60),
        r: Some(2),
        sigma: Some(0.5),
        trials: 3,
        seed: 5,
        ..ExperimentSpec::new(ExperimentKind::MatrixSweepP, vec![0.2, 0.5])
    }
}

#[test]
fn record_count_is_values_trials_methods_metrics() {
    let mut spec = matrix_spec();
    spec.methods = vec![Method::Vanilla, Method::DiagonalDeleted];
    let records = run_experiment(&spec).unwrap();
    let metrics = ExperimentKind::MatrixSweepP.metrics(false).len();
    assert_eq!(records.len(), 2 * 3 * 2 * metrics);
    assert_eq!(records[0].value, 0.2);
    assert_eq!(records[0].method, Method::DiagonalDeleted);
    assert!(records.iter().all(|r| r.experiment == "matrix_sweep_p" && r.param == "p"));
    assert!(records.iter().all(|r| r.result.is_some_and(f64::is_finite)));

    spec.include_bounds = true;
    let with_bounds = run_experiment(&spec).unwrap();
    assert_eq!(with_bounds.len(), 2 * 3 * 2 * (metrics + 1));
}

#[test]
fn every_kind_runs_at_small_scale() {
    let specs = [
        r#"{"kind":"matrix_sweep_d2","d1":10,"r":1,"sigma":0.1,"values":[20,40],"trials":2}"#,
        r#"{"kind":"matrix_sweep_sigma","d1":10,"d2":30,"r":1,"p":0.5,"values":[0,1],"trials":2}"#,
        r#"{"kind":"tensor_sweep_p","d":8,"r":2,"sigma":0.1,"values":[0.5,1],"trials":2}"#,
        r#"{"kind":"tensor_sweep_sigma","d":8,"r":2,"p":0.5,"values":[0,1],"trials":2}"#,
        r#"{"kind":"cov_sweep_p","d":10,"r":2,"n":50,"sigma":1,"values":[0.5,1],"trials":2}"#,
        r#"{"kind":"cov_sweep_n","d":10,"r":2,"p":0.5,"sigma":1,"values":[50,100],"trials":2}"#,
        r#"{"kind":"cov_sweep_sigma","d":10,"r":2,"n":50,"p":0.5,"values":[0,1],"trials":2}"#,
        r#"{"kind":"bsbm_sweep_a","nu":10,"nv":100,"b":0.5,"values":[1,3],"trials":2}"#,
        r#"{"kind":"bsbm_sweep_nv","nu":10,"a":3,"b":0.5,"values":[100,200],"trials":2,"centering":"edge_density"}"#,
    ];
    for text in specs {
        let spec = ExperimentSpec::from_json(text).unwrap();
        let records = run_experiment(&spec).unwrap();
        assert_eq!(records.len(), 2 * 2 * spec.kind.metrics(false).len(), "{text}");
    }
}

#[test]
fn spec_parsing_rejects_bad_input() {
    let bad = [
        r#"{"kind":"matrix_sweep_p","d1":20,"d2":60,"r":2,"sigma":0,"values":[]}"#,
        r#"{"kind":"matrix_sweep_p","d1":20,"d2":60,"r":2,"sigma":0,"values":[0.5,0.2]}"#,
        r#"{"kind":"matrix_sweep_p","d1":20,"d2":60,"r":2,"sigma":0,"values":[0.5],"trials":0}"#,
        r#"{"kind":"matrix_sweep_p","d1":20,"d2":60,"r":2,"values":[0.5]}"#,
        r#"{"kind":"matrix_sweep_p","d1":20,"d2":60,"r":2,"sigma":0,"values":[1.5]}"#,
        r#"{"kind":"matrix_sweep_p","d1":20,"d2":60,"r":2,"sigma":0,"values":[0.5],"colour":1}"#,
        r#"{"kind":"cov_sweep_n","d":10,"r":2,"p":0.5,"sigma":1,"values":[10.5]}"#,
        r#"{"kind":"bsbm_sweep_a","nu":11,"nv":100,"b":0.5,"values":[1]}"#,
        r#"{"kind":"nope","values":[1]}"#,
    ];
    for text in bad {
        assert!(matches!(ExperimentSpec::from_json(text), Err(Error::ConfigInvalid(_))), "{text}");
    }
    let ok = ExperimentSpec::from_json(r#"{"kind":"matrix_sweep_p","d1":20,"d2":60,"r":2,"sigma":0,"values":[0.5]}"#).unwrap();
    assert_eq!((ok.trials, ok.seed), (100, 0));
    assert_eq!(ok.methods, vec![Method::DiagonalDeleted]);
}

#[test]
fn coupled_rate_formula() {
    let want = 2.0 * 4.0 * 1100f64.ln() / (100.0f64 * 1000.0).sqrt();
    assert!((coupled_rate(4, 100, 1000) - want).abs() < 1e-15);
    assert_eq!(coupled_rate(4, 2, 3), 1.0);
}

#[test]
fn results_are_independent_of_thread_count() {
    let spec = matrix_spec();
    let one = run_experiment_with_threads(&spec, 1).unwrap();
    let three = run_experiment_with_threads(&spec, 3).unwrap();
    assert_eq!(one, three);
    let mut spec2 = spec.clone();
    spec2.seed += 1;
    assert_ne!(run_experiment(&spec2).unwrap(), one);
}

fn record(value: f64, trial: usize, result: Option<f64>) -> TrialRecord {
    TrialRecord {
        experiment: "matrix_sweep_p",
        param: "p",
        value,
        trial,
        method: Method::DiagonalDeleted,
        metric: "err_spec",
        result,
    }
}

#[test]
fn summaries_skip_missing_values() {
    let records = vec![
        record(0.1, 0, Some(1.0)),
        record(0.1, 1, Some(3.0)),
        record(0.1, 2, None),
        record(0.1, 3, Some(2.0)),
        record(0.2, 0, None),
    ];
    let rows = summarize(&records);
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0].count, rows[0].na_count), (3, 1));
    assert_eq!(rows[0].mean, Some(2.0));
    assert_eq!(rows[0].median, Some(2.0));
    assert_eq!(rows[0].std, Some(1.0));
    assert_eq!((rows[1].count, rows[1].na_count, rows[1].mean), (0, 1, None));
    assert_eq!(summary_median(&rows, 0.1, Method::DiagonalDeleted, "err_spec"), Some(2.0));
    assert_eq!(summary_median(&rows, 0.1, Method::Vanilla, "err_spec"), None);

    let mut buf = Vec::new();
    write_records_csv(&mut buf, &records).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "experiment,param,value,trial,method,metric,result");
    assert_eq!(lines[1], "matrix_sweep_p,p,0.1,0,diagonal_deleted,err_spec,1");
    assert_eq!(lines[3], "matrix_sweep_p,p,0.1,2,diagonal_deleted,err_spec,NA");

    let mut buf = Vec::new();
    write_summary_csv(&mut buf, &rows).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(2).unwrap().contains("NA"));
}
