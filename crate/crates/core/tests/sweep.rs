use esfcheck::sweep::{run, IntRange, RunOptions, SweepReport, SweepSpec};
use esfcheck::Error;

fn box_spec() -> SweepSpec {
    let mut spec = SweepSpec::custom(IntRange::new(1, 2).unwrap(), IntRange::new(1, 3).unwrap(), 120, Some(6)).unwrap();
    spec.checkpoint_every = 20;
    spec
}

/// Everything except timing and resume bookkeeping.
fn outcome(r: &SweepReport) -> String {
    let mut v = serde_json::to_value(r).unwrap();
    let obj = v.as_object_mut().unwrap();
    obj.remove("wall_time_ms");
    obj.remove("resumed_from");
    v.to_string()
}

#[test]
fn interrupted_run_resumes_to_the_same_report() {
    let fresh = run(&box_spec(), &RunOptions::default()).unwrap();
    assert!(fresh.passed());

    let dir = tempfile::tempdir().unwrap();
    let mut spec = box_spec();
    spec.checkpoint_path = Some(dir.path().to_path_buf());

    let partial = run(&spec, &RunOptions { jobs: 1, stop_after_checkpoints: Some(4) }).unwrap();
    assert!(!partial.complete);
    assert!(!partial.passed());
    assert!(partial.theorem_inconsistent.is_empty());

    let resumed = run(&spec, &RunOptions { jobs: 1, stop_after_checkpoints: None }).unwrap();
    assert!(resumed.complete);
    assert!(resumed.resumed_from.is_some());
    assert_eq!(outcome(&resumed), outcome(&fresh));

    // a finished directory replays without recomputation
    let again = run(&spec, &RunOptions::default()).unwrap();
    assert_eq!(outcome(&again), outcome(&fresh));
}

#[test]
fn checkpoint_dir_rejects_a_different_spec() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = box_spec();
    spec.checkpoint_path = Some(dir.path().to_path_buf());
    run(&spec, &RunOptions::default()).unwrap();

    let mut other = spec.clone();
    other.n_max = 121;
    match run(&other, &RunOptions::default()) {
        Err(Error::Checkpoint(_)) => {}
        r => panic!("expected checkpoint error, got {:?}", r.map(|r| r.complete)),
    }
}

#[test]
fn job_count_does_not_change_the_report() {
    let one = run(&box_spec(), &RunOptions { jobs: 1, stop_after_checkpoints: None }).unwrap();
    let three = run(&box_spec(), &RunOptions { jobs: 3, stop_after_checkpoints: None }).unwrap();
    assert_eq!(outcome(&one), outcome(&three));
}

#[test]
fn custom_box_hits_match_exception_set() {
    let r = run(&box_spec(), &RunOptions::default()).unwrap();
    let cells: Vec<_> = r.integer_hits.iter().map(|h| (h.a, h.b, h.n, h.k)).collect();
    assert_eq!(cells, vec![(1, 1, 1, 1), (1, 1, 3, 2), (2, 1, 1, 1)]);
    assert!(r.matches_prediction);
    assert!(r.cross_checks > 0);
    assert!(r.certificate_checks > 0);
    assert_eq!(r.cells_checked, 6 * (6 * 7 / 2 + 6 * (120 - 6)));
}
