use hover_sim::scenario::Plant;
use hover_sim::{nominal_config, sweep, SweepParam};

#[test]
fn failures_are_recorded_and_rows_keep_their_order() {
    let mut base = nominal_config(0.1);
    base.run.periods = 1.0;
    base.run.plant = Plant::Linear;
    // dv_min above dv_max is rejected by validation
    let rows = sweep(&base, SweepParam::DeadZone, &[1e-3, 5.0, 2e-3], 2).unwrap();
    assert_eq!(rows.iter().map(|r| r.value).collect::<Vec<_>>(), vec![1e-3, 5.0, 2e-3]);
    assert!(rows[0].outcome.is_ok() && rows[2].outcome.is_ok());
    assert!(rows[1].outcome.is_err());
    assert!(sweep(&base, SweepParam::Eccentricity, &[], 1).is_err());
}

#[test]
fn sweep_points_equal_single_runs() {
    let mut base = nominal_config(0.0);
    base.run.periods = 1.0;
    base.run.plant = Plant::Linear;
    let rows = sweep(&base, SweepParam::Saturation, &[0.05], 1).unwrap();
    let single = hover_sim::run_closed_loop(&SweepParam::Saturation.apply(&base, 0.05).validate().unwrap()).unwrap();
    assert_eq!(rows[0].outcome.as_ref().unwrap(), &single.metrics);
}
