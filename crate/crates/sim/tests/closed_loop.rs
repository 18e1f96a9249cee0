use hover_core::controller::reference_state;
use hover_core::dynamics::d_to_cartesian;
use hover_sim::closed_loop::impulse_contract_violations;
use hover_sim::scenario::Plant;
use hover_sim::{nominal_config, run_closed_loop, Phase, RunOutput, Scenario, ScenarioConfig};

fn run(cfg: &ScenarioConfig) -> (Scenario, RunOutput) {
    let sc = cfg.validate().unwrap();
    let out = run_closed_loop(&sc).unwrap();
    (sc, out)
}

fn short(e: f64) -> ScenarioConfig {
    let mut c = nominal_config(e);
    c.run.periods = 2.0;
    c
}

/// Starts the chaser on the most interior admissible periodic orbit.
fn start_inside(c: &mut ScenarioConfig) {
    let sc = c.validate().unwrap();
    let d = reference_state(&sc.orbit, &sc.hover_box).unwrap();
    let x = d_to_cartesian(&d, sc.nu0, &sc.orbit).to_vector();
    c.initial.state = std::array::from_fn(|i| x[i]);
}

#[test]
fn identical_configs_give_identical_logs() {
    let c = short(0.36);
    let (_, a) = run(&c);
    let (_, b) = run(&c);
    assert_eq!(a.log, b.log);
    assert_eq!(a.metrics, b.metrics);
}

#[test]
fn undisturbed_hovering_needs_no_control() {
    for &e in &[0.0, 0.6] {
        let mut c = nominal_config(e);
        c.run.plant = Plant::Linear;
        start_inside(&mut c);
        let (_, out) = run(&c);
        assert_eq!(out.log.hover_start, Some(0));
        assert_eq!(out.metrics.n_impulses, 0);
        assert_eq!(out.metrics.box_satisfaction, 100.0);
        assert!(out.log.impulses.is_empty());
    }
}

#[test]
fn bookkeeping_flags_and_contracts_hold() {
    for &e in &[0.36, 0.6] {
        let (sc, out) = run(&short(e));
        let hover: Vec<_> = out.log.impulses.iter().filter(|i| i.phase == Phase::Hover).collect();
        let fuel: f64 = hover.iter().map(|i| i.dv[0].abs() + i.dv[1].abs() + i.dv[2].abs()).sum();
        assert_eq!(fuel, out.metrics.fuel_j);
        assert_eq!(hover.len(), out.metrics.n_impulses);
        for s in &out.log.samples {
            assert_eq!(s.in_box, sc.hover_box.contains(&[s.x[0], s.x[1], s.x[2]]));
        }
        for ev in &out.log.impulses {
            let v = impulse_contract_violations(ev, &sc, sc.trigger.tol_periodicity);
            assert!(v.is_empty(), "e={e}, sample {}: {v:?}", ev.sample);
        }
    }
}

#[test]
fn samples_follow_the_anomaly_schedule() {
    let (sc, out) = run(&short(0.3));
    let step = sc.trigger.delta_nu_sample;
    for w in out.log.samples.windows(2) {
        let d = w[1].nu - w[0].nu;
        assert!((d - step).abs() < 2e-3 * step.max(1.0), "Δν = {d}");
    }
}

#[test]
fn hovering_lasts_the_requested_periods() {
    let (sc, out) = run(&short(0.0));
    let start = out.log.hover_start.unwrap();
    let hover = out.log.samples.len() - start;
    let expected = (sc.periods * std::f64::consts::TAU / sc.trigger.delta_nu_sample).round() as usize + 1;
    assert_eq!(hover, expected);
    assert!(out.log.samples[..start].iter().all(|s| s.phase == Phase::Approach));
    assert!(out.log.samples[start..].iter().all(|s| s.phase == Phase::Hover));
}

#[test]
fn scenario_round_trips_through_toml() {
    let c = nominal_config(0.12);
    let text = c.to_toml_string();
    assert_eq!(ScenarioConfig::from_toml_str(&text).unwrap(), c);
    assert!(ScenarioConfig::from_toml_str(&text.replace("[run]", "[run]\nbogus = 1")).is_err());
}
