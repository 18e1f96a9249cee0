mod support;

use hover_core::admissible::{is_admissible, is_admissible_xz, is_admissible_y};
use hover_core::controller::{
    entry_state, estimate_threshold_bounds_with_grid, evaluate_trigger, fallback_maneuver, plane_fires, reference_state,
    solve_coupled,
};
use hover_core::dynamics::{apply_impulse, propagate_d};
use hover_core::reachability::{reach_xz, reach_y};
use hover_core::{ControlDecision, DState, FallbackConfig, Plane, ThrusterLimits, TriggerConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;
use support::{in_plane_gap, nominal_box, orbit, out_of_plane_gap};

fn limits() -> ThrusterLimits<f64> {
    ThrusterLimits::new(1e-3, 0.1).unwrap()
}

fn scene(rng: &mut ChaCha8Rng, centre: &DState<f64>) -> (DState<f64>, f64) {
    let half = [0.2, 30.0, 30.0, 60.0, 35.0, 35.0];
    let d = DState::new(std::array::from_fn(|i| centre.0[i] + half[i] * rng.random_range(-1.0..1.0)));
    (d, rng.random_range(0.0..TAU))
}

#[test]
fn solvers_match_brute_force_grid() {
    let bx = nominal_box();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (mut n_y, mut n_xz) = (0, 0);
    while n_y < 60 || n_xz < 60 {
        let e = [0.0, 0.3, 0.6][rng.random_range(0..3)];
        let o = orbit(e);
        let (d, nu) = scene(&mut rng, &reference_state(&o, &bx).unwrap());
        if let Some(c) = out_of_plane_gap(&d, nu, &o, &bx, &limits(), 100_000) {
            assert!(c.solver_cost <= c.grid_cost + 1e-9, "{c:?}");
            assert!(c.grid_cost - c.solver_cost <= c.resolution + 1e-9, "{c:?}");
            n_y += 1;
        }
        if let Some(c) = in_plane_gap(&d, nu, &o, &bx, &limits(), 100_000) {
            assert!(c.solver_cost <= c.grid_cost + 1e-8, "{c:?}");
            assert!(c.grid_cost - c.solver_cost <= c.resolution + 1e-8, "{c:?}");
            n_xz += 1;
        }
    }
}

#[test]
fn coupled_impulse_lands_both_planes() {
    let bx = nominal_box();
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let mut landed = 0;
    for _ in 0..300 {
        let e = [0.0, 0.3, 0.6][rng.random_range(0..3)];
        let o = orbit(e);
        let (d, nu) = scene(&mut rng, &reference_state(&o, &bx).unwrap());
        let Ok(sol) = solve_coupled(&d, nu, &o, &bx, &limits()) else { continue };
        let after = apply_impulse(&d, nu, &sol.impulse.dv, &o);
        assert!(limits().admits(sol.impulse.norm2()));
        assert!(after.d0().abs() < 1e-9);
        assert!(is_admissible_xz(&after.xz(), &bx, e, 1e-9));
        if !sol.deferred_out_of_plane {
            assert!(is_admissible_y(&after.y(), &bx, e));
            landed += 1;
        }
    }
    assert!(landed > 10);
}

#[test]
fn fallback_reaches_reference_under_linear_dynamics() {
    let bx = nominal_box();
    let cfg = FallbackConfig { spacing: 30f64.to_radians(), limits: ThrusterLimits::new(1e-6, 100.0).unwrap() };
    for &e in &[0.0, 0.3, 0.6] {
        let o = orbit(e);
        let target = reference_state(&o, &bx).unwrap();
        let d = DState::new([2.0, 40.0, -30.0, 400.0, 60.0, -20.0]);
        let nu = 0.7;
        let plan = fallback_maneuver(&d, nu, &o, &bx, &cfg).unwrap();
        assert!(!plan.filtered);
        let mut s = d;
        let mut at = nu;
        for imp in &plan.impulses {
            s = propagate_d(&s, at, imp.nu, &o);
            s = apply_impulse(&s, imp.nu, &imp.dv, &o);
            at = imp.nu;
        }
        assert!((s.to_vector() - target.to_vector()).amax() < 1e-6, "e={e}: {:?}", s.0);
        assert!(is_admissible(&s, &bx, e, 1e-6));
    }
}

#[test]
fn entry_state_is_admissible_and_between() {
    let bx = nominal_box();
    for &e in &[0.0, 0.3, 0.6] {
        let centre = reference_state(&orbit(e), &bx).unwrap();
        let far = DState::new([3.0, 30.0, 30.0, 400.0, 50.0, 50.0]);
        for &depth in &[0.0, 0.1, 1.0] {
            let s = entry_state(&far, &centre, &bx, e, depth);
            assert!(is_admissible(&s, &bx, e, 0.0));
            assert_eq!(s.d0(), 0.0);
        }
        assert_eq!(entry_state(&far, &centre, &bx, e, 1.0), centre);
        let inside = DState::new([0.5, centre.d1(), centre.d2(), centre.d3(), 1.0, 1.0]);
        assert_eq!(entry_state(&inside, &centre, &bx, e, 0.1).0[1..], inside.0[1..]);
    }
}

#[test]
fn more_samples_never_raise_the_in_plane_bound() {
    let o = orbit(0.0);
    let bx = nominal_box();
    let few = estimate_threshold_bounds_with_grid(&o, &bx, &limits(), 2, 20, 90, 5).unwrap();
    let many = estimate_threshold_bounds_with_grid(&o, &bx, &limits(), 4, 20, 90, 5).unwrap();
    assert!(many.0 <= few.0);
    assert!(few.0 < 0.0 && few.1 < 0.0);
}

#[test]
fn decisions_are_consistent_with_the_signals() {
    let bx = nominal_box();
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let cfg = TriggerConfig::new(-3.0, -100.0, 1f64.to_radians(), 20, 1e-6).unwrap();
    let fb = FallbackConfig { spacing: 30f64.to_radians(), limits: limits() };
    for _ in 0..200 {
        let e = [0.0, 0.3, 0.6][rng.random_range(0..3)];
        let o = orbit(e);
        let (d, nu) = scene(&mut rng, &reference_state(&o, &bx).unwrap());
        let ev = evaluate_trigger(&d, nu, &o, &bx, &limits(), &cfg, &fb).unwrap();
        let next = propagate_d(&d, nu, nu + cfg.delta_nu_sample, &o);
        let fires_xz = !ev.xz_inside
            && plane_fires(
                &reach_xz(&d, nu, &o, &bx, &limits()).0,
                reach_xz(&next, nu + cfg.delta_nu_sample, &o, &bx, &limits()).0.g,
                cfg.delta_xz,
                cfg.delta_nu_sample,
            );
        let fires_y = !ev.y_inside
            && plane_fires(
                &reach_y(&d, nu, &o, &bx, &limits()),
                reach_y(&next, nu + cfg.delta_nu_sample, &o, &bx, &limits()).g,
                cfg.delta_y,
                cfg.delta_nu_sample,
            );
        match ev.decision {
            ControlDecision::Wait => assert!(!fires_xz && !fires_y && ev.in_attraction),
            ControlDecision::FallbackManeuver(_) => assert!(!ev.in_attraction),
            ControlDecision::SingleImpulse { plane, .. } => {
                assert!(ev.in_attraction);
                match plane {
                    Plane::OutOfPlane => assert!(fires_y && !fires_xz),
                    Plane::InPlane => assert!(fires_xz),
                    Plane::Coupled => assert!(fires_xz && fires_y),
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn lower_threshold_fires_whenever_higher_does(
        g in -50.0..0.0f64,
        slope in -1.0..1.0f64,
        hi in -20.0..0.0f64,
        gap in 0.0..20.0f64,
    ) {
        let reach = hover_core::reachability::PlaneReach {
            lambda_s: None,
            lambda_sat: hover_core::reachability::IntervalUnion::empty(),
            length: 1.0,
            g,
        };
        let dnu = 0.01;
        if plane_fires(&reach, g + slope * dnu, hi, dnu) {
            prop_assert!(plane_fires(&reach, g + slope * dnu, hi - gap, dnu));
        }
    }
}
