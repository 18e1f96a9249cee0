mod support;

use hover_core::admissible::{envelopes, in_track_extrema, in_track_position, is_admissible, is_admissible_xz, is_admissible_y};
use hover_core::controller::reference_state;
use hover_core::dynamics::d_to_cartesian;
use hover_core::{DState, HoveringBox};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;
use support::{nominal_box, orbit};

/// Box check of the position at every point of a uniform `ν` grid over one period.
fn grid_admissible(d: &DState<f64>, e: f64, bx: &HoveringBox<f64>, n: usize) -> bool {
    let o = orbit(e);
    (0..n).all(|i| {
        let p = d_to_cartesian(d, TAU * i as f64 / n as f64, &o).position();
        bx.contains(&p)
    })
}

/// Periodic states around the most interior state, at spreads from 1 % to 100 % of the box.
fn random_periodic(rng: &mut ChaCha8Rng, centre: &DState<f64>) -> DState<f64> {
    let spread = [0.01, 0.03, 0.1, 0.3, 1.0][rng.random_range(0..5)];
    let half = [0.0, 25.0, 25.0, 50.0, 25.0, 25.0];
    DState::new(std::array::from_fn(|i| centre.0[i] + spread * half[i] * rng.random_range(-1.0..1.0)))
}

#[test]
fn envelope_test_agrees_with_dense_grid() {
    let bx = nominal_box();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for &e in &[0.0, 0.3, 0.6] {
        let centre = reference_state(&orbit(e), &bx).unwrap();
        let mut agree = 0;
        let mut inside = 0;
        for _ in 0..1000 {
            let d = random_periodic(&mut rng, &centre);
            let fast = is_admissible(&d, &bx, e, 0.0);
            let slow = grid_admissible(&d, e, &bx, 10_000);
            inside += fast as usize;
            if fast == slow {
                agree += 1;
            } else {
                let g = envelopes(&d, &bx, e).max();
                assert!(g.abs() < 1e-6, "e={e}: disagreement away from the boundary, g = {g:e}, D = {:?}", d.0);
            }
        }
        assert!(agree >= 999, "e={e}: agreement {agree}/1000");
        // the sample must exercise both outcomes
        assert!(inside > 50 && inside < 950, "e={e}: {inside} admissible samples");
    }
}

#[test]
fn in_track_extrema_bound_the_trajectory() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let e = rng.random_range(0.0..0.7);
        let (d1, d2, d3) = (rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0), rng.random_range(-200.0..200.0));
        let (lo, hi) = in_track_extrema(d1, d2, d3, e);
        let (glo, ghi) = (0..20_000)
            .map(|i| in_track_position(d1, d2, d3, TAU * i as f64 / 20_000.0, e))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        assert!(lo <= glo + 1e-9 && hi >= ghi - 1e-9);
        assert!(glo - lo < 1e-4 && hi - ghi < 1e-4, "extrema not tight: {lo} {glo} / {hi} {ghi}");
    }
}

#[test]
fn non_periodic_states_are_rejected() {
    let bx = nominal_box();
    let d = DState::new([1e-3, 0.0, 0.0, 100.0, 0.0, 0.0]);
    assert!(!is_admissible(&d, &bx, 0.2, 1e-6));
    assert!(is_admissible(&d, &bx, 0.2, 1e-2));
}

proptest! {
    #[test]
    fn admissibility_is_plane_separable(
        d in proptest::array::uniform5(-40.0..40.0f64),
        d3 in 0.0..200.0f64,
        e in 0.0..0.7f64,
    ) {
        let bx = nominal_box();
        let s = DState::new([0.0, d[0], d[1], d3, d[3], d[4]]);
        prop_assert_eq!(
            is_admissible(&s, &bx, e, 0.0),
            is_admissible_xz(&s.xz(), &bx, e, 0.0) && is_admissible_y(&s.y(), &bx, e)
        );
    }

    #[test]
    fn admissible_set_is_convex(
        a in proptest::array::uniform5(-25.0..25.0f64),
        b in proptest::array::uniform5(-25.0..25.0f64),
        a3 in 40.0..160.0f64,
        b3 in 40.0..160.0f64,
        t in 0.0..1.0f64,
        e in 0.0..0.6f64,
    ) {
        let bx = nominal_box();
        let p = DState::new([0.0, a[0], a[1], a3, a[3], a[4]]);
        let q = DState::new([0.0, b[0], b[1], b3, b[3], b[4]]);
        if is_admissible(&p, &bx, e, 0.0) && is_admissible(&q, &bx, e, 0.0) {
            let m = DState::new(std::array::from_fn(|i| p.0[i] + t * (q.0[i] - p.0[i])));
            prop_assert!(envelopes(&m, &bx, e).max() <= 1e-9);
        }
    }
}
