//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use hover_core::dynamics::MU_EARTH_KM3_S2;
use hover_core::{HoveringBox, TargetOrbit};

/// Dormand–Prince 5(4) integration of `y' = f(t, y)` from `t0` to `t1`.
pub fn dopri5<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    y0: [f64; N],
    t0: f64,
    t1: f64,
    rtol: f64,
    atol: f64,
) -> [f64; N] {
    const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let mut t = t0;
    let mut y = y0;
    let mut h = (t1 - t0) / 1000.0;
    while t < t1 {
        h = h.min(t1 - t);
        let mut k = [[0.0; N]; 7];
        for s in 0..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                for i in 0..N {
                    ys[i] += h * A[s][j] * kj[i];
                }
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut y5 = y;
        let mut err: f64 = 0.0;
        for i in 0..N {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for s in 0..7 {
                d5 += B5[s] * k[s][i];
                d4 += B4[s] * k[s][i];
            }
            y5[i] += h * d5;
            let sc = atol + rtol * y[i].abs().max(y5[i].abs());
            err = err.max((h * (d5 - d4)).abs() / sc);
        }
        if err <= 1.0 {
            t += h;
            y = y5;
        }
        h *= (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
    }
    y
}

/// Composite Simpson quadrature with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Target orbit with the 605 km perigee altitude used throughout the tests.
pub fn orbit(e: f64) -> TargetOrbit<f64> {
    TargetOrbit::from_perigee_altitude(605.0, e, 98f64.to_radians(), 0.0, 0.0, MU_EARTH_KM3_S2).unwrap()
}

/// Hovering box `x ∈ [50, 150]`, `y, z ∈ [−25, 25]` m.
pub fn nominal_box() -> HoveringBox<f64> {
    HoveringBox::new(50.0, 150.0, -25.0, 25.0, -25.0, 25.0).unwrap()
}

/// Finds the interval of `t ∈ [lo, hi]` where `inside(t)` holds, assuming it
/// is an interval: a uniform scan locates one interior point, bisection the ends.
pub fn interval_by_bisection(inside: impl Fn(f64) -> bool, lo: f64, hi: f64, scan: usize) -> Option<(f64, f64)> {
    let step = (hi - lo) / scan as f64;
    let seed = (0..=scan).map(|i| lo + i as f64 * step).find(|&t| inside(t))?;
    let bisect = |mut a: f64, mut b: f64| {
        // `a` inside, `b` outside
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m == a || m == b {
                break;
            }
            if inside(m) {
                a = m;
            } else {
                b = m;
            }
        }
        a
    };
    let left = if inside(lo) { lo } else { bisect(seed, lo) };
    let right = if inside(hi) { hi } else { bisect(seed, hi) };
    Some((left, right))
}

/// Outcome of comparing a single-impulse solver with a grid search.
#[derive(Debug, Clone, Copy)]
pub struct GridComparison {
    pub solver_cost: f64,
    pub grid_cost: f64,
    /// Largest cost change between neighbouring grid points.
    pub resolution: f64,
}

/// Minimizes `cost` over the `λ` values of an `n`-point grid on `[lo, hi]`
/// for which `feasible` holds.
pub fn grid_min(cost: impl Fn(f64) -> f64, feasible: impl Fn(f64) -> bool, lo: f64, hi: f64, n: usize) -> Option<f64> {
    let h = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + i as f64 * h).filter(|&l| feasible(l)).map(&cost).reduce(f64::min)
}

/// Grid check of the out-of-plane program at `(d, ν)`; `None` when infeasible.
pub fn out_of_plane_gap(
    d: &hover_core::DState<f64>,
    nu: f64,
    o: &TargetOrbit<f64>,
    bx: &HoveringBox<f64>,
    limits: &hover_core::ThrusterLimits<f64>,
    n: usize,
) -> Option<GridComparison> {
    use hover_core::admissible::is_admissible_y;
    use hover_core::controller::solve_out_of_plane;
    use hover_core::dynamics::control_matrix_bd;
    let sol = solve_out_of_plane(d, nu, o, bx, limits).ok()?;
    let b = control_matrix_bd(nu, o);
    let e = o.e();
    let w = limits.dv_max();
    let inside = |l: f64| is_admissible_y(&[d.d4() + l * b[(4, 1)], d.d5() + l * b[(5, 1)]], bx, e);
    let (lo, hi) = interval_by_bisection(inside, -w, w, 4000)?;
    let grid = grid_min(|l| l.abs(), |l| limits.admits(l.abs()), lo, hi, n)?;
    Some(GridComparison { solver_cost: sol.norm1(), grid_cost: grid, resolution: (hi - lo) / (n - 1) as f64 })
}

/// Grid check of the in-plane program at `(d, ν)`; `None` when infeasible.
pub fn in_plane_gap(
    d: &hover_core::DState<f64>,
    nu: f64,
    o: &TargetOrbit<f64>,
    bx: &HoveringBox<f64>,
    limits: &hover_core::ThrusterLimits<f64>,
    n: usize,
) -> Option<GridComparison> {
    use hover_core::admissible::is_admissible_xz;
    use hover_core::controller::solve_in_plane;
    use hover_core::dynamics::apply_impulse;
    use hover_core::reachability::in_plane_basis;
    let sol = solve_in_plane(d, nu, o, bx, limits).ok()?;
    let basis = in_plane_basis(d.d0(), nu, o);
    let e = o.e();
    let w = limits.dv_max() + (basis.dv0[0].powi(2) + basis.dv0[1].powi(2)).sqrt();
    let inside = |l: f64| is_admissible_xz(&apply_impulse(d, nu, &basis.impulse(l), o).xz(), bx, e, 1e-9);
    let (lo, hi) = interval_by_bisection(inside, -w, w, 2000)?;
    let norm = |l: f64| {
        let v = basis.impulse(l);
        (v[0] * v[0] + v[2] * v[2]).sqrt()
    };
    let cost = |l: f64| {
        let v = basis.impulse(l);
        v[0].abs() + v[2].abs()
    };
    let grid = grid_min(cost, |l| limits.admits(norm(l)), lo, hi, n)?;
    Some(GridComparison {
        solver_cost: sol.norm1(),
        grid_cost: grid,
        resolution: std::f64::consts::SQRT_2 * (hi - lo) / (n - 1) as f64,
    })
}
