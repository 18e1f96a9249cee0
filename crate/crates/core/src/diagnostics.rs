//! One-period reachable-set implicitizations and dead-zone set checks.

use serde::{Deserialize, Serialize};

use crate::admissible::{envelope_y, is_admissible_xz, is_admissible_y, HoveringBox};
use crate::dynamics::{propagate_d, DState, TargetOrbit, ThrusterLimits};
use crate::error::{HoverError, Result};
use crate::reachability::{attraction_xz, attraction_y, in_plane_basis, lambda_s_xz, lambda_s_y, Interval};
use crate::scalar::Real;

/// Number of boundary samples of the out-of-plane containment test.
pub const BOUNDARY_SAMPLES: usize = 3600;

/// Implicit equation of the out-of-plane increment ellipse swept by a fixed
/// `λ_y` over one period; zero on the locus, negative inside.
pub fn f_y_ellipse<T: Real>(delta_y: &[T; 2], lambda_y: T, orbit: &TargetOrbit<T>) -> Result<T> {
    if lambda_y == T::zero() {
        return Err(HoverError::Degenerate("λ_y = 0 collapses the ellipse to a point".into()));
    }
    let e = orbit.e();
    let k2 = orbit.k2();
    let one_m_e2 = T::one() - e * e;
    let a = lambda_y / (k2 * one_m_e2.sqrt());
    let b = lambda_y / (k2 * one_m_e2);
    let u = delta_y[0] / a;
    let v = (delta_y[1] + e * b) / b;
    Ok(u * u + v * v - T::one())
}

/// Quasi-steady implicit cone of in-plane increments `[Δd0, Δd1, Δd2, Δd3]`
/// (`Δd0` is ignored); exact only for `|d0| ≈ 0`.
pub fn f_xz_cone<T: Real>(delta_xz: &[T; 4], e: T) -> T {
    let (d1, d2, d3) = (delta_xz[1], delta_xz[2], delta_xz[3]);
    let four = T::lit(4.0);
    four * d1 * d1 + (four - e * e) * d2 * d2 + T::lit(2.0) * e * d2 * d3 - d3 * d3
}

/// Whether a non-empty out-of-plane dead-zone set exists, i.e. whether the
/// admissible out-of-plane set lies strictly inside the region swept by
/// dead-zone impulses over one period.
pub fn deadzone_set_exists_y<T: Real>(orbit: &TargetOrbit<T>, bx: &HoveringBox<T>, limits: &ThrusterLimits<T>) -> bool {
    let e = orbit.e();
    let dv = limits.dv_min();
    if e == T::zero() {
        return dv > orbit.k2() * bx.y_min().abs().maxr(bx.y_max().abs());
    }
    if dv <= T::zero() {
        return false;
    }
    (0..BOUNDARY_SAMPLES).all(|i| {
        let th = T::two_pi() * T::lit(i as f64) / T::lit(BOUNDARY_SAMPLES as f64);
        let p = admissible_y_boundary(th, bx, e);
        // the swept region is the union of the filled ellipses for ±dv_min
        let inside = |l: T| f_y_ellipse(&p, l, orbit).is_ok_and(|f| f < T::zero());
        inside(dv) || inside(-dv)
    })
}

/// Boundary point of the admissible out-of-plane set along direction `θ`.
fn admissible_y_boundary<T: Real>(theta: T, bx: &HoveringBox<T>, e: T) -> [T; 2] {
    let (s, c) = theta.sin_cos();
    let g = |r: T| {
        let (a, b) = envelope_y(r * s, r * c, bx, e);
        a.maxr(b)
    };
    let mut hi = bx.y_min().abs().maxr(bx.y_max().abs());
    while g(hi) <= T::zero() {
        hi *= T::lit(2.0);
    }
    let mut lo = T::zero();
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) <= T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    [lo * s, lo * c]
}

/// Classification of a state outside the admissible set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeadzoneLabel {
    InAttraction,
    InDeadzone,
    Neither,
}

/// Labels `D`: in the region of attraction, in the dead-zone set (only
/// dead-zone impulses could reach the admissible set over the next period),
/// or neither. Planes already admissible are not examined.
pub fn deadzone_membership<T: Real>(
    d: &DState<T>,
    nu: T,
    orbit: &TargetOrbit<T>,
    bx: &HoveringBox<T>,
    limits: &ThrusterLimits<T>,
    n_l: usize,
    tol_periodicity: T,
) -> DeadzoneLabel {
    let e = orbit.e();
    let xz_out = !is_admissible_xz(&d.xz(), bx, e, tol_periodicity);
    let y_out = !is_admissible_y(&d.y(), bx, e);
    let xz_attr = !xz_out || attraction_xz(d, nu, orbit, bx, limits, n_l);
    let y_attr = !y_out || attraction_y(d, nu, orbit, bx, limits, n_l);
    if xz_attr && y_attr {
        return DeadzoneLabel::InAttraction;
    }
    let samples = |f: &dyn Fn(&DState<T>, T) -> bool| {
        f(d, nu)
            || (1..=n_l).any(|p| {
                let nup = nu + T::two_pi() * T::lit(p as f64) / T::lit(n_l as f64);
                f(&propagate_d(d, nu, nup, orbit), nup)
            })
    };
    let dz_y = |s: &DState<T>, n: T| {
        let band = Interval::new(-limits.dv_min(), limits.dv_min());
        match (lambda_s_y(&s.y(), n, orbit, bx), band) {
            (Some(ls), Some(b)) => ls.intersect(&b).is_some(),
            _ => false,
        }
    };
    let dz_xz = |s: &DState<T>, n: T| {
        let Some(band) = deadzone_band_xz(s.d0(), n, orbit, limits) else {
            return false;
        };
        lambda_s_xz(&s.xz(), n, orbit, bx).is_some_and(|ls| ls.intersect(&band).is_some())
    };
    let xz_dz = xz_attr || samples(&dz_xz);
    let y_dz = y_attr || samples(&dz_y);
    if xz_dz && y_dz {
        DeadzoneLabel::InDeadzone
    } else {
        DeadzoneLabel::Neither
    }
}

/// Interval of `λ_xz` whose impulse `λ b⊥ + ΔV⁰` lies below the dead-zone threshold.
fn deadzone_band_xz<T: Real>(d0: T, nu: T, orbit: &TargetOrbit<T>, limits: &ThrusterLimits<T>) -> Option<Interval<T>> {
    let basis = in_plane_basis(d0, nu, orbit);
    let (b, v) = (basis.b_perp, basis.dv0);
    let along = b[0] * v[0] + b[1] * v[1];
    let perp2 = v[0] * v[0] + v[1] * v[1] - along * along;
    let r2 = limits.dv_min() * limits.dv_min() - perp2;
    if r2 <= T::zero() {
        return None;
    }
    let r = r2.sqrt();
    Interval::new(-along - r, -along + r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{control_matrix_bd, MU_EARTH_KM3_S2};

    fn fig_orbit(e: f64) -> TargetOrbit<f64> {
        TargetOrbit::new(7011.0, e, 98f64.to_radians(), 0.0, 0.0, MU_EARTH_KM3_S2).unwrap()
    }

    #[test]
    fn ellipse_vanishes_on_control_column() {
        let o = TargetOrbit::new(20000.0, 0.6, 1.0, 0.0, 0.0, MU_EARTH_KM3_S2).unwrap();
        for i in 0..50 {
            let nu = i as f64 * 0.13;
            let bd = control_matrix_bd(nu, &o);
            for &l in &[0.01, -0.03] {
                let f = f_y_ellipse(&[l * bd[(4, 1)], l * bd[(5, 1)]], l, &o).unwrap();
                assert!(f.abs() < 1e-10, "{f}");
            }
        }
        assert!(f_y_ellipse(&[1.0, 1.0], 0.0, &o).is_err());
        assert_eq!(f_y_ellipse(&[0.0, 0.0], 0.02, &fig_orbit(0.0)).unwrap(), -1.0);
    }

    #[test]
    fn cone_generator() {
        assert_eq!(f_xz_cone(&[0.0, 0.0, 1.0, 2.0], 0.0), 0.0);
        assert!(f_xz_cone(&[0.0, 1.0, 0.3, 0.0], 0.5) > 0.0);
    }

    #[test]
    fn circular_existence_is_strict() {
        let o = fig_orbit(0.0);
        let bx = HoveringBox::new(50.0, 150.0, -25.0, 25.0, -25.0, 25.0).unwrap();
        let edge = o.k2() * 25.0;
        assert!(!deadzone_set_exists_y(&o, &bx, &ThrusterLimits::new(edge, 0.5).unwrap()));
        assert!(deadzone_set_exists_y(&o, &bx, &ThrusterLimits::new(edge * 1.001, 0.5).unwrap()));
    }
}
