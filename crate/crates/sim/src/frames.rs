//! Conversions between inertial states, orbital elements and the LVLH frame.

use hover_core::{CartesianRelativeState, TargetOrbit};
use nalgebra::{Matrix3, Vector3};

use crate::error::{Result, SimError};
use crate::propagation::InertialState;

/// Inertial state [m, m/s] of the Keplerian orbit at true anomaly `nu`.
pub fn orbit_state(orbit: &TargetOrbit<f64>, nu: f64) -> InertialState {
    let mu = orbit.mu() * 1e9;
    let a = orbit.a() * 1e3;
    let e = orbit.e();
    let p = a * (1.0 - e * e);
    let (s, c) = nu.sin_cos();
    let r_pf = Vector3::new(p / (1.0 + e * c) * c, p / (1.0 + e * c) * s, 0.0);
    let v_pf = (mu / p).sqrt() * Vector3::new(-s, e + c, 0.0);
    let rot = perifocal_to_inertial(orbit.raan(), orbit.inc(), orbit.arg_perigee());
    InertialState::new(rot * r_pf, rot * v_pf)
}

fn perifocal_to_inertial(raan: f64, inc: f64, argp: f64) -> Matrix3<f64> {
    let (so, co) = raan.sin_cos();
    let (si, ci) = inc.sin_cos();
    let (sw, cw) = argp.sin_cos();
    Matrix3::new(
        co * cw - so * sw * ci,
        -co * sw - so * cw * ci,
        so * si,
        so * cw + co * sw * ci,
        -so * sw + co * cw * ci,
        -co * si,
        sw * si,
        cw * si,
        ci,
    )
}

/// LVLH axes of the target as rows of the inertial-to-LVLH rotation, and the
/// frame angular velocity `r × v / |r|²`.
pub fn lvlh_frame(target: &InertialState) -> Result<(Matrix3<f64>, Vector3<f64>)> {
    let h = target.r.cross(&target.v);
    let hn = h.norm();
    let rn = target.r.norm();
    if !(hn > 0.0) || !(rn > 0.0) || !hn.is_finite() {
        return Err(SimError::Frame("target angular momentum is zero".into()));
    }
    let z = -target.r / rn;
    let y = -h / hn;
    let x = y.cross(&z);
    let rot = Matrix3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
    Ok((rot, h / (rn * rn)))
}

/// Chaser state relative to the target, expressed in the target LVLH frame.
pub fn lvlh_relative_state(target: &InertialState, chaser: &InertialState) -> Result<CartesianRelativeState<f64>> {
    let (rot, omega) = lvlh_frame(target)?;
    let dr = chaser.r - target.r;
    let dv = chaser.v - target.v - omega.cross(&dr);
    let p = rot * dr;
    let w = rot * dv;
    Ok(CartesianRelativeState::new(p.x, p.y, p.z, w.x, w.y, w.z))
}

/// Inverse of [`lvlh_relative_state`].
pub fn chaser_from_relative(target: &InertialState, rel: &CartesianRelativeState<f64>) -> Result<InertialState> {
    let (rot, omega) = lvlh_frame(target)?;
    let dr = rot.transpose() * Vector3::new(rel.x, rel.y, rel.z);
    let dv = rot.transpose() * Vector3::new(rel.vx, rel.vy, rel.vz) + omega.cross(&dr);
    Ok(InertialState::new(target.r + dr, target.v + dv))
}

/// Rotates an LVLH impulse into inertial axes.
pub fn impulse_to_inertial(target: &InertialState, dv: &[f64; 3]) -> Result<Vector3<f64>> {
    let (rot, _) = lvlh_frame(target)?;
    Ok(rot.transpose() * Vector3::new(dv[0], dv[1], dv[2]))
}

/// Osculating true anomaly of an inertial state, in `[0, 2π)`.
pub fn osculating_true_anomaly(s: &InertialState, mu: f64) -> f64 {
    let rn = s.r.norm();
    let ecc = ((s.v.norm_squared() - mu / rn) * s.r - s.r.dot(&s.v) * s.v) / mu;
    let h = s.r.cross(&s.v);
    let sin = h.normalize().dot(&ecc.normalize().cross(&(s.r / rn)));
    let cos = ecc.normalize().dot(&(s.r / rn));
    hover_core::scalar::wrap_two_pi(sin.atan2(cos))
}

/// Argument of latitude of an inertial state, in `[0, 2π)`.
pub fn argument_of_latitude(s: &InertialState) -> f64 {
    let h = s.r.cross(&s.v).normalize();
    let node = Vector3::z().cross(&h);
    // equatorial orbits: measure from the inertial x axis
    let node = if node.norm() < 1e-12 { Vector3::x() } else { node.normalize() };
    let sin = h.dot(&node.cross(&s.r));
    let cos = node.dot(&s.r);
    hover_core::scalar::wrap_two_pi(sin.atan2(cos))
}

#[cfg(test)]
mod tests {
    use super::*;
    use hover_core::dynamics::MU_EARTH_KM3_S2;

    fn orbit() -> TargetOrbit<f64> {
        TargetOrbit::from_perigee_altitude(605.0, 0.2, 98f64.to_radians(), 0.3, 0.7, MU_EARTH_KM3_S2).unwrap()
    }

    #[test]
    fn zero_relative_state() {
        let t = orbit_state(&orbit(), 1.0);
        let r = lvlh_relative_state(&t, &t).unwrap();
        assert_eq!(r.to_vector().amax(), 0.0);
    }

    #[test]
    fn radial_offset_is_negative_z() {
        let t = orbit_state(&orbit(), 1.0);
        let c = InertialState::new(t.r + t.r.normalize() * 100.0, t.v);
        let r = lvlh_relative_state(&t, &c).unwrap();
        assert!((r.z + 100.0).abs() < 1e-8 && r.x.abs() < 1e-8 && r.y.abs() < 1e-8);
    }

    #[test]
    fn anomaly_recovered() {
        let o = orbit();
        for &nu in &[0.1, 2.0, 4.0] {
            let s = orbit_state(&o, nu);
            assert!((osculating_true_anomaly(&s, o.mu() * 1e9) - nu).abs() < 1e-10);
            assert!((argument_of_latitude(&s) - (nu + 0.7)).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_angular_momentum_rejected() {
        let s = InertialState::new(Vector3::new(7e6, 0.0, 0.0), Vector3::new(1.0, 0.0, 0.0));
        assert!(lvlh_relative_state(&s, &s).is_err());
    }
}
