//! Inertial propagation of both spacecraft: two-body gravity, J2 and drag.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

/// Earth equatorial radius [m].
pub const EARTH_RADIUS_M: f64 = 6_378_137.0;
/// Earth second zonal harmonic.
pub const J2: f64 = 1.082_626_68e-3;
/// Earth rotation rate [rad/s].
pub const EARTH_ROTATION_RATE: f64 = 7.292_115_9e-5;
/// Largest RK4 substep [s].
pub const MAX_SUBSTEP: f64 = 1.0;

/// Position [m] and velocity [m/s] in an Earth-centred inertial frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertialState {
    pub r: Vector3<f64>,
    pub v: Vector3<f64>,
}

impl InertialState {
    pub fn new(r: Vector3<f64>, v: Vector3<f64>) -> Self {
        Self { r, v }
    }

    /// Specific two-body orbital energy [m²/s²].
    pub fn energy(&self, mu: f64) -> f64 {
        self.v.norm_squared() / 2.0 - mu / self.r.norm()
    }
}

/// Exponential atmosphere `ρ(h) = ρ0 exp(−(h − h0)/H)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialAtmosphere {
    /// Reference density [kg/m³].
    pub rho0: f64,
    /// Reference altitude [m].
    pub h0: f64,
    /// Scale height [m].
    pub scale_height: f64,
}

impl ExponentialAtmosphere {
    pub fn density(&self, altitude: f64) -> f64 {
        self.rho0 * (-(altitude - self.h0) / self.scale_height).exp()
    }
}

impl Default for ExponentialAtmosphere {
    fn default() -> Self {
        Self { rho0: 1.0e-13, h0: 600.0e3, scale_height: 70.0e3 }
    }
}

/// Disturbance selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disturbances {
    pub j2: bool,
    pub drag: bool,
    pub atmosphere: ExponentialAtmosphere,
}

impl Disturbances {
    pub fn none() -> Self {
        Self { j2: false, drag: false, atmosphere: ExponentialAtmosphere::default() }
    }
}

/// Force model of one spacecraft.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceModel {
    /// Gravitational parameter [m³/s²].
    pub mu: f64,
    pub disturbances: Disturbances,
    /// Ballistic coefficient `m/(C_D A)` [kg/m²].
    pub ballistic_coefficient: f64,
}

impl ForceModel {
    pub fn acceleration(&self, r: &Vector3<f64>, v: &Vector3<f64>) -> Vector3<f64> {
        let rn = r.norm();
        let mut a = -self.mu / (rn * rn * rn) * r;
        if self.disturbances.j2 {
            let z2 = (r.z / rn).powi(2);
            let f = -1.5 * J2 * self.mu * EARTH_RADIUS_M * EARTH_RADIUS_M / rn.powi(5);
            a += f * Vector3::new(r.x * (1.0 - 5.0 * z2), r.y * (1.0 - 5.0 * z2), r.z * (3.0 - 5.0 * z2));
        }
        if self.disturbances.drag {
            let omega = Vector3::new(0.0, 0.0, EARTH_ROTATION_RATE);
            let v_rel = v - omega.cross(r);
            let rho = self.disturbances.atmosphere.density(rn - EARTH_RADIUS_M);
            a -= rho * v_rel.norm() / (2.0 * self.ballistic_coefficient) * v_rel;
        }
        a
    }

    fn derivative(&self, s: &InertialState) -> (Vector3<f64>, Vector3<f64>) {
        (s.v, self.acceleration(&s.r, &s.v))
    }

    /// One classical RK4 step of length `h`.
    pub fn rk4_step(&self, s: &InertialState, h: f64) -> InertialState {
        let (k1r, k1v) = self.derivative(s);
        let s2 = InertialState::new(s.r + k1r * (h / 2.0), s.v + k1v * (h / 2.0));
        let (k2r, k2v) = self.derivative(&s2);
        let s3 = InertialState::new(s.r + k2r * (h / 2.0), s.v + k2v * (h / 2.0));
        let (k3r, k3v) = self.derivative(&s3);
        let s4 = InertialState::new(s.r + k3r * h, s.v + k3v * h);
        let (k4r, k4v) = self.derivative(&s4);
        InertialState::new(
            s.r + (k1r + 2.0 * k2r + 2.0 * k3r + k4r) * (h / 6.0),
            s.v + (k1v + 2.0 * k2v + 2.0 * k3v + k4v) * (h / 6.0),
        )
    }

    /// Propagates over `dt` with equal substeps no longer than [`MAX_SUBSTEP`].
    pub fn propagate(&self, s: &InertialState, dt: f64) -> InertialState {
        let n = substeps(dt);
        let h = dt / n as f64;
        (0..n).fold(*s, |acc, _| self.rk4_step(&acc, h))
    }
}

fn substeps(dt: f64) -> usize {
    ((dt.abs() / MAX_SUBSTEP).ceil() as usize).max(1)
}

/// Propagates target and chaser over the same interval `dt > 0`.
pub fn propagate_nonlinear(
    target: &InertialState,
    chaser: &InertialState,
    dt: f64,
    target_model: &ForceModel,
    chaser_model: &ForceModel,
) -> (InertialState, InertialState) {
    (target_model.propagate(target, dt), chaser_model.propagate(chaser, dt))
}
