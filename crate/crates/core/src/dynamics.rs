//! Linearized relative motion about an elliptic target orbit, expressed in the
//! six motion parameters `D = [d0 … d5]`.
//!
//! Conventions: LVLH axes with `z` toward the Earth centre, `y` opposite the
//! orbital angular momentum and `x` completing the triad. Relative positions are
//! in metres and velocities in m/s; orbit sizes are in kilometres. The true
//! anomaly `ν` is unwrapped (it keeps increasing across revolutions).

use nalgebra::{Matrix6, SMatrix, SVector, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{HoverError, Result};
use crate::scalar::Real;

/// Equatorial Earth radius [km].
pub const EARTH_RADIUS_KM: f64 = 6378.137;
/// Earth gravitational parameter [km³/s²].
pub const MU_EARTH_KM3_S2: f64 = 398600.4;

/// Keplerian elements of the leader spacecraft.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetOrbit<T> {
    a: T,
    e: T,
    inc: T,
    raan: T,
    arg_perigee: T,
    mu: T,
}

impl<T: Real> TargetOrbit<T> {
    /// Builds an orbit from semi-major axis `a` [km], eccentricity, angles [rad]
    /// and gravitational parameter `mu` [km³/s²].
    pub fn new(a: T, e: T, inc: T, raan: T, arg_perigee: T, mu: T) -> Result<Self> {
        for (name, v) in [("a", a), ("e", e), ("i", inc), ("raan", raan), ("argp", arg_perigee), ("mu", mu)] {
            if !v.is_finite() {
                return Err(HoverError::InvalidOrbit(format!("{name} is not finite")));
            }
        }
        if e < T::zero() || e >= T::one() {
            return Err(HoverError::InvalidOrbit(format!("eccentricity {} outside [0, 1)", e.as_f64())));
        }
        if mu <= T::zero() {
            return Err(HoverError::InvalidOrbit("gravitational parameter must be positive".into()));
        }
        if a * (T::one() - e) <= T::lit(EARTH_RADIUS_KM) {
            return Err(HoverError::InvalidOrbit(format!(
                "perigee radius {} km is inside the Earth",
                (a * (T::one() - e)).as_f64()
            )));
        }
        Ok(Self { a, e, inc, raan, arg_perigee, mu })
    }

    /// Builds an orbit from its perigee altitude [km] above the equatorial radius.
    pub fn from_perigee_altitude(h_p: T, e: T, inc: T, raan: T, arg_perigee: T, mu: T) -> Result<Self> {
        if e < T::zero() || e >= T::one() {
            return Err(HoverError::InvalidOrbit(format!("eccentricity {} outside [0, 1)", e.as_f64())));
        }
        let a = (T::lit(EARTH_RADIUS_KM) + h_p) / (T::one() - e);
        Self::new(a, e, inc, raan, arg_perigee, mu)
    }

    /// Semi-major axis [km].
    pub fn a(&self) -> T {
        self.a
    }
    /// Eccentricity.
    pub fn e(&self) -> T {
        self.e
    }
    /// Inclination [rad].
    pub fn inc(&self) -> T {
        self.inc
    }
    /// Right ascension of the ascending node [rad].
    pub fn raan(&self) -> T {
        self.raan
    }
    /// Argument of perigee [rad].
    pub fn arg_perigee(&self) -> T {
        self.arg_perigee
    }
    /// Gravitational parameter [km³/s²].
    pub fn mu(&self) -> T {
        self.mu
    }

    /// `k² = sqrt(μ / (a³ (1 − e²)³))` [1/s], so that `dν/dt = k² ρ²`.
    pub fn k2(&self) -> T {
        let p = T::one() - self.e * self.e;
        (self.mu / (self.a * self.a * self.a * p * p * p)).sqrt()
    }

    /// Mean motion `sqrt(μ/a³)` [rad/s].
    pub fn mean_motion(&self) -> T {
        (self.mu / (self.a * self.a * self.a)).sqrt()
    }

    /// Orbital period [s].
    pub fn period(&self) -> T {
        T::two_pi() / self.mean_motion()
    }

    /// Returns a copy with a different eccentricity, keeping the perigee radius.
    pub fn with_eccentricity(&self, e: T) -> Result<Self> {
        let rp = self.a * (T::one() - self.e);
        Self::new(rp / (T::one() - e), e, self.inc, self.raan, self.arg_perigee, self.mu)
    }
}

/// Relative position [m] and velocity [m/s] of the chaser in the LVLH frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianRelativeState<T> {
    pub x: T,
    pub y: T,
    pub z: T,
    pub vx: T,
    pub vy: T,
    pub vz: T,
}

impl<T: Real> CartesianRelativeState<T> {
    pub fn new(x: T, y: T, z: T, vx: T, vy: T, vz: T) -> Self {
        Self { x, y, z, vx, vy, vz }
    }

    pub fn zero() -> Self {
        Self::from_vector(&Vector6::zeros())
    }

    pub fn to_vector(&self) -> Vector6<T> {
        Vector6::new(self.x, self.y, self.z, self.vx, self.vy, self.vz)
    }

    pub fn from_vector(v: &Vector6<T>) -> Self {
        Self::new(v[0], v[1], v[2], v[3], v[4], v[5])
    }

    pub fn position(&self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|v| v.is_finite())
    }
}

/// Motion parameters `D = [d0 … d5]` [m]. `d0 = 0` characterizes periodic
/// relative orbits; `[d0, d1, d2, d3]` is the in-plane part and `[d4, d5]` the
/// out-of-plane part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DState<T>(pub [T; 6]);

impl<T: Real> DState<T> {
    pub fn new(d: [T; 6]) -> Self {
        Self(d)
    }

    pub fn zero() -> Self {
        Self([T::zero(); 6])
    }

    pub fn from_vector(v: &Vector6<T>) -> Self {
        Self([v[0], v[1], v[2], v[3], v[4], v[5]])
    }

    pub fn to_vector(&self) -> Vector6<T> {
        Vector6::from_column_slice(&self.0)
    }

    pub fn d0(&self) -> T {
        self.0[0]
    }
    pub fn d1(&self) -> T {
        self.0[1]
    }
    pub fn d2(&self) -> T {
        self.0[2]
    }
    pub fn d3(&self) -> T {
        self.0[3]
    }
    pub fn d4(&self) -> T {
        self.0[4]
    }
    pub fn d5(&self) -> T {
        self.0[5]
    }

    /// In-plane part `[d0, d1, d2, d3]`.
    pub fn xz(&self) -> [T; 4] {
        [self.0[0], self.0[1], self.0[2], self.0[3]]
    }

    /// Out-of-plane part `[d4, d5]`.
    pub fn y(&self) -> [T; 2] {
        [self.0[4], self.0[5]]
    }

    /// Reassembles a state from its in-plane and out-of-plane parts.
    pub fn from_parts(xz: [T; 4], y: [T; 2]) -> Self {
        Self([xz[0], xz[1], xz[2], xz[3], y[0], y[1]])
    }

    /// Whether `|d0| ≤ tol`.
    pub fn is_periodic(&self, tol: T) -> bool {
        self.0[0].abs() <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// Velocity increment in LVLH axes [m/s], applied at true anomaly `nu` [rad].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Impulse<T> {
    pub dv: [T; 3],
    pub nu: T,
}

impl<T: Real> Impulse<T> {
    pub fn new(dv: [T; 3], nu: T) -> Self {
        Self { dv, nu }
    }

    pub fn zero(nu: T) -> Self {
        Self { dv: [T::zero(); 3], nu }
    }

    pub fn norm2(&self) -> T {
        (self.dv[0] * self.dv[0] + self.dv[1] * self.dv[1] + self.dv[2] * self.dv[2]).sqrt()
    }

    pub fn norm1(&self) -> T {
        self.dv[0].abs() + self.dv[1].abs() + self.dv[2].abs()
    }

    pub fn is_zero(&self) -> bool {
        self.dv.iter().all(|v| *v == T::zero())
    }
}

/// Minimum impulse bit (dead-zone) and saturation of the thrusters [m/s].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThrusterLimits<T> {
    dv_min: T,
    dv_max: T,
}

impl<T: Real> ThrusterLimits<T> {
    pub fn new(dv_min: T, dv_max: T) -> Result<Self> {
        if !(dv_min > T::zero() && dv_min < dv_max && dv_max.is_finite()) {
            return Err(HoverError::InvalidLimits { dv_min: dv_min.as_f64(), dv_max: dv_max.as_f64() });
        }
        Ok(Self { dv_min, dv_max })
    }

    pub fn dv_min(&self) -> T {
        self.dv_min
    }

    pub fn dv_max(&self) -> T {
        self.dv_max
    }

    /// Whether a 2-norm lies in `[dv_min, dv_max]`.
    pub fn admits(&self, norm: T) -> bool {
        norm >= self.dv_min && norm <= self.dv_max
    }
}

/// `ρ(ν) = 1 + e cos ν`.
pub fn rho<T: Real>(nu: T, e: T) -> T {
    T::one() + e * nu.cos()
}

/// Similarity transform `U(ν)` mapping `X` to the scaled state `X̃ = U X`.
pub fn matrix_u<T: Real>(nu: T, orbit: &TargetOrbit<T>) -> Matrix6<T> {
    let e = orbit.e();
    let r = rho(nu, e);
    let rp = -e * nu.sin();
    let inv = T::one() / (orbit.k2() * r);
    let mut u = Matrix6::zeros();
    for i in 0..3 {
        u[(i, i)] = r;
        u[(i + 3, i)] = rp;
        u[(i + 3, i + 3)] = inv;
    }
    u
}

/// `V(ν)` such that `X̃(ν) = V(ν) D`. Rows are `x̃, ỹ, z̃, x̃', ỹ', z̃'`, and
/// `|det V| = 1 − e²` (the determinant is negative with this row ordering).
pub fn matrix_v<T: Real>(nu: T, e: T) -> Matrix6<T> {
    let (s, c) = nu.sin_cos();
    let r = T::one() + e * c;
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let z = T::zero();
    #[rustfmt::skip]
    let m = Matrix6::new(
        z, s * (one + r), -c * (one + r), one, z, z,
        z, z, z, z, c, s,
        two, c * r, s * r, z, z, z,
        three, two * c * r - e, two * s * r, z, z, z,
        z, z, z, z, -s, c,
        -three * e * s / r, -s * (one + two * e * c), two * e * c * c - e + c, z, z, z,
    );
    m
}

/// Mean anomaly at true anomaly `nu`, unwrapped so that it increases with `nu`
/// (one full revolution adds `2π`).
pub fn mean_anomaly_unwrapped<T: Real>(nu: T, e: T) -> T {
    let tau = T::two_pi();
    let k = (nu / tau).round();
    let nr = nu - k * tau;
    let half = nr / T::lit(2.0);
    let ecc = T::lit(2.0) * ((T::one() - e).sqrt() * half.sin()).atan2((T::one() + e).sqrt() * half.cos());
    ecc - e * ecc.sin() + k * tau
}

/// Solves Kepler's equation for the true anomaly (unwrapped) at mean anomaly `m`.
pub fn true_anomaly_from_mean<T: Real>(m: T, e: T) -> Result<T> {
    let tau = T::two_pi();
    let k = (m / tau).round();
    let mr = m - k * tau;
    let mut ecc = if e < T::lit(0.8) {
        mr
    } else if mr < T::zero() {
        -T::pi()
    } else {
        T::pi()
    };
    let tol = T::lit(1e-12).maxr(T::lit(4.0) * T::eps());
    let mut converged = false;
    for _ in 0..50 {
        let f = ecc - e * ecc.sin() - mr;
        let fp = T::one() - e * ecc.cos();
        let step = f / fp;
        ecc -= step;
        if step.abs() <= tol {
            converged = true;
            break;
        }
    }
    if !converged || !ecc.is_finite() {
        return Err(HoverError::KeplerNonConvergence { mean_anomaly: m.as_f64() });
    }
    let half = ecc / T::lit(2.0);
    let nu = T::lit(2.0) * ((T::one() + e).sqrt() * half.sin()).atan2((T::one() - e).sqrt() * half.cos());
    Ok(nu + k * tau)
}

/// Time since perigee passage [s] at (unwrapped) true anomaly `nu`.
pub fn nu_to_time<T: Real>(nu: T, orbit: &TargetOrbit<T>) -> T {
    mean_anomaly_unwrapped(nu, orbit.e()) / orbit.mean_motion()
}

/// Unwrapped true anomaly at time `t` [s] since perigee passage.
pub fn time_to_nu<T: Real>(t: T, orbit: &TargetOrbit<T>) -> Result<T> {
    true_anomaly_from_mean(orbit.mean_motion() * t, orbit.e())
}

/// `J(ν) = ∫_{ν0}^{ν} dτ / ρ(τ)²`, evaluated in closed form through Kepler's
/// equation: `J = n (t − t0) / (1 − e²)^{3/2}`.
pub fn j_integral<T: Real>(nu0: T, nu: T, orbit: &TargetOrbit<T>) -> T {
    let e = orbit.e();
    let p = T::one() - e * e;
    (mean_anomaly_unwrapped(nu, e) - mean_anomaly_unwrapped(nu0, e)) / (p * p.sqrt())
}

/// Transition matrix of `D` from `nu0` to `nu`: the identity except for the
/// drift entries `(d2, d0) = −3eJ` and `(d3, d0) = 3J`.
pub fn transition_d<T: Real>(nu0: T, nu: T, orbit: &TargetOrbit<T>) -> Matrix6<T> {
    let j = j_integral(nu0, nu, orbit);
    let mut m = Matrix6::identity();
    m[(2, 0)] = -T::lit(3.0) * orbit.e() * j;
    m[(3, 0)] = T::lit(3.0) * j;
    m
}

/// Propagates `D` under the unforced linear dynamics.
pub fn propagate_d<T: Real>(d: &DState<T>, nu0: T, nu: T, orbit: &TargetOrbit<T>) -> DState<T> {
    let j = j_integral(nu0, nu, orbit);
    let mut out = *d;
    out.0[2] -= T::lit(3.0) * orbit.e() * j * d.0[0];
    out.0[3] += T::lit(3.0) * j * d.0[0];
    out
}

/// Closed-form impulse input matrix `B_D(ν)` (6×3): `D⁺ = D + B_D ΔV`.
pub fn control_matrix_bd<T: Real>(nu: T, orbit: &TargetOrbit<T>) -> SMatrix<T, 6, 3> {
    let e = orbit.e();
    let (s, c) = nu.sin_cos();
    let r = T::one() + e * c;
    let k2 = orbit.k2();
    let one = T::one();
    let two = T::lit(2.0);
    let e2m1 = e * e - one;
    let f = one / (k2 * e2m1 * r);
    let z = T::zero();
    #[rustfmt::skip]
    let m = SMatrix::<T, 6, 3>::new(
        r * r, z, -e * s * r,
        -two * c - e * (one + c * c), z, s * r,
        -s * (two + e * c), z, two * e - c * r,
        e * s * (two + e * c), z, e * c * r - two,
        z, -e2m1 * s, z,
        z, e2m1 * c, z,
    );
    m * f
}

/// `B_D(ν)` computed as `V⁻¹(ν) U(ν) B` with a dense LU factorization.
pub fn control_matrix_bd_dense<T: Real>(nu: T, orbit: &TargetOrbit<T>) -> Result<SMatrix<T, 6, 3>> {
    let v = matrix_v(nu, orbit.e());
    let u = matrix_u(nu, orbit);
    let ub: SMatrix<T, 6, 3> = u.fixed_columns::<3>(3).into_owned();
    let lu = v.lu();
    lu.solve(&ub).ok_or_else(|| HoverError::Singular("V(ν)".into()))
}

/// In-plane block of `B_D` (rows `d0..d3`, columns `x, z`) and the
/// out-of-plane column (rows `d4, d5`, column `y`).
pub fn submatrices_bd<T: Real>(nu: T, orbit: &TargetOrbit<T>) -> (SMatrix<T, 4, 2>, SVector<T, 2>) {
    let b = control_matrix_bd(nu, orbit);
    let mut xz = SMatrix::<T, 4, 2>::zeros();
    for i in 0..4 {
        xz[(i, 0)] = b[(i, 0)];
        xz[(i, 1)] = b[(i, 2)];
    }
    (xz, SVector::<T, 2>::new(b[(4, 1)], b[(5, 1)]))
}

/// `D = V⁻¹(ν) U(ν) X`.
pub fn cartesian_to_d<T: Real>(x: &CartesianRelativeState<T>, nu: T, orbit: &TargetOrbit<T>) -> DState<T> {
    let xt = matrix_u(nu, orbit) * x.to_vector();
    let v = matrix_v(nu, orbit.e());
    let lu = v.lu();
    debug_assert!({
        let e = orbit.e();
        let det = lu.determinant().abs();
        let expected = T::one() - e * e;
        ((det - expected) / expected).abs() < T::lit(1e-6).maxr(T::lit(64.0) * T::eps())
    });
    let d = lu.solve(&xt).expect("det V = 1 - e^2 > 0");
    DState::from_vector(&d)
}

/// `X = U⁻¹(ν) V(ν) D`.
pub fn d_to_cartesian<T: Real>(d: &DState<T>, nu: T, orbit: &TargetOrbit<T>) -> CartesianRelativeState<T> {
    let e = orbit.e();
    let xt = matrix_v(nu, e) * d.to_vector();
    let r = rho(nu, e);
    let rp = -e * nu.sin();
    let k2 = orbit.k2();
    let mut out = Vector6::zeros();
    for i in 0..3 {
        out[i] = xt[i] / r;
        out[i + 3] = k2 * r * (xt[i + 3] - rp * out[i]);
    }
    CartesianRelativeState::from_vector(&out)
}

/// Impulse jump `D⁺ = D + B_D(ν) ΔV`.
pub fn apply_impulse<T: Real>(d: &DState<T>, nu: T, dv: &[T; 3], orbit: &TargetOrbit<T>) -> DState<T> {
    apply_impulse_with(d, &control_matrix_bd(nu, orbit), dv)
}

/// Impulse jump with a precomputed `B_D`.
pub fn apply_impulse_with<T: Real>(d: &DState<T>, bd: &SMatrix<T, 6, 3>, dv: &[T; 3]) -> DState<T> {
    let mut out = *d;
    for i in 0..6 {
        out.0[i] += bd[(i, 0)] * dv[0] + bd[(i, 1)] * dv[1] + bd[(i, 2)] * dv[2];
    }
    out
}
