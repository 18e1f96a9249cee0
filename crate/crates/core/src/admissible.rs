//! Admissible set: periodic relative orbits whose whole trace stays inside an
//! axis-aligned hovering box.
//!
//! The radial (`z`) and cross-track (`y`) envelopes are exact quadratic forms
//! in `D` (units m²). The in-track (`x`) envelope is evaluated as the exact
//! extremum of `x(ν; D)` over one revolution (units m).

use serde::{Deserialize, Serialize};

use crate::dynamics::DState;
use crate::error::{HoverError, Result};
use crate::scalar::Real;

/// Number of bracketing cells used to isolate the stationary points of `x(ν)`.
pub const IN_TRACK_GRID: usize = 720;

/// Axis-aligned hovering box in LVLH coordinates [m].
///
/// The closed-form cross-track and radial envelopes require `y_min < 0 < y_max`
/// and `z_min < 0 < z_max` (periodic `y`/`z` traces oscillate about zero), so
/// the box excludes the origin through its in-track interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoveringBox<T> {
    x_min: T,
    x_max: T,
    y_min: T,
    y_max: T,
    z_min: T,
    z_max: T,
}

impl<T: Real> HoveringBox<T> {
    pub fn new(x_min: T, x_max: T, y_min: T, y_max: T, z_min: T, z_max: T) -> Result<Self> {
        let all = [x_min, x_max, y_min, y_max, z_min, z_max];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(HoverError::InvalidBox("non-finite bound".into()));
        }
        if !(x_min < x_max && y_min < y_max && z_min < z_max) {
            return Err(HoverError::InvalidBox("each lower bound must be strictly below its upper bound".into()));
        }
        if !(y_min < T::zero() && y_max > T::zero()) {
            return Err(HoverError::InvalidBox("the y interval must contain 0 in its interior".into()));
        }
        if !(z_min < T::zero() && z_max > T::zero()) {
            return Err(HoverError::InvalidBox("the z interval must contain 0 in its interior".into()));
        }
        if x_min <= T::zero() && x_max >= T::zero() {
            return Err(HoverError::InvalidBox("the box must not contain the LVLH origin (x interval contains 0)".into()));
        }
        Ok(Self { x_min, x_max, y_min, y_max, z_min, z_max })
    }

    pub fn x_min(&self) -> T {
        self.x_min
    }
    pub fn x_max(&self) -> T {
        self.x_max
    }
    pub fn y_min(&self) -> T {
        self.y_min
    }
    pub fn y_max(&self) -> T {
        self.y_max
    }
    pub fn z_min(&self) -> T {
        self.z_min
    }
    pub fn z_max(&self) -> T {
        self.z_max
    }

    /// Whether a position lies in the closed box.
    pub fn contains(&self, p: &[T; 3]) -> bool {
        p[0] >= self.x_min
            && p[0] <= self.x_max
            && p[1] >= self.y_min
            && p[1] <= self.y_max
            && p[2] >= self.z_min
            && p[2] <= self.z_max
    }
}

/// Envelope values; `g ≤ 0` means the face constraint holds for all `ν`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeValues<T> {
    pub g_xmin: T,
    pub g_xmax: T,
    pub g_ymin: T,
    pub g_ymax: T,
    pub g_zmin: T,
    pub g_zmax: T,
}

impl<T: Real> EnvelopeValues<T> {
    pub fn max(&self) -> T {
        [self.g_xmax, self.g_ymin, self.g_ymax, self.g_zmin, self.g_zmax]
            .into_iter()
            .fold(self.g_xmin, T::maxr)
    }
}

/// Cross-track and radial envelopes `(g_ymin, g_ymax, g_zmin, g_zmax)` [m²].
pub fn envelope_yz<T: Real>(d: &DState<T>, bx: &HoveringBox<T>, e: T) -> (T, T, T, T) {
    let (gyl, gyu) = envelope_y(d.d4(), d.d5(), bx, e);
    let (gzl, gzu) = envelope_z(d.d1(), d.d2(), bx);
    (gyl, gyu, gzl, gzu)
}

/// `(g_ymin, g_ymax)` for the out-of-plane parameters `[d4, d5]`.
pub fn envelope_y<T: Real>(d4: T, d5: T, bx: &HoveringBox<T>, e: T) -> (T, T) {
    let lo = bx.y_min;
    let hi = bx.y_max;
    let gl = (d4 - e * lo) * (d4 - e * lo) + d5 * d5 - lo * lo;
    let gu = (d4 - e * hi) * (d4 - e * hi) + d5 * d5 - hi * hi;
    (gl, gu)
}

/// `(g_zmin, g_zmax)` for the radial amplitude parameters `[d1, d2]`.
pub fn envelope_z<T: Real>(d1: T, d2: T, bx: &HoveringBox<T>) -> (T, T) {
    let a2 = d1 * d1 + d2 * d2;
    (a2 - bx.z_min * bx.z_min, a2 - bx.z_max * bx.z_max)
}

/// In-track position of the periodic part of `D` at true anomaly `ν`:
/// `x(ν) = [d3 + (d1 sin ν − d2 cos ν)(2 + e cos ν)] / (1 + e cos ν)`.
pub fn in_track_position<T: Real>(d1: T, d2: T, d3: T, nu: T, e: T) -> T {
    let (s, c) = nu.sin_cos();
    (d3 + (d1 * s - d2 * c) * (T::lit(2.0) + e * c)) / (T::one() + e * c)
}

/// Numerator of `dx/dν` (the denominator `ρ²` is positive).
fn in_track_slope_numerator<T: Real>(d1: T, d2: T, d3: T, s: T, c: T, e: T) -> T {
    let two = T::lit(2.0);
    (d1 * c + d2 * s) * (two + e * c) * (T::one() + e * c) + e * s * (d1 * s - d2 * c + d3)
}

/// Minimum and maximum of `x(ν; D)` over one revolution (periodic part only).
pub fn in_track_extrema<T: Real>(d1: T, d2: T, d3: T, e: T) -> (T, T) {
    let n = IN_TRACK_GRID;
    let step = T::two_pi() / T::lit(n as f64);
    let (ds, dc) = step.sin_cos();
    let (mut s, mut c) = (T::zero(), T::one());
    let p0 = in_track_slope_numerator(d1, d2, d3, s, c, e);
    let mut prev = p0;
    let mut lo = in_track_position(d1, d2, d3, T::zero(), e);
    let mut hi = lo;
    let mut any_root = false;
    for k in 1..=n {
        // rotate (c, s) by one grid step; the last step closes the revolution exactly
        let (sn, cn) = if k == n { (T::zero(), T::one()) } else { (s * dc + c * ds, c * dc - s * ds) };
        s = sn;
        c = cn;
        let p = if k == n { p0 } else { in_track_slope_numerator(d1, d2, d3, s, c, e) };
        if (prev > T::zero()) != (p > T::zero()) {
            any_root = true;
            let a = step * T::lit((k - 1) as f64);
            let b = if k == n { T::two_pi() } else { step * T::lit(k as f64) };
            let root = refine_slope_root(d1, d2, d3, e, a, b, prev, p);
            let x = in_track_position(d1, d2, d3, root, e);
            lo = lo.minr(x);
            hi = hi.maxr(x);
        }
        prev = p;
    }
    if !any_root {
        // flat or tangential slope: fall back to the sampled trace
        for k in 0..n {
            let x = in_track_position(d1, d2, d3, step * T::lit(k as f64), e);
            lo = lo.minr(x);
            hi = hi.maxr(x);
        }
    }
    (lo, hi)
}

/// Bracketed root of the slope numerator on `[a, b]` (Illinois false position
/// with a bisection safeguard), to a `ν` tolerance of 1e-10 rad.
#[allow(clippy::too_many_arguments)]
fn refine_slope_root<T: Real>(d1: T, d2: T, d3: T, e: T, mut a: T, mut b: T, mut fa: T, mut fb: T) -> T {
    let tol = T::lit(1e-10).maxr(T::lit(8.0) * T::eps());
    let half = T::lit(0.5);
    let mut side = 0i8;
    for _ in 0..60 {
        if (b - a).abs() <= tol {
            break;
        }
        let denom = fb - fa;
        let mut m = if denom != T::zero() { b - fb * (b - a) / denom } else { (a + b) * half };
        if !(m > a.minr(b) && m < a.maxr(b)) {
            m = (a + b) * half;
        }
        let (s, c) = m.sin_cos();
        let fm = in_track_slope_numerator(d1, d2, d3, s, c, e);
        if fm == T::zero() {
            return m;
        }
        if (fm > T::zero()) == (fb > T::zero()) {
            b = m;
            fb = fm;
            if side == 1 {
                fa *= half;
            }
            side = 1;
        } else {
            a = m;
            fa = fm;
            if side == -1 {
                fb *= half;
            }
            side = -1;
        }
    }
    if fa.abs() < fb.abs() {
        a
    } else {
        b
    }
}

/// In-track envelope `(g_xmin, g_xmax)` [m]: `x_min − min_ν x` and `max_ν x − x_max`.
/// Only the periodic part of `D` is used (`d0` is assumed negligible).
pub fn envelope_x<T: Real>(d: &DState<T>, bx: &HoveringBox<T>, e: T) -> (T, T) {
    envelope_x_parts(d.d1(), d.d2(), d.d3(), bx, e)
}

/// In-track envelope from `(d1, d2, d3)`.
pub fn envelope_x_parts<T: Real>(d1: T, d2: T, d3: T, bx: &HoveringBox<T>, e: T) -> (T, T) {
    let (lo, hi) = in_track_extrema(d1, d2, d3, e);
    (bx.x_min - lo, hi - bx.x_max)
}

/// All six envelope values.
pub fn envelopes<T: Real>(d: &DState<T>, bx: &HoveringBox<T>, e: T) -> EnvelopeValues<T> {
    let (g_ymin, g_ymax, g_zmin, g_zmax) = envelope_yz(d, bx, e);
    let (g_xmin, g_xmax) = envelope_x(d, bx, e);
    EnvelopeValues { g_xmin, g_xmax, g_ymin, g_ymax, g_zmin, g_zmax }
}

/// Membership of the in-plane part `[d0, d1, d2, d3]` in its admissible projection.
pub fn is_admissible_xz<T: Real>(xz: &[T; 4], bx: &HoveringBox<T>, e: T, tol: T) -> bool {
    if xz[0].abs() > tol {
        return false;
    }
    let (gzl, gzu) = envelope_z(xz[1], xz[2], bx);
    if gzl > T::zero() || gzu > T::zero() {
        return false;
    }
    let (gxl, gxu) = envelope_x_parts(xz[1], xz[2], xz[3], bx, e);
    gxl <= T::zero() && gxu <= T::zero()
}

/// Membership of the out-of-plane part `[d4, d5]` in its admissible projection.
pub fn is_admissible_y<T: Real>(y: &[T; 2], bx: &HoveringBox<T>, e: T) -> bool {
    let (gl, gu) = envelope_y(y[0], y[1], bx, e);
    gl <= T::zero() && gu <= T::zero()
}

/// `true` iff `|d0| ≤ tol` and all six envelope values are non-positive.
pub fn is_admissible<T: Real>(d: &DState<T>, bx: &HoveringBox<T>, e: T, tol: T) -> bool {
    is_admissible_y(&d.y(), bx, e) && is_admissible_xz(&d.xz(), bx, e, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nominal_box() -> HoveringBox<f64> {
        HoveringBox::new(50.0, 150.0, -25.0, 25.0, -25.0, 25.0).unwrap()
    }

    #[test]
    fn closed_form_yz_values() {
        let b = nominal_box();
        let (gyl, gyu, gzl, gzu) = envelope_yz(&DState::zero(), &b, 0.0);
        assert_eq!((gyl, gyu, gzl, gzu), (-625.0, -625.0, -625.0, -625.0));
        let (_, gyu, _, _) = envelope_yz(&DState::new([0.0, 0.0, 0.0, 0.0, 25.0, 0.0]), &b, 0.0);
        assert_eq!(gyu, 0.0);
    }

    #[test]
    fn constant_in_track_offsets() {
        let b = nominal_box();
        let (l, u) = envelope_x(&DState::new([0.0, 0.0, 0.0, 100.0, 0.0, 0.0]), &b, 0.0);
        assert!((l + 50.0).abs() < 1e-12 && (u + 50.0).abs() < 1e-12);
        let (_, u) = envelope_x(&DState::new([0.0, 0.0, 0.0, 150.0, 0.0, 0.0]), &b, 0.0);
        assert!(u.abs() < 1e-12);
    }

    #[test]
    fn circular_in_track_amplitude() {
        let b = nominal_box();
        // x(ν) = d3 + 2(d1 sin ν − d2 cos ν) at e = 0
        let (l, u) = envelope_x(&DState::new([0.0, 3.0, 4.0, 100.0, 0.0, 0.0]), &b, 0.0);
        assert!((l - (50.0 - 90.0)).abs() < 1e-10);
        assert!((u - (110.0 - 150.0)).abs() < 1e-10);
    }

    #[test]
    fn membership_examples() {
        let b = nominal_box();
        assert!(!is_admissible(&DState::zero(), &b, 0.0, 1e-6));
        assert!(is_admissible(&DState::new([0.0, 0.0, 0.0, 100.0, 0.0, 0.0]), &b, 0.0, 1e-6));
        assert!(!is_admissible(&DState::new([1e-3, 0.0, 0.0, 100.0, 0.0, 0.0]), &b, 0.0, 1e-6));
    }

    #[test]
    fn box_validation() {
        assert!(HoveringBox::new(50.0, 50.0, -25.0, 25.0, -25.0, 25.0).is_err());
        assert!(HoveringBox::new(-50.0, 150.0, -25.0, 25.0, -25.0, 25.0).is_err());
        assert!(HoveringBox::new(50.0, 150.0, 5.0, 25.0, -25.0, 25.0).is_err());
        assert!(HoveringBox::new(-150.0, -50.0, -25.0, 25.0, -25.0, 25.0).is_ok());
    }

    #[test]
    fn extrema_match_dense_sampling() {
        let (d1, d2, d3, e) = (7.0, -11.0, 95.0, 0.45);
        let (lo, hi) = in_track_extrema(d1, d2, d3, e);
        let mut slo = f64::INFINITY;
        let mut shi = f64::NEG_INFINITY;
        for k in 0..200_000 {
            let x = in_track_position(d1, d2, d3, k as f64 * std::f64::consts::TAU / 200_000.0, e);
            slo = slo.min(x);
            shi = shi.max(x);
        }
        assert!(lo <= slo + 1e-12 && slo - lo < 1e-6);
        assert!(hi >= shi - 1e-12 && hi - shi < 1e-6);
    }
}
