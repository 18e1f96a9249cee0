//! Single-impulse reachability of the admissible set.
//!
//! An out-of-plane impulse `[0, λ, 0]` moves `D_y` along `B_{D,y}(ν)`. An
//! in-plane impulse is restricted to the family `λ b⊥ + ΔV⁰` that zeroes `d0`
//! after the jump; `λ` is its only free parameter. Every set of admissible
//! control parameters is therefore an interval union in `λ`.

use nalgebra::SMatrix;
use serde::{Deserialize, Serialize};

use crate::admissible::{envelope_x_parts, envelope_y, envelope_z, is_admissible_xz, is_admissible_y, HoveringBox};
use crate::dynamics::{control_matrix_bd, propagate_d, rho, DState, TargetOrbit, ThrusterLimits};
use crate::scalar::Real;

/// Number of probes used to seed the in-plane interval search.
pub const XZ_PROBES: usize = 64;

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval<T> {
    lo: T,
    hi: T,
}

impl<T: Real> Interval<T> {
    /// `None` when `lo > hi` or either bound is not finite.
    pub fn new(lo: T, hi: T) -> Option<Self> {
        if lo.is_finite() && hi.is_finite() && lo <= hi {
            Some(Self { lo, hi })
        } else {
            None
        }
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    pub fn length(&self) -> T {
        self.hi - self.lo
    }

    pub fn contains(&self, x: T) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        Self::new(self.lo.maxr(other.lo), self.hi.minr(other.hi))
    }
}

/// Finite union of sorted, pairwise disjoint closed intervals.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IntervalUnion<T> {
    parts: Vec<Interval<T>>,
}

impl<T: Real> IntervalUnion<T> {
    pub fn empty() -> Self {
        Self { parts: Vec::new() }
    }

    pub fn single(i: Interval<T>) -> Self {
        Self { parts: vec![i] }
    }

    /// Normalizes arbitrary intervals: sorts them and merges overlaps.
    pub fn from_intervals<I: IntoIterator<Item = Interval<T>>>(items: I) -> Self {
        let mut v: Vec<Interval<T>> = items.into_iter().collect();
        v.sort_by(|a, b| a.lo.partial_cmp(&b.lo).expect("finite bounds"));
        let mut parts: Vec<Interval<T>> = Vec::with_capacity(v.len());
        for i in v {
            match parts.last_mut() {
                Some(last) if i.lo <= last.hi => last.hi = last.hi.maxr(i.hi),
                _ => parts.push(i),
            }
        }
        Self { parts }
    }

    pub fn parts(&self) -> &[Interval<T>] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn total_length(&self) -> T {
        self.parts.iter().fold(T::zero(), |acc, i| acc + i.length())
    }

    pub fn contains(&self, x: T) -> bool {
        self.parts.iter().any(|i| i.contains(x))
    }

    /// All interval endpoints in increasing order.
    pub fn endpoints(&self) -> Vec<T> {
        self.parts.iter().flat_map(|i| [i.lo, i.hi]).collect()
    }

    /// Convex hull of the union.
    pub fn hull(&self) -> Option<Interval<T>> {
        match (self.parts.first(), self.parts.last()) {
            (Some(a), Some(b)) => Interval::new(a.lo, b.hi),
            _ => None,
        }
    }

    pub fn intersect_interval(&self, other: &Interval<T>) -> Self {
        Self { parts: self.parts.iter().filter_map(|i| i.intersect(other)).collect() }
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.parts.len() && j < other.parts.len() {
            let a = self.parts[i];
            let b = other.parts[j];
            if let Some(c) = a.intersect(&b) {
                out.push(c);
            }
            if a.hi < b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self { parts: out }
    }
}

/// Kernel direction and particular solution of the `d0`-zeroing condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InPlaneControlBasis<T> {
    /// Unit vector `[x, z]` spanning the kernel of the `d0` row of `B_{D,xz}`.
    pub b_perp: [T; 2],
    /// Minimum-norm `[x, z]` velocity increment that cancels `d0` [m/s].
    pub dv0: [T; 2],
}

impl<T: Real> InPlaneControlBasis<T> {
    /// In-plane impulse `λ b⊥ + ΔV⁰` embedded in LVLH axes `[x, 0, z]`.
    pub fn impulse(&self, lambda: T) -> [T; 3] {
        [lambda * self.b_perp[0] + self.dv0[0], T::zero(), lambda * self.b_perp[1] + self.dv0[1]]
    }

    /// Coupled impulse `[x, λ_y, z]`.
    pub fn coupled_impulse(&self, lambda_xz: T, lambda_y: T) -> [T; 3] {
        [lambda_xz * self.b_perp[0] + self.dv0[0], lambda_y, lambda_xz * self.b_perp[1] + self.dv0[1]]
    }
}

/// Builds the in-plane control basis at `ν` for the current `d0`.
pub fn in_plane_basis<T: Real>(d0: T, nu: T, orbit: &TargetOrbit<T>) -> InPlaneControlBasis<T> {
    let e = orbit.e();
    let (s, _) = nu.sin_cos();
    let r = rho(nu, e);
    // d0 row of B_{D,xz}: [ρ, −e s] / (k² (e² − 1))
    let f = T::one() / (orbit.k2() * (e * e - T::one()));
    let row = [r * f, -e * s * f];
    let nrm = (e * s * e * s + r * r).sqrt();
    let mut b = [e * s / nrm, r / nrm];
    let flip = if b[0].abs() > b[1].abs() {
        b[0] < T::zero()
    } else if b[1].abs() > b[0].abs() {
        b[1] < T::zero()
    } else {
        b[0] < T::zero()
    };
    if flip {
        b = [-b[0], -b[1]];
    }
    let rr = row[0] * row[0] + row[1] * row[1];
    let dv0 = [-d0 * row[0] / rr, -d0 * row[1] / rr];
    InPlaneControlBasis { b_perp: b, dv0 }
}

/// Out-of-plane saturation/dead-zone set `[−dv_max, −dv_min] ∪ [dv_min, dv_max]`.
pub fn lambda_sat_y<T: Real>(limits: &ThrusterLimits<T>) -> IntervalUnion<T> {
    let (lo, hi) = (limits.dv_min(), limits.dv_max());
    IntervalUnion { parts: vec![Interval { lo: -hi, hi: -lo }, Interval { lo, hi }] }
}

/// In-plane saturation/dead-zone set `{λ : dv_min ≤ ‖λ b⊥ + ΔV⁰‖ ≤ dv_max}`.
pub fn lambda_sat_xz<T: Real>(d0: T, nu: T, orbit: &TargetOrbit<T>, limits: &ThrusterLimits<T>) -> IntervalUnion<T> {
    lambda_sat_xz_with(&in_plane_basis(d0, nu, orbit), limits)
}

/// [`lambda_sat_xz`] for a precomputed basis.
pub fn lambda_sat_xz_with<T: Real>(basis: &InPlaneControlBasis<T>, limits: &ThrusterLimits<T>) -> IntervalUnion<T> {
    let b = basis.b_perp;
    let v = basis.dv0;
    let beta = b[0] * v[0] + b[1] * v[1];
    let gamma = v[0] * v[0] + v[1] * v[1];
    let roots = |radius: T| -> Option<(T, T)> {
        let disc = beta * beta - gamma + radius * radius;
        if disc < T::zero() {
            None
        } else {
            let sq = disc.sqrt();
            Some((-beta - sq, -beta + sq))
        }
    };
    let Some((o1, o2)) = roots(limits.dv_max()) else {
        return IntervalUnion::empty();
    };
    let raw: Vec<(T, T)> = match roots(limits.dv_min()) {
        None => vec![(o1, o2)],
        Some((i1, i2)) => vec![(o1, i1), (i2, o2)],
    };
    let admits = |l: T| {
        let dv = basis.impulse(l);
        limits.admits((dv[0] * dv[0] + dv[1] * dv[1] + dv[2] * dv[2]).sqrt())
    };
    IntervalUnion::from_intervals(raw.into_iter().filter_map(|(lo, hi)| settle(lo, hi, &admits)))
}

/// Shrinks `[lo, hi]` by the smallest amounts for which `pred` holds at both
/// ends, so that floating-point evaluation at the endpoints is feasible.
fn settle<T: Real>(lo: T, hi: T, pred: &impl Fn(T) -> bool) -> Option<Interval<T>> {
    if !(lo <= hi) {
        return None;
    }
    let scale = lo.abs().maxr(hi.abs()).maxr(T::eps());
    let mut l = lo;
    let mut step = T::eps() * scale;
    let mut ok = pred(l);
    for _ in 0..80 {
        if ok || l > hi {
            break;
        }
        l = lo + step;
        step *= T::lit(2.0);
        ok = pred(l);
    }
    if !ok || l > hi {
        return None;
    }
    let mut h = hi;
    let mut step = T::eps() * scale;
    let mut ok = pred(h);
    for _ in 0..80 {
        if ok || h < l {
            break;
        }
        h = hi - step;
        step *= T::lit(2.0);
        ok = pred(h);
    }
    if !ok || h < l {
        return None;
    }
    Interval::new(l, h)
}

/// Root interval of `A λ² + B λ + C ≤ 0` with `A > 0`.
fn quadratic_sublevel<T: Real>(a: T, b: T, c: T) -> Option<(T, T)> {
    if a <= T::zero() {
        return None;
    }
    let disc = b * b - T::lit(4.0) * a * c;
    if disc < T::zero() {
        return None;
    }
    let sq = disc.sqrt();
    // numerically stable pair of roots
    let q = if b >= T::zero() { -(b + sq) / T::lit(2.0) } else { (sq - b) / T::lit(2.0) };
    let (r1, r2) = if q == T::zero() { (T::zero(), T::zero()) } else { (q / a, c / q) };
    Some((r1.minr(r2), r1.maxr(r2)))
}

/// Minimum of `A λ² + B λ + C` over a closed interval.
fn quadratic_min_on<T: Real>(a: T, b: T, c: T, i: &Interval<T>) -> T {
    let f = |x: T| (a * x + b) * x + c;
    let mut m = f(i.lo).minr(f(i.hi));
    if a > T::zero() {
        let v = -b / (T::lit(2.0) * a);
        if i.contains(v) {
            m = m.minr(f(v));
        }
    }
    m
}

/// Out-of-plane line `D_y⁺(λ) = D_y + λ B_{D,y}`.
#[derive(Debug, Clone, Copy)]
struct YLine<T> {
    d: [T; 2],
    b: [T; 2],
}

impl<T: Real> YLine<T> {
    fn new(dy: [T; 2], bd: &SMatrix<T, 6, 3>) -> Self {
        Self { d: dy, b: [bd[(4, 1)], bd[(5, 1)]] }
    }

    fn state(&self, lambda: T) -> [T; 2] {
        [self.d[0] + self.b[0] * lambda, self.d[1] + self.b[1] * lambda]
    }

    /// Quadratic coefficients of `g_w(λ)` for the bound `bound`.
    fn quad(&self, bound: T, e: T) -> (T, T, T) {
        let u = self.d[0] - e * bound;
        let w = self.d[1];
        let a = self.b[0] * self.b[0] + self.b[1] * self.b[1];
        (a, T::lit(2.0) * (u * self.b[0] + w * self.b[1]), u * u + w * w - bound * bound)
    }

    fn lambda_s(&self, bx: &HoveringBox<T>, e: T) -> Option<Interval<T>> {
        let (a1, b1, c1) = self.quad(bx.y_min(), e);
        let (a2, b2, c2) = self.quad(bx.y_max(), e);
        let (l1, h1) = quadratic_sublevel(a1, b1, c1)?;
        let (l2, h2) = quadratic_sublevel(a2, b2, c2)?;
        let pred = |l: T| is_admissible_y(&self.state(l), bx, e);
        settle(l1.maxr(l2), h1.minr(h2), &pred)
    }
}

/// In-plane line `D_xz⁺(λ) = D_xz + B_{D,xz} (λ b⊥ + ΔV⁰)`.
#[derive(Debug, Clone, Copy)]
struct XzLine<T> {
    d: [T; 4],
    bd: SMatrix<T, 6, 3>,
    basis: InPlaneControlBasis<T>,
    e: T,
}

impl<T: Real> XzLine<T> {
    fn new(dxz: [T; 4], nu: T, orbit: &TargetOrbit<T>) -> Self {
        Self {
            d: dxz,
            bd: control_matrix_bd(nu, orbit),
            basis: in_plane_basis(dxz[0], nu, orbit),
            e: orbit.e(),
        }
    }

    /// Post-impulse in-plane parameters, evaluated exactly as the jump map does.
    fn state(&self, lambda: T) -> [T; 4] {
        let dv = self.basis.impulse(lambda);
        let mut out = self.d;
        for (i, o) in out.iter_mut().enumerate() {
            *o += self.bd[(i, 0)] * dv[0] + self.bd[(i, 1)] * dv[1] + self.bd[(i, 2)] * dv[2];
        }
        out
    }

    fn gx(&self, lambda: T, bx: &HoveringBox<T>) -> (T, T) {
        let s = self.state(lambda);
        envelope_x_parts(s[1], s[2], s[3], bx, self.e)
    }

    /// `d1⁺² + d2⁺² = A λ² + B λ + C`.
    fn amplitude_quad(&self) -> (T, T, T) {
        let b = self.basis.b_perp;
        let v = self.basis.dv0;
        let mut alpha = [T::zero(); 2];
        let mut beta = [T::zero(); 2];
        for k in 0..2 {
            let i = k + 1;
            alpha[k] = self.bd[(i, 0)] * b[0] + self.bd[(i, 2)] * b[1];
            beta[k] = self.d[i] + self.bd[(i, 0)] * v[0] + self.bd[(i, 2)] * v[1];
        }
        let two = T::lit(2.0);
        (
            alpha[0] * alpha[0] + alpha[1] * alpha[1],
            two * (alpha[0] * beta[0] + alpha[1] * beta[1]),
            beta[0] * beta[0] + beta[1] * beta[1],
        )
    }

    fn z_ok(&self, lambda: T, bx: &HoveringBox<T>) -> bool {
        let s = self.state(lambda);
        let (l, u) = envelope_z(s[1], s[2], bx);
        l <= T::zero() && u <= T::zero()
    }

    /// λ interval satisfying both radial constraints.
    fn z_interval(&self, bx: &HoveringBox<T>) -> Option<Interval<T>> {
        let (a, b, c) = self.amplitude_quad();
        let zl = bx.z_min().abs().minr(bx.z_max().abs());
        let (lo, hi) = quadratic_sublevel(a, b, c - zl * zl)?;
        settle(lo, hi, &|l| self.z_ok(l, bx))
    }

    /// Connected λ interval inside `dom` (assumed radially feasible) on which
    /// the in-track constraints hold.
    fn x_interval(&self, dom: &Interval<T>, bx: &HoveringBox<T>) -> Option<Interval<T>> {
        let h = |l: T| {
            let (a, b) = self.gx(l, bx);
            a.maxr(b)
        };
        let (lo, hi) = (dom.lo(), dom.hi());
        if lo == hi {
            return if h(lo) <= T::zero() { Some(*dom) } else { None };
        }
        let n = XZ_PROBES;
        let width = hi - lo;
        let pt = |j: usize| if j == n { hi } else { lo + width * T::lit(j as f64) / T::lit(n as f64) };
        let mut vals = Vec::with_capacity(n + 1);
        for j in 0..=n {
            vals.push(h(pt(j)));
        }
        let first = vals.iter().position(|v| *v <= T::zero());
        let last = vals.iter().rposition(|v| *v <= T::zero());
        let (seed_lo, seed_hi, left_out, right_out) = match (first, last) {
            (Some(f), Some(l)) => (pt(f), pt(l), f.checked_sub(1).map(pt), if l < n { Some(pt(l + 1)) } else { None }),
            _ => {
                // no feasible probe: the minimum of the convex max-constraint
                // lies between the neighbours of the best probe
                let m = (0..=n).fold(0, |best, j| if vals[j] < vals[best] { j } else { best });
                let a = pt(m.saturating_sub(1));
                let b = pt((m + 1).min(n));
                let (x, fx) = golden_min(&h, a, b, T::lit(1e-9));
                if fx > T::zero() {
                    return None;
                }
                (x, x, if x > lo { Some(a) } else { None }, if x < hi { Some(b) } else { None })
            }
        };
        let left = match left_out {
            Some(out) => boundary(&h, seed_lo, out),
            None => lo,
        };
        let right = match right_out {
            Some(out) => boundary(&h, seed_hi, out),
            None => hi,
        };
        Interval::new(left, right)
    }

    /// Whether the in-track constraints hold on a set of positive length in `dom`.
    fn x_reachable(&self, dom: &Interval<T>, bx: &HoveringBox<T>) -> bool {
        if dom.length() <= T::zero() {
            return false;
        }
        let h = |l: T| {
            let (a, b) = self.gx(l, bx);
            a.maxr(b)
        };
        golden_min_until(&h, dom.lo(), dom.hi(), T::lit(1e-9), |v| v < T::zero()).1 < T::zero()
    }
}

/// Golden-section minimization of a unimodal function on `[a, b]`; returns the
/// best abscissa and value (endpoints included).
pub fn golden_min<T: Real>(f: &impl Fn(T) -> T, a: T, b: T, rel_tol: T) -> (T, T) {
    golden_min_until(f, a, b, rel_tol, |_| false)
}

fn golden_min_until<T: Real>(f: &impl Fn(T) -> T, a: T, b: T, rel_tol: T, stop: impl Fn(T) -> bool) -> (T, T) {
    let fa = f(a);
    let fb = f(b);
    let mut best = if fa <= fb { (a, fa) } else { (b, fb) };
    if stop(best.1) || a == b {
        return best;
    }
    let invphi = T::lit(0.618_033_988_749_894_8);
    let tol = rel_tol * a.abs().maxr(b.abs()).maxr(b - a) + T::lit(4.0) * T::eps() * (b - a);
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - invphi * (hi - lo);
    let mut x2 = lo + invphi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        for (x, fx) in [(x1, f1), (x2, f2)] {
            if fx < best.1 {
                best = (x, fx);
            }
        }
        if stop(best.1) || hi - lo <= tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = f(x2);
        }
    }
    best
}

/// Boundary of `{h ≤ 0}` between a feasible point `inside` and an infeasible
/// point `outside`, to a relative tolerance of 1e-9. Returns a feasible point.
fn boundary<T: Real>(h: &impl Fn(T) -> T, inside: T, outside: T) -> T {
    let (mut a, mut b) = (inside, outside);
    let (mut fa, mut fb) = (h(a), h(b));
    let half = T::lit(0.5);
    let mut side = 0i8;
    for _ in 0..200 {
        let tol = T::lit(1e-9) * a.abs().maxr(b.abs()) * T::lit(1e-3) + T::lit(4.0) * T::eps() * a.abs().maxr(b.abs());
        if (b - a).abs() <= tol {
            break;
        }
        let mut m = if fb != fa { b - fb * (b - a) / (fb - fa) } else { (a + b) * half };
        if !(m > a.minr(b) && m < a.maxr(b)) {
            m = (a + b) * half;
        }
        let fm = h(m);
        if fm <= T::zero() {
            a = m;
            fa = fm;
            if side == -1 {
                fb *= half;
            }
            side = -1;
        } else {
            b = m;
            fb = fm;
            if side == 1 {
                fa *= half;
            }
            side = 1;
        }
    }
    a
}

/// `Λ^S_y`: interval of `λ` for which `D_y + λ B_{D,y}(ν)` is admissible.
pub fn lambda_s_y<T: Real>(dy: &[T; 2], nu: T, orbit: &TargetOrbit<T>, bx: &HoveringBox<T>) -> Option<Interval<T>> {
    YLine::new(*dy, &control_matrix_bd(nu, orbit)).lambda_s(bx, orbit.e())
}

/// `Λ^S_xz`: interval of `λ` for which the `d0`-zeroing impulse
/// `λ b⊥ + ΔV⁰` lands `D_xz` in the admissible projection.
pub fn lambda_s_xz<T: Real>(dxz: &[T; 4], nu: T, orbit: &TargetOrbit<T>, bx: &HoveringBox<T>) -> Option<Interval<T>> {
    let line = XzLine::new(*dxz, nu, orbit);
    let z = line.z_interval(bx)?;
    line.x_interval(&z, bx)
}

/// Reachability of one plane at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneReach<T> {
    /// `Λ^S` (before thruster limits).
    pub lambda_s: Option<Interval<T>>,
    /// `Λ^S_sat = Λ^S ∩ Λ_sat`.
    pub lambda_sat: IntervalUnion<T>,
    /// Total length of `Λ^S_sat`.
    pub length: T,
    /// Proximity-to-unreachability indicator (`≤ 0`, zero when `length = 0`).
    pub g: T,
}

impl<T: Real> PlaneReach<T> {
    fn unreachable(lambda_s: Option<Interval<T>>) -> Self {
        Self { lambda_s, lambda_sat: IntervalUnion::empty(), length: T::zero(), g: T::zero() }
    }
}

/// Out-of-plane reachability at `ν`.
pub fn reach_y<T: Real>(d: &DState<T>, nu: T, orbit: &TargetOrbit<T>, bx: &HoveringBox<T>, limits: &ThrusterLimits<T>) -> PlaneReach<T> {
    let e = orbit.e();
    let line = YLine::new(d.y(), &control_matrix_bd(nu, orbit));
    let Some(ls) = line.lambda_s(bx, e) else {
        return PlaneReach::unreachable(None);
    };
    let sat = lambda_sat_y(limits).intersect_interval(&ls);
    let length = sat.total_length();
    if length <= T::zero() {
        return PlaneReach { lambda_s: Some(ls), lambda_sat: sat, length: T::zero(), g: T::zero() };
    }
    let mut g = -T::max_value().unwrap_or(T::lit(f64::MAX));
    for bound in [bx.y_min(), bx.y_max()] {
        let (a, b, c) = line.quad(bound, e);
        let m = sat.parts().iter().map(|i| quadratic_min_on(a, b, c, i)).fold(T::lit(f64::INFINITY), T::minr);
        g = g.maxr(m);
    }
    PlaneReach { lambda_s: Some(ls), lambda_sat: sat, length, g: g.minr(T::zero()) }
}

/// In-plane reachability at `ν`, together with the control basis used.
pub fn reach_xz<T: Real>(
    d: &DState<T>,
    nu: T,
    orbit: &TargetOrbit<T>,
    bx: &HoveringBox<T>,
    limits: &ThrusterLimits<T>,
) -> (PlaneReach<T>, InPlaneControlBasis<T>) {
    let line = XzLine::new(d.xz(), nu, orbit);
    let basis = line.basis;
    let sat_full = lambda_sat_xz_with(&basis, limits);
    let (Some(z), Some(hull)) = (line.z_interval(bx), sat_full.hull()) else {
        return (PlaneReach::unreachable(None), basis);
    };
    // only the part of Λ^S inside the thruster-feasible hull matters
    let Some(dom) = z.intersect(&hull) else {
        return (PlaneReach::unreachable(None), basis);
    };
    let Some(ls) = line.x_interval(&dom, bx) else {
        return (PlaneReach::unreachable(None), basis);
    };
    let sat = sat_full.intersect_interval(&ls);
    let length = sat.total_length();
    if length <= T::zero() {
        return (PlaneReach { lambda_s: Some(ls), lambda_sat: sat, length: T::zero(), g: T::zero() }, basis);
    }
    let (a, b, c) = line.amplitude_quad();
    let mut g = -T::max_value().unwrap_or(T::lit(f64::MAX));
    for bound in [bx.z_min(), bx.z_max()] {
        let m = sat
            .parts()
            .iter()
            .map(|i| quadratic_min_on(a, b, c - bound * bound, i))
            .fold(T::lit(f64::INFINITY), T::minr);
        g = g.maxr(m);
    }
    // in-track minima: an evaluation anywhere in the set bounds the minimum
    // from above, which lets constraints that cannot raise the maximum be skipped
    let mut upper = [T::lit(f64::INFINITY); 2];
    for i in sat.parts() {
        for l in [i.lo(), i.hi(), (i.lo() + i.hi()) / T::lit(2.0)] {
            let (gl, gu) = line.gx(l, bx);
            upper[0] = upper[0].minr(gl);
            upper[1] = upper[1].minr(gu);
        }
    }
    let mut order = [0usize, 1];
    if upper[1] > upper[0] {
        order = [1, 0];
    }
    for w in order {
        if upper[w] <= g {
            continue;
        }
        let f = |l: T| {
            let v = line.gx(l, bx);
            if w == 0 {
                v.0
            } else {
                v.1
            }
        };
        let m = sat
            .parts()
            .iter()
            .map(|i| convex_min_on(&f, i))
            .fold(T::lit(f64::INFINITY), T::minr);
        g = g.maxr(m);
    }
    (PlaneReach { lambda_s: Some(ls), lambda_sat: sat, length, g: g.minr(T::zero()) }, basis)
}

/// Minimum of a convex function over an interval (golden-section, 1e-9 relative).
fn convex_min_on<T: Real>(f: &impl Fn(T) -> T, i: &Interval<T>) -> T {
    if i.length() <= T::zero() {
        return f(i.lo());
    }
    // one-sided slope tests catch the common case of a minimum at an endpoint
    let d = i.length() * T::lit(1e-7);
    let flo = f(i.lo());
    if f(i.lo() + d) >= flo {
        return flo;
    }
    let fhi = f(i.hi());
    if f(i.hi() - d) >= fhi {
        return fhi;
    }
    golden_min(f, i.lo(), i.hi(), T::lit(1e-9)).1
}

/// Whether `Λ^S_sat,xz` has positive length at `ν` (cheaper than [`reach_xz`]).
pub fn reachable_xz<T: Real>(d: &DState<T>, nu: T, orbit: &TargetOrbit<T>, bx: &HoveringBox<T>, limits: &ThrusterLimits<T>) -> bool {
    let line = XzLine::new(d.xz(), nu, orbit);
    let Some(z) = line.z_interval(bx) else {
        return false;
    };
    let sat = lambda_sat_xz_with(&line.basis, limits).intersect_interval(&z);
    sat.parts().iter().any(|i| line.x_reachable(i, bx))
}

/// Whether `Λ^S_sat,y` has positive length at `ν`.
pub fn reachable_y<T: Real>(d: &DState<T>, nu: T, orbit: &TargetOrbit<T>, bx: &HoveringBox<T>, limits: &ThrusterLimits<T>) -> bool {
    match YLine::new(d.y(), &control_matrix_bd(nu, orbit)).lambda_s(bx, orbit.e()) {
        Some(ls) => lambda_sat_y(limits).intersect_interval(&ls).total_length() > T::zero(),
        None => false,
    }
}

/// Snapshot of both planes' reachability indicators at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachabilityReport<T> {
    pub lambda_sat_xz: IntervalUnion<T>,
    pub lambda_sat_y: IntervalUnion<T>,
    pub l_xz: T,
    pub l_y: T,
    pub g_xz: T,
    pub g_y: T,
    pub g_nu_xz: T,
    pub g_nu_y: T,
    pub basis: InPlaneControlBasis<T>,
}

/// Indicators at `ν` with forward-difference slopes over `dnu`.
pub fn indicators<T: Real>(
    d: &DState<T>,
    nu: T,
    orbit: &TargetOrbit<T>,
    bx: &HoveringBox<T>,
    limits: &ThrusterLimits<T>,
    dnu: T,
) -> ReachabilityReport<T> {
    let (xz, basis) = reach_xz(d, nu, orbit, bx, limits);
    let y = reach_y(d, nu, orbit, bx, limits);
    let next = propagate_d(d, nu, nu + dnu, orbit);
    let (xz1, _) = reach_xz(&next, nu + dnu, orbit, bx, limits);
    let y1 = reach_y(&next, nu + dnu, orbit, bx, limits);
    ReachabilityReport {
        l_xz: xz.length,
        l_y: y.length,
        g_xz: xz.g,
        g_y: y.g,
        g_nu_xz: (xz1.g - xz.g) / dnu,
        g_nu_y: (y1.g - y.g) / dnu,
        lambda_sat_xz: xz.lambda_sat,
        lambda_sat_y: y.lambda_sat,
        basis,
    }
}

/// Whether the in-plane part can reach its admissible projection with one
/// legal impulse at some sample of the next revolution. The current instant is
/// tested first, then `ν_p = ν + 2πp/n_L` for `p = 1..n_L`, propagating `D`.
pub fn attraction_xz<T: Real>(
    d: &DState<T>,
    nu: T,
    orbit: &TargetOrbit<T>,
    bx: &HoveringBox<T>,
    limits: &ThrusterLimits<T>,
    n_l: usize,
) -> bool {
    if reachable_xz(d, nu, orbit, bx, limits) {
        return true;
    }
    (1..=n_l).any(|p| {
        let nup = nu + T::two_pi() * T::lit(p as f64) / T::lit(n_l as f64);
        reachable_xz(&propagate_d(d, nu, nup, orbit), nup, orbit, bx, limits)
    })
}

/// Out-of-plane counterpart of [`attraction_xz`].
pub fn attraction_y<T: Real>(
    d: &DState<T>,
    nu: T,
    orbit: &TargetOrbit<T>,
    bx: &HoveringBox<T>,
    limits: &ThrusterLimits<T>,
    n_l: usize,
) -> bool {
    if reachable_y(d, nu, orbit, bx, limits) {
        return true;
    }
    (1..=n_l).any(|p| {
        let nup = nu + T::two_pi() * T::lit(p as f64) / T::lit(n_l as f64);
        reachable_y(d, nup, orbit, bx, limits)
    })
}

/// Sampled region-of-attraction test: both planes must be single-impulse
/// reachable at some sample of the next revolution.
pub fn in_region_of_attraction<T: Real>(
    d: &DState<T>,
    nu: T,
    orbit: &TargetOrbit<T>,
    bx: &HoveringBox<T>,
    limits: &ThrusterLimits<T>,
    n_l: usize,
) -> bool {
    attraction_xz(d, nu, orbit, bx, limits, n_l) && attraction_y(d, nu, orbit, bx, limits, n_l)
}

/// Region-of-attraction test restricted to the planes that are outside their
/// admissible projection (a plane already inside needs no impulse).
pub fn in_region_of_attraction_outside_planes<T: Real>(
    d: &DState<T>,
    nu: T,
    orbit: &TargetOrbit<T>,
    bx: &HoveringBox<T>,
    limits: &ThrusterLimits<T>,
    n_l: usize,
    tol: T,
) -> bool {
    let e = orbit.e();
    let xz_ok = is_admissible_xz(&d.xz(), bx, e, tol) || attraction_xz(d, nu, orbit, bx, limits, n_l);
    xz_ok && (is_admissible_y(&d.y(), bx, e) || attraction_y(d, nu, orbit, bx, limits, n_l))
}

/// `g` values of the out-of-plane envelope after an out-of-plane impulse.
pub fn y_envelope_after<T: Real>(dy: &[T; 2], lambda: T, nu: T, orbit: &TargetOrbit<T>, bx: &HoveringBox<T>) -> (T, T) {
    let s = YLine::new(*dy, &control_matrix_bd(nu, orbit)).state(lambda);
    envelope_y(s[0], s[1], bx, orbit.e())
}
