//! Event-based trigger rules, single-impulse programs, threshold estimation and
//! the tri-impulsive fallback stabilizer.

use nalgebra::{SMatrix, SVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::admissible::{envelope_x_parts, is_admissible, is_admissible_xz, is_admissible_y, HoveringBox};
use crate::dynamics::{control_matrix_bd, transition_d, DState, Impulse, TargetOrbit, ThrusterLimits};
use crate::error::{HoverError, Result};
use crate::reachability::{
    attraction_xz, attraction_y, golden_min, in_plane_basis, reach_xz, reach_y, InPlaneControlBasis, IntervalUnion,
    PlaneReach,
};
use crate::dynamics::propagate_d;
use crate::scalar::Real;

/// Trigger-rule parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriggerConfig<T> {
    /// In-plane threshold (envelope units, `≤ 0`).
    pub delta_xz: T,
    /// Out-of-plane threshold [m², `≤ 0`].
    pub delta_y: T,
    /// True-anomaly sampling step [rad]; also the finite-difference step of `G_ν`.
    pub delta_nu_sample: T,
    /// Number of samples of the region-of-attraction test.
    pub n_l: usize,
    /// Periodicity tolerance on `|d0|` [m].
    pub tol_periodicity: T,
}

impl<T: Real> TriggerConfig<T> {
    pub fn new(delta_xz: T, delta_y: T, delta_nu_sample: T, n_l: usize, tol_periodicity: T) -> Result<Self> {
        if !(delta_xz <= T::zero()) || !(delta_y <= T::zero()) {
            return Err(HoverError::InvalidTrigger("thresholds must be non-positive".into()));
        }
        if !(delta_nu_sample > T::zero()) {
            return Err(HoverError::InvalidTrigger("sampling step must be positive".into()));
        }
        if n_l < 1 {
            return Err(HoverError::InvalidTrigger("n_L must be at least 1".into()));
        }
        if !(tol_periodicity >= T::zero()) {
            return Err(HoverError::InvalidTrigger("periodicity tolerance must be non-negative".into()));
        }
        Ok(Self { delta_xz, delta_y, delta_nu_sample, n_l, tol_periodicity })
    }
}

/// Plane(s) actuated by a single impulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Plane {
    InPlane,
    OutOfPlane,
    Coupled,
}

/// Output of the tri-impulsive fallback.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FallbackPlan<T> {
    /// Impulses at `ν`, `ν + τ`, `ν + 2τ` (zero entries were filtered out by the dead-zone).
    pub impulses: Vec<Impulse<T>>,
    /// Whether any impulse was nulled (dead-zone) or clipped (saturation).
    pub filtered: bool,
    /// Target state reached after the last impulse under linear dynamics.
    pub target: DState<T>,
    /// Impulse spacing actually used [rad].
    pub spacing: T,
}

/// Controller output at one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ControlDecision<T> {
    Wait,
    SingleImpulse {
        impulse: Impulse<T>,
        plane: Plane,
        /// Set when a coupled program had to drop its out-of-plane component.
        deferred_out_of_plane: bool,
    },
    FallbackManeuver(FallbackPlan<T>),
}

/// Indicator values of one plane as seen by the trigger rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneSignal<T> {
    pub reach: PlaneReach<T>,
    /// Forward-difference slope of `G`; only evaluated when `G ≥ δ` and `L > 0`.
    pub g_nu: Option<T>,
    pub fires: bool,
}

/// Full trace of one trigger evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggerEvaluation<T> {
    pub decision: ControlDecision<T>,
    pub xz_inside: bool,
    pub y_inside: bool,
    pub in_attraction: bool,
    pub xz: Option<PlaneSignal<T>>,
    pub y: Option<PlaneSignal<T>>,
}

fn infeasible<T>(what: &str) -> Result<T> {
    Err(HoverError::Infeasible(format!("{what}: empty Λ^S_sat")))
}

/// Minimum-|λ| endpoint of the out-of-plane feasible set.
pub fn best_out_of_plane<T: Real>(set: &IntervalUnion<T>, nu: T) -> Result<Impulse<T>> {
    let best = set.endpoints().into_iter().fold(None, |acc: Option<T>, l| match acc {
        Some(b) if b.abs() <= l.abs() => Some(b),
        _ => Some(l),
    });
    match best {
        Some(l) => Ok(Impulse::new([T::zero(), l, T::zero()], nu)),
        None => infeasible("out-of-plane program"),
    }
}

/// `‖·‖₁`-optimal in-plane impulse over the feasible set: candidates are the
/// interval endpoints and the kinks of the piecewise-linear objective.
pub fn best_in_plane<T: Real>(set: &IntervalUnion<T>, basis: &InPlaneControlBasis<T>, nu: T) -> Result<Impulse<T>> {
    let mut candidates = set.endpoints();
    for k in 0..2 {
        if basis.b_perp[k] != T::zero() {
            let kink = -basis.dv0[k] / basis.b_perp[k];
            if set.contains(kink) {
                candidates.push(kink);
            }
        }
    }
    let cost = |l: T| {
        let dv = basis.impulse(l);
        dv[0].abs() + dv[2].abs()
    };
    let best = candidates.into_iter().fold(None, |acc: Option<(T, T)>, l| {
        let c = cost(l);
        match acc {
            Some((_, bc)) if bc <= c => acc,
            _ => Some((l, c)),
        }
    });
    match best {
        Some((l, _)) => Ok(Impulse::new(basis.impulse(l), nu)),
        None => infeasible("in-plane program"),
    }
}

/// Result of the coupled program.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledSolution<T> {
    pub impulse: Impulse<T>,
    /// The out-of-plane part could not be combined and was dropped.
    pub deferred_out_of_plane: bool,
}

/// Coupled program over the vertex couples of both feasible sets.
pub fn best_coupled<T: Real>(
    set_xz: &IntervalUnion<T>,
    basis: &InPlaneControlBasis<T>,
    set_y: &IntervalUnion<T>,
    limits: &ThrusterLimits<T>,
    nu: T,
) -> Result<CoupledSolution<T>> {
    if set_xz.is_empty() {
        return infeasible("coupled program (in-plane)");
    }
    let mut best: Option<(Impulse<T>, T)> = None;
    for lxz in set_xz.endpoints() {
        for ly in set_y.endpoints() {
            let imp = Impulse::new(basis.coupled_impulse(lxz, ly), nu);
            if !limits.admits(imp.norm2()) {
                continue;
            }
            let c = imp.norm1();
            if best.is_none_or(|(_, bc)| c < bc) {
                best = Some((imp, c));
            }
        }
    }
    match best {
        Some((impulse, _)) => Ok(CoupledSolution { impulse, deferred_out_of_plane: false }),
        None => Ok(CoupledSolution { impulse: best_in_plane(set_xz, basis, nu)?, deferred_out_of_plane: true }),
    }
}

/// Optimal out-of-plane impulse at `ν`.
pub fn solve_out_of_plane<T: Real>(
    d: &DState<T>,
    nu: T,
    orbit: &TargetOrbit<T>,
    bx: &HoveringBox<T>,
    limits: &ThrusterLimits<T>,
) -> Result<Impulse<T>> {
    best_out_of_plane(&reach_y(d, nu, orbit, bx, limits).lambda_sat, nu)
}

/// Optimal in-plane impulse at `ν`.
pub fn solve_in_plane<T: Real>(
    d: &DState<T>,
    nu: T,
    orbit: &TargetOrbit<T>,
    bx: &HoveringBox<T>,
    limits: &ThrusterLimits<T>,
) -> Result<Impulse<T>> {
    let (r, basis) = reach_xz(d, nu, orbit, bx, limits);
    best_in_plane(&r.lambda_sat, &basis, nu)
}

/// Coupled single impulse at `ν` (in-plane priority when no vertex is legal).
pub fn solve_coupled<T: Real>(
    d: &DState<T>,
    nu: T,
    orbit: &TargetOrbit<T>,
    bx: &HoveringBox<T>,
    limits: &ThrusterLimits<T>,
) -> Result<CoupledSolution<T>> {
    let (rxz, basis) = reach_xz(d, nu, orbit, bx, limits);
    let ry = reach_y(d, nu, orbit, bx, limits);
    best_coupled(&rxz.lambda_sat, &basis, &ry.lambda_sat, limits, nu)
}

/// Parameters of the tri-impulsive fallback.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FallbackConfig<T> {
    /// Spacing between the three impulses [rad].
    pub spacing: T,
    /// Limits applied to the fallback impulses (nulling/clipping).
    pub limits: ThrusterLimits<T>,
}

/// Most interior periodic state of the admissible set with `d1 = d4 = d5 = 0`:
/// minimizes the largest normalized envelope value over `(d2, d3)`.
pub fn reference_state<T: Real>(orbit: &TargetOrbit<T>, bx: &HoveringBox<T>) -> Result<DState<T>> {
    let e = orbit.e();
    let hx = (bx.x_max() - bx.x_min()) / T::lit(2.0);
    let zl = bx.z_min().abs().minr(bx.z_max().abs());
    let inner = |d2: T| -> (T, T) {
        let phi = |d3: T| {
            let (gl, gu) = envelope_x_parts(T::zero(), d2, d3, bx, e);
            (gl / hx).maxr(gu / hx).maxr((d2.abs() - zl) / zl)
        };
        let pad = T::lit(3.0) * zl + T::one();
        let lo = bx.x_min() - bx.x_min().abs() * e - pad;
        let hi = bx.x_max() + bx.x_max().abs() * e + pad;
        golden_min(&phi, lo, hi, T::lit(1e-10))
    };
    let (d2, val) = golden_min(&|d2: T| inner(d2).1, -zl, zl, T::lit(1e-10));
    let (d3, _) = inner(d2);
    let d = DState::new([T::zero(), T::zero(), d2, d3, T::zero(), T::zero()]);
    if val >= T::zero() || !is_admissible_xz(&d.xz(), bx, e, T::zero()) {
        return Err(HoverError::Infeasible(
            "the admissible set is empty for this box and eccentricity".into(),
        ));
    }
    Ok(d)
}

/// Admissible entry point on the segment from `reference` toward the periodic
/// projection (`d0 = 0`) of `d`: the last admissible point of the segment,
/// moved back toward `reference` by the fraction `depth ∈ [0, 1]`. Returns the
/// projection itself when it is admissible.
pub fn entry_state<T: Real>(d: &DState<T>, reference: &DState<T>, bx: &HoveringBox<T>, e: T, depth: T) -> DState<T> {
    let mut proj = *d;
    proj.0[0] = T::zero();
    let at = |s: T| {
        let mut out = *reference;
        for i in 1..6 {
            out.0[i] = reference.0[i] + s * (proj.0[i] - reference.0[i]);
        }
        out
    };
    if is_admissible(&proj, bx, e, T::zero()) {
        return proj;
    }
    let (mut lo, mut hi) = (T::zero(), T::one());
    for _ in 0..60 {
        let mid = (lo + hi) / T::lit(2.0);
        if is_admissible(&at(mid), bx, e, T::zero()) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(lo * (T::one() - depth))
}

/// Tri-impulsive fallback: impulses at `ν`, `ν + τ`, `ν + 2τ` driving `D` to
/// the reference state under linear dynamics (minimum-norm solution of the
/// 6×9 system), then filtered by the thruster limits.
pub fn fallback_maneuver<T: Real>(
    d: &DState<T>,
    nu: T,
    orbit: &TargetOrbit<T>,
    bx: &HoveringBox<T>,
    config: &FallbackConfig<T>,
) -> Result<FallbackPlan<T>> {
    let target = reference_state(orbit, bx)?;
    fallback_to(d, nu, orbit, &target, config)
}

/// [`fallback_maneuver`] toward an explicit target state.
pub fn fallback_to<T: Real>(
    d: &DState<T>,
    nu: T,
    orbit: &TargetOrbit<T>,
    target: &DState<T>,
    config: &FallbackConfig<T>,
) -> Result<FallbackPlan<T>> {
    let one_deg = T::pi() / T::lit(180.0);
    let mut spacing = config.spacing;
    for _ in 0..10 {
        if let Some(u) = tri_impulse_solution(d, nu, orbit, target, spacing) {
            let mut filtered = false;
            let mut impulses = Vec::with_capacity(3);
            for k in 0..3 {
                let mut dv = [u[3 * k], u[3 * k + 1], u[3 * k + 2]];
                let n = (dv[0] * dv[0] + dv[1] * dv[1] + dv[2] * dv[2]).sqrt();
                if n < config.limits.dv_min() {
                    if n > T::zero() {
                        filtered = true;
                    }
                    dv = [T::zero(); 3];
                } else if n > config.limits.dv_max() {
                    filtered = true;
                    let s = config.limits.dv_max() / n;
                    dv = [dv[0] * s, dv[1] * s, dv[2] * s];
                }
                impulses.push(Impulse::new(dv, nu + spacing * T::lit(k as f64)));
            }
            return Ok(FallbackPlan { impulses, filtered, target: *target, spacing });
        }
        spacing += one_deg;
    }
    Err(HoverError::Singular("fallback impulse matrix".into()))
}

fn tri_impulse_solution<T: Real>(
    d: &DState<T>,
    nu: T,
    orbit: &TargetOrbit<T>,
    target: &DState<T>,
    spacing: T,
) -> Option<SVector<T, 9>> {
    let nus = [nu, nu + spacing, nu + spacing * T::lit(2.0)];
    let end = nus[2];
    let mut m = SMatrix::<T, 6, 9>::zeros();
    for (k, &nk) in nus.iter().enumerate() {
        let block = transition_d(nk, end, orbit) * control_matrix_bd(nk, orbit);
        m.fixed_view_mut::<6, 3>(0, 3 * k).copy_from(&block);
    }
    let r = target.to_vector() - transition_d(nu, end, orbit) * d.to_vector();
    let mmt = m * m.transpose();
    let chol = mmt.cholesky()?;
    let y = chol.solve(&r);
    let u = m.transpose() * y;
    // reject numerically singular configurations
    let resid = (m * u - r).norm();
    if !resid.is_finite() || resid > T::lit(1e-6).maxr(T::lit(1e-9) * r.norm()) {
        return None;
    }
    Some(u)
}

/// Evaluates the trigger rules at one sample and keeps the intermediate signals.
pub fn evaluate_trigger<T: Real>(
    d: &DState<T>,
    nu: T,
    orbit: &TargetOrbit<T>,
    bx: &HoveringBox<T>,
    limits: &ThrusterLimits<T>,
    config: &TriggerConfig<T>,
    fallback: &FallbackConfig<T>,
) -> Result<TriggerEvaluation<T>> {
    let e = orbit.e();
    let xz_inside = is_admissible_xz(&d.xz(), bx, e, config.tol_periodicity);
    let y_inside = is_admissible_y(&d.y(), bx, e);
    if xz_inside && y_inside {
        return Ok(TriggerEvaluation {
            decision: ControlDecision::Wait,
            xz_inside,
            y_inside,
            in_attraction: true,
            xz: None,
            y: None,
        });
    }
    let dnu = config.delta_nu_sample;
    let next = propagate_d(d, nu, nu + dnu, orbit);

    let mut basis = None;
    let xz = if xz_inside {
        None
    } else {
        let (reach, b) = reach_xz(d, nu, orbit, bx, limits);
        basis = Some(b);
        Some(reach)
    };
    let y = if y_inside { None } else { Some(reach_y(d, nu, orbit, bx, limits)) };

    let in_attraction = xz.as_ref().is_none_or(|r| {
        r.length > T::zero() || attraction_xz(d, nu, orbit, bx, limits, config.n_l)
    }) && y.as_ref().is_none_or(|r| {
        r.length > T::zero() || attraction_y(d, nu, orbit, bx, limits, config.n_l)
    });

    let signal = |reach: PlaneReach<T>, delta: T, next_g: &dyn Fn() -> T| -> PlaneSignal<T> {
        if reach.length > T::zero() && reach.g >= delta {
            let g_nu = (next_g() - reach.g) / dnu;
            let fires = g_nu > T::zero();
            PlaneSignal { reach, g_nu: Some(g_nu), fires }
        } else {
            PlaneSignal { reach, g_nu: None, fires: false }
        }
    };
    let xz_sig = xz.map(|r| signal(r, config.delta_xz, &|| reach_xz(&next, nu + dnu, orbit, bx, limits).0.g));
    let y_sig = y.map(|r| signal(r, config.delta_y, &|| reach_y(&next, nu + dnu, orbit, bx, limits).g));

    if !in_attraction {
        let plan = fallback_maneuver(d, nu, orbit, bx, fallback)?;
        return Ok(TriggerEvaluation {
            decision: ControlDecision::FallbackManeuver(plan),
            xz_inside,
            y_inside,
            in_attraction,
            xz: xz_sig,
            y: y_sig,
        });
    }

    let fire_xz = xz_sig.as_ref().is_some_and(|s| s.fires);
    let fire_y = y_sig.as_ref().is_some_and(|s| s.fires);
    let decision = match (fire_xz, fire_y) {
        (true, true) => {
            let sol = best_coupled(
                &xz_sig.as_ref().expect("fired").reach.lambda_sat,
                basis.as_ref().expect("computed with the in-plane signal"),
                &y_sig.as_ref().expect("fired").reach.lambda_sat,
                limits,
                nu,
            )?;
            let plane = if sol.deferred_out_of_plane { Plane::InPlane } else { Plane::Coupled };
            ControlDecision::SingleImpulse { impulse: sol.impulse, plane, deferred_out_of_plane: sol.deferred_out_of_plane }
        }
        (true, false) => ControlDecision::SingleImpulse {
            impulse: best_in_plane(
                &xz_sig.as_ref().expect("fired").reach.lambda_sat,
                basis.as_ref().expect("computed with the in-plane signal"),
                nu,
            )?,
            plane: Plane::InPlane,
            deferred_out_of_plane: false,
        },
        (false, true) => ControlDecision::SingleImpulse {
            impulse: best_out_of_plane(&y_sig.as_ref().expect("fired").reach.lambda_sat, nu)?,
            plane: Plane::OutOfPlane,
            deferred_out_of_plane: false,
        },
        (false, false) => ControlDecision::Wait,
    };
    Ok(TriggerEvaluation { decision, xz_inside, y_inside, in_attraction, xz: xz_sig, y: y_sig })
}

/// Trigger rules at one sample: wait inside the admissible set, fire a single
/// impulse when a plane's indicator crosses its threshold while increasing,
/// and fall back to the stabilizer outside the region of attraction.
pub fn trigger_step<T: Real>(
    d: &DState<T>,
    nu: T,
    orbit: &TargetOrbit<T>,
    bx: &HoveringBox<T>,
    limits: &ThrusterLimits<T>,
    config: &TriggerConfig<T>,
    fallback: &FallbackConfig<T>,
) -> Result<ControlDecision<T>> {
    evaluate_trigger(d, nu, orbit, bx, limits, config, fallback).map(|ev| ev.decision)
}

/// Monte-Carlo estimate of the threshold upper bounds `(bound_xz, bound_y)`:
/// the infimum over sampled states of the region of attraction (outside the
/// admissible set) of the maximum over one revolution of each plane's `G`,
/// taken over the instants where that plane is reachable.
pub fn estimate_threshold_bounds<T: Real>(
    orbit: &TargetOrbit<T>,
    bx: &HoveringBox<T>,
    limits: &ThrusterLimits<T>,
    sample_count: usize,
    n_l: usize,
    seed: u64,
) -> Result<(T, T)> {
    estimate_threshold_bounds_with_grid(orbit, bx, limits, sample_count, n_l, 360, seed)
}

/// [`estimate_threshold_bounds`] with an explicit `ν` grid size.
pub fn estimate_threshold_bounds_with_grid<T: Real>(
    orbit: &TargetOrbit<T>,
    bx: &HoveringBox<T>,
    limits: &ThrusterLimits<T>,
    sample_count: usize,
    n_l: usize,
    grid: usize,
    seed: u64,
) -> Result<(T, T)> {
    if sample_count == 0 || grid == 0 {
        return Err(HoverError::Sampling("sample_count and grid must be positive".into()));
    }
    let e = orbit.e();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reference = reference_state(orbit, bx)?;
    let hx = (bx.x_max() - bx.x_min()) / T::lit(2.0);
    let zl = bx.z_min().abs().minr(bx.z_max().abs());
    let yl = bx.y_min().abs().maxr(bx.y_max().abs());
    let nus: Vec<T> = (0..grid).map(|k| T::two_pi() * T::lit(k as f64) / T::lit(grid as f64)).collect();
    let mut uni = |a: f64, b: f64| T::lit(rng.random_range(a..b));
    const MAX_REJECTIONS: usize = 100_000;

    let mut bound_xz = T::zero();
    let mut rejections = 0;
    let mut accepted = 0;
    while accepted < sample_count {
        let d = DState::new([
            T::zero(),
            uni(-2.0, 2.0) * zl,
            reference.d2() + uni(-2.0, 2.0) * zl,
            reference.d3() + uni(-2.0, 2.0) * hx,
            T::zero(),
            T::zero(),
        ]);
        let nu0 = uni(0.0, std::f64::consts::TAU);
        let gmax = if is_admissible_xz(&d.xz(), bx, e, T::zero()) || !attraction_xz(&d, nu0, orbit, bx, limits, n_l) {
            None
        } else {
            reachable_max(nus.iter().map(|&nu| reach_xz(&d, nu, orbit, bx, limits).0))
        };
        let Some(gmax) = gmax else {
            rejections += 1;
            if rejections >= MAX_REJECTIONS {
                return Err(HoverError::Sampling("no in-plane region-of-attraction sample found".into()));
            }
            continue;
        };
        accepted += 1;
        bound_xz = if accepted == 1 { gmax } else { bound_xz.minr(gmax) };
    }

    let mut bound_y = T::zero();
    let mut rejections = 0;
    let mut accepted = 0;
    while accepted < sample_count {
        let d = DState::new([T::zero(), T::zero(), T::zero(), T::zero(), uni(-3.0, 3.0) * yl, uni(-3.0, 3.0) * yl]);
        let nu0 = uni(0.0, std::f64::consts::TAU);
        let gmax = if is_admissible_y(&d.y(), bx, e) || !attraction_y(&d, nu0, orbit, bx, limits, n_l) {
            None
        } else {
            reachable_max(nus.iter().map(|&nu| reach_y(&d, nu, orbit, bx, limits)))
        };
        let Some(gmax) = gmax else {
            rejections += 1;
            if rejections >= MAX_REJECTIONS {
                return Err(HoverError::Sampling("no out-of-plane region-of-attraction sample found".into()));
            }
            continue;
        };
        accepted += 1;
        bound_y = if accepted == 1 { gmax } else { bound_y.minr(gmax) };
    }
    Ok((bound_xz, bound_y))
}

/// Largest `G` over the instants where the plane is reachable (`L > 0`);
/// `G` is identically zero elsewhere and carries no information there.
fn reachable_max<T: Real>(reaches: impl Iterator<Item = PlaneReach<T>>) -> Option<T> {
    reaches.filter(|r| r.length > T::zero()).map(|r| r.g).reduce(T::maxr)
}

/// Re-evaluates the firing predicate of one plane (used to audit decisions).
pub fn plane_fires<T: Real>(reach: &PlaneReach<T>, g_next: T, delta: T, dnu: T) -> bool {
    reach.length > T::zero() && reach.g >= delta && (g_next - reach.g) / dnu > T::zero()
}

/// Control basis at `ν` (re-exported for callers reconstructing impulses).
pub fn control_basis<T: Real>(d0: T, nu: T, orbit: &TargetOrbit<T>) -> InPlaneControlBasis<T> {
    in_plane_basis(d0, nu, orbit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admissible::is_admissible;
    use crate::dynamics::{apply_impulse, MU_EARTH_KM3_S2};
    use crate::reachability::Interval;

    fn orbit(e: f64) -> TargetOrbit<f64> {
        TargetOrbit::from_perigee_altitude(605.0, e, 98f64.to_radians(), 0.0, 0.0, MU_EARTH_KM3_S2).unwrap()
    }

    fn nominal_box() -> HoveringBox<f64> {
        HoveringBox::new(50.0, 150.0, -25.0, 25.0, -25.0, 25.0).unwrap()
    }

    fn limits() -> ThrusterLimits<f64> {
        ThrusterLimits::new(1e-3, 0.1).unwrap()
    }

    fn fallback_cfg() -> FallbackConfig<f64> {
        FallbackConfig { spacing: 30f64.to_radians(), limits: ThrusterLimits::new(1e-6, 10.0).unwrap() }
    }

    #[test]
    fn out_of_plane_endpoint_choice() {
        let u = IntervalUnion::from_intervals([Interval::new(0.002, 0.01).unwrap()]);
        assert_eq!(best_out_of_plane(&u, 0.0).unwrap().dv[1], 0.002);
        let u = IntervalUnion::from_intervals([Interval::new(-0.01, -0.003).unwrap(), Interval::new(0.004, 0.02).unwrap()]);
        assert_eq!(best_out_of_plane(&u, 0.0).unwrap().dv[1], -0.003);
        assert!(best_out_of_plane(&IntervalUnion::<f64>::empty(), 0.0).is_err());
    }

    #[test]
    fn in_plane_kink_selected() {
        let basis = InPlaneControlBasis::<f64> { b_perp: [0.6, 0.8], dv0: [0.003, 0.0] };
        // cost |0.6λ + 0.003| + |0.8λ| has its minimum at the kink λ = 0
        let u = IntervalUnion::from_intervals([Interval::new(-0.01, 0.01).unwrap()]);
        let imp = best_in_plane(&u, &basis, 0.0).unwrap();
        assert!((imp.dv[0] - 0.003).abs() < 1e-15 && imp.dv[2].abs() < 1e-15);
    }

    #[test]
    fn coupled_falls_back_to_in_plane() {
        let basis = InPlaneControlBasis { b_perp: [0.0, 1.0], dv0: [0.0, 0.0] };
        let lim = ThrusterLimits::new(1e-3, 0.1).unwrap();
        let sxz = IntervalUnion::from_intervals([Interval::new(0.09, 0.095).unwrap()]);
        let sy = IntervalUnion::from_intervals([Interval::new(0.09, 0.095).unwrap()]);
        let sol = best_coupled(&sxz, &basis, &sy, &lim, 0.0).unwrap();
        assert!(sol.deferred_out_of_plane);
        assert_eq!(sol.impulse.dv[1], 0.0);
        let sy = IntervalUnion::from_intervals([Interval::new(0.002, 0.003).unwrap()]);
        let sol = best_coupled(&sxz, &basis, &sy, &lim, 0.0).unwrap();
        assert!(!sol.deferred_out_of_plane);
        assert_eq!(sol.impulse.dv, [0.0, 0.002, 0.09]);
    }

    #[test]
    fn admissible_state_waits() {
        let d = DState::new([0.0, 0.0, 0.0, 100.0, 0.0, 0.0]);
        let cfg = TriggerConfig::new(-10.0, -100.0, 1f64.to_radians(), 100, 1e-6).unwrap();
        let dec = trigger_step(&d, 0.0, &orbit(0.0), &nominal_box(), &limits(), &cfg, &fallback_cfg()).unwrap();
        assert_eq!(dec, ControlDecision::Wait);
    }

    #[test]
    fn reference_state_is_centre_for_circular_orbit() {
        let r = reference_state(&orbit(0.0), &nominal_box()).unwrap();
        assert!(r.d2().abs() < 1e-6 && (r.d3() - 100.0).abs() < 1e-6, "{r:?}");
        for &e in &[0.3, 0.6] {
            let r = reference_state(&orbit(e), &nominal_box()).unwrap();
            assert!(is_admissible(&r, &nominal_box(), e, 0.0));
        }
    }

    #[test]
    fn fallback_on_target_is_null() {
        let o = orbit(0.2);
        let target = reference_state(&o, &nominal_box()).unwrap();
        let plan = fallback_maneuver(&target, 0.3, &o, &nominal_box(), &fallback_cfg()).unwrap();
        assert!(plan.impulses.iter().all(|i| i.norm2() < 1e-9));
    }

    #[test]
    fn fallback_reaches_target_linearly() {
        let o = orbit(0.3);
        let bx = nominal_box();
        let d = DState::new([2.0, 5.0, -3.0, 140.0, 10.0, -6.0]);
        let nu = 0.4;
        let plan = fallback_maneuver(&d, nu, &o, &bx, &fallback_cfg()).unwrap();
        assert!(!plan.filtered);
        let mut s = d;
        let mut t = nu;
        for imp in &plan.impulses {
            s = propagate_d(&s, t, imp.nu, &o);
            t = imp.nu;
            s = apply_impulse(&s, t, &imp.dv, &o);
        }
        let err = (s.to_vector() - plan.target.to_vector()).amax();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn pure_cross_track_offset_gives_out_of_plane_fallback() {
        let o = orbit(0.0);
        let bx = nominal_box();
        let target = reference_state(&o, &bx).unwrap();
        let mut d = target;
        d.0[4] = 40.0;
        let plan = fallback_maneuver(&d, 0.0, &o, &bx, &fallback_cfg()).unwrap();
        for imp in &plan.impulses {
            assert!(imp.dv[0].abs() < 1e-12 && imp.dv[2].abs() < 1e-12);
        }
        assert!(plan.impulses.iter().any(|i| i.dv[1].abs() > 1e-6));
    }
}
