//! Closed-loop run: approach with the fallback stabilizer, then event-based hovering.

use std::collections::VecDeque;
use std::time::Instant;

use hover_core::admissible::is_admissible;
use hover_core::controller::{
    entry_state, estimate_threshold_bounds, evaluate_trigger, fallback_to, reference_state, FallbackPlan,
};
use hover_core::dynamics::{apply_impulse, cartesian_to_d, d_to_cartesian, nu_to_time, propagate_d};
use hover_core::{ControlDecision, DState, Plane, TriggerConfig};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::frames::{
    argument_of_latitude, chaser_from_relative, impulse_to_inertial, lvlh_relative_state, orbit_state,
    osculating_true_anomaly,
};
use crate::propagation::{ForceModel, InertialState};
use crate::scenario::{ApproachTarget, Plant, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Approach,
    Hover,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Approach => "approach",
            Phase::Hover => "hover",
        }
    }
}

/// What happened at one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    /// No controller evaluation (approach coast or pending fallback plan).
    Coast,
    ApproachImpulse,
    Wait,
    InPlane,
    OutOfPlane,
    Coupled,
    /// A fallback plan was computed at this sample (its first impulse, if any, applied).
    Fallback,
    /// A later impulse of a pending fallback plan.
    FallbackImpulse,
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Coast => "coast",
            Decision::ApproachImpulse => "approach_impulse",
            Decision::Wait => "wait",
            Decision::InPlane => "in_plane",
            Decision::OutOfPlane => "out_of_plane",
            Decision::Coupled => "coupled",
            Decision::Fallback => "fallback",
            Decision::FallbackImpulse => "fallback_impulse",
        }
    }

    pub fn is_single_impulse(self) -> bool {
        matches!(self, Decision::InPlane | Decision::OutOfPlane | Decision::Coupled)
    }
}

/// One controller sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub phase: Phase,
    /// Time since the start of the run [s].
    pub t: f64,
    /// Measured (unwrapped) target true anomaly [rad].
    pub nu: f64,
    /// Pre-impulse LVLH relative state [m, m/s].
    pub x: [f64; 6],
    /// Pre-impulse D-state.
    pub d: [f64; 6],
    pub decision: Decision,
    /// Applied impulse [m/s] (zero when none).
    pub dv: [f64; 3],
    pub in_box: bool,
}

/// One applied impulse and its effect under the linear jump map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpulseEvent {
    /// Index into [`SimulationLog::samples`].
    pub sample: usize,
    pub phase: Phase,
    pub kind: Decision,
    pub dv: [f64; 3],
    pub d_before: [f64; 6],
    pub d_after: [f64; 6],
    /// Plane(s) that the trigger rules fired (single impulses only).
    pub fired_xz: bool,
    pub fired_y: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SimulationLog {
    pub samples: Vec<SampleRecord>,
    pub impulses: Vec<ImpulseEvent>,
    /// Sample indices at which a hovering fallback plan was computed.
    pub fallback_events: Vec<usize>,
    /// First hovering sample.
    pub hover_start: Option<usize>,
    /// Thresholds used during hovering `(δ_xz, δ_y)`.
    pub thresholds: (f64, f64),
    /// Estimated threshold bounds, when any threshold was `"auto"`.
    pub threshold_bounds: Option<(f64, f64)>,
    /// Fallback impulses nulled or clipped by the thruster limits.
    pub filtered_plans: usize,
}

/// Hovering-phase performance figures.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    /// `Σ‖ΔV‖₁` over hovering impulses [m/s].
    #[serde(rename = "fuel_J")]
    pub fuel_j: f64,
    pub n_impulses: usize,
    /// Impulses computed before dead-zone filtering.
    pub n_computed_prefilter: usize,
    /// Percentage of hovering samples inside the box.
    pub box_satisfaction: f64,
    pub calls_single: usize,
    pub calls_fallback: usize,
}

/// Wall-clock cost of controller evaluations (kept apart from the log so that
/// logs stay bit-reproducible).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Timing {
    pub controller_seconds: Vec<f64>,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub log: SimulationLog,
    pub metrics: Metrics,
    pub timing: Timing,
}

/// Estimated threshold upper bounds `(bound_xz, bound_y)`.
pub type ThresholdBounds = (f64, f64);

/// Resolves `"auto"` thresholds with the bound estimator.
pub fn resolve_thresholds(sc: &Scenario) -> Result<(TriggerConfig<f64>, Option<ThresholdBounds>)> {
    let mut trigger = sc.trigger;
    let mut bounds = None;
    if sc.delta_xz.is_none() || sc.delta_y.is_none() {
        let b = estimate_threshold_bounds(
            &sc.orbit,
            &sc.hover_box,
            &sc.limits,
            sc.threshold_samples,
            sc.trigger.n_l,
            sc.threshold_seed,
        )?;
        bounds = Some(b);
        if sc.delta_xz.is_none() {
            trigger.delta_xz = sc.threshold_scale * b.0;
        }
        if sc.delta_y.is_none() {
            trigger.delta_y = sc.threshold_scale * b.1;
        }
    }
    Ok((trigger, bounds))
}

struct Pending {
    sample: usize,
    dv: [f64; 3],
}

fn wrap_pi(a: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    a - tau * ((a + std::f64::consts::PI) / tau).floor()
}

/// Runs the approach and hovering phases of a scenario.
pub fn run_closed_loop(sc: &Scenario) -> Result<RunOutput> {
    let started = Instant::now();
    let (trigger, bounds) = resolve_thresholds(sc)?;
    let orbit = &sc.orbit;
    let e = orbit.e();
    let mu = orbit.mu() * 1e9;
    let dnu = trigger.delta_nu_sample;
    let target_model = ForceModel { mu, disturbances: sc.disturbances, ballistic_coefficient: sc.target_ballistic };
    let chaser_model = ForceModel { mu, disturbances: sc.disturbances, ballistic_coefficient: sc.chaser_ballistic };

    let linear = sc.plant == Plant::Linear;
    let mut target = orbit_state(orbit, sc.nu0);
    let mut chaser = chaser_from_relative(&target, &sc.x0)?;
    let mut d_lin = cartesian_to_d(&sc.x0, sc.nu0, orbit);
    let t_ref = nu_to_time(sc.nu0, orbit);
    let sample_time = |k: usize| nu_to_time(sc.nu0 + dnu * k as f64, orbit) - t_ref;
    let hover_samples = (sc.periods * std::f64::consts::TAU / dnu).round() as usize;
    let spacing_samples = |spacing: f64| ((spacing / dnu).round() as usize).max(1);

    let mut log = SimulationLog {
        thresholds: (trigger.delta_xz, trigger.delta_y),
        threshold_bounds: bounds,
        ..Default::default()
    };
    let mut metrics = Metrics::default();
    let mut timing = Timing::default();
    let mut phase = Phase::Approach;
    let mut pending: VecDeque<Pending> = VecDeque::new();
    let mut attempts = 0usize;
    let mut next_plan = 0usize;
    let mut hover_end = usize::MAX;
    let mut hover_in_box = 0usize;
    let mut nu_prev = sc.nu0;
    let mut t_prev = 0.0;

    let measure = |s: &InertialState| {
        if e >= sc.osculating_anomaly_min_e {
            osculating_true_anomaly(s, mu)
        } else {
            argument_of_latitude(s) - orbit.arg_perigee()
        }
    };

    for k in 0.. {
        let t = sample_time(k);
        let (nu, rel, d) = if linear {
            let nu = sc.nu0 + dnu * k as f64;
            d_lin = propagate_d(&d_lin, nu_prev, nu, orbit);
            nu_prev = nu;
            (nu, d_to_cartesian(&d_lin, nu, orbit), d_lin)
        } else {
            if k > 0 {
                let dt = t - t_prev;
                target = target_model.propagate(&target, dt);
                chaser = chaser_model.propagate(&chaser, dt);
            }
            t_prev = t;
            let nu = nu_prev + wrap_pi(measure(&target) - nu_prev);
            nu_prev = nu;
            let rel = lvlh_relative_state(&target, &chaser)?;
            (nu, rel, cartesian_to_d(&rel, nu, orbit))
        };
        let in_box = sc.hover_box.contains(&[rel.x, rel.y, rel.z]);

        let mut decision = Decision::Coast;
        let mut dv = [0.0; 3];
        let mut fired = (false, false);

        if phase == Phase::Approach && pending.is_empty() && is_admissible(&d, &sc.hover_box, e, sc.approach_tol_periodicity) {
            phase = Phase::Hover;
            log.hover_start = Some(k);
            hover_end = k + hover_samples;
        }
        match phase {
            Phase::Approach => {
                if pending.is_empty() && k >= next_plan {
                    if attempts == sc.max_approach_attempts {
                        return Err(SimError::ApproachFailed { attempts });
                    }
                    attempts += 1;
                    let centre = reference_state(orbit, &sc.hover_box)?;
                    let goal = match sc.approach_target {
                        ApproachTarget::Centre => centre,
                        ApproachTarget::Entry => entry_state(&d, &centre, &sc.hover_box, e, sc.approach_entry_depth),
                    };
                    let plan = fallback_to(&d, nu, orbit, &goal, &sc.approach)?;
                    schedule(&plan, k, spacing_samples(plan.spacing), &mut pending);
                    next_plan = k + 2 * spacing_samples(plan.spacing) + hover_samples.min(360);
                }
                if let Some(p) = pop_due(&mut pending, k) {
                    dv = p;
                    decision = Decision::ApproachImpulse;
                }
            }
            Phase::Hover => {
                if k == hover_end {
                    // closing sample: recorded, no decision
                } else if !pending.is_empty() {
                    if let Some(p) = pop_due(&mut pending, k) {
                        dv = p;
                        decision = Decision::FallbackImpulse;
                    }
                } else {
                    let clock = Instant::now();
                    let ev = evaluate_trigger(&d, nu, orbit, &sc.hover_box, &sc.limits, &trigger, &sc.fallback)?;
                    timing.controller_seconds.push(clock.elapsed().as_secs_f64());
                    match ev.decision {
                        ControlDecision::Wait => decision = Decision::Wait,
                        ControlDecision::SingleImpulse { impulse, plane, .. } => {
                            metrics.calls_single += 1;
                            metrics.n_computed_prefilter += 1;
                            dv = impulse.dv;
                            fired = (plane != Plane::OutOfPlane, plane != Plane::InPlane);
                            decision = match plane {
                                Plane::InPlane => Decision::InPlane,
                                Plane::OutOfPlane => Decision::OutOfPlane,
                                Plane::Coupled => Decision::Coupled,
                            };
                        }
                        ControlDecision::FallbackManeuver(plan) => {
                            metrics.calls_fallback += 1;
                            metrics.n_computed_prefilter += plan.impulses.len();
                            if plan.filtered {
                                log.filtered_plans += 1;
                            }
                            log.fallback_events.push(log.samples.len());
                            schedule(&plan, k, spacing_samples(plan.spacing), &mut pending);
                            dv = pop_due(&mut pending, k).unwrap_or([0.0; 3]);
                            decision = Decision::Fallback;
                        }
                    }
                }
                if in_box {
                    hover_in_box += 1;
                }
            }
        }

        let applied = dv.iter().any(|&v| v != 0.0);
        if applied {
            let d_after = apply_impulse(&d, nu, &dv, orbit);
            if linear {
                d_lin = d_after;
            } else {
                chaser.v += impulse_to_inertial(&target, &dv)?;
            }
            log.impulses.push(ImpulseEvent {
                sample: log.samples.len(),
                phase,
                kind: decision,
                dv,
                d_before: d.0,
                d_after: d_after.0,
                fired_xz: fired.0,
                fired_y: fired.1,
            });
            if phase == Phase::Hover {
                metrics.n_impulses += 1;
                metrics.fuel_j += dv[0].abs() + dv[1].abs() + dv[2].abs();
            }
        }
        log.samples.push(SampleRecord {
            phase,
            t,
            nu,
            x: [rel.x, rel.y, rel.z, rel.vx, rel.vy, rel.vz],
            d: d.0,
            decision,
            dv,
            in_box,
        });
        if k == hover_end {
            break;
        }
    }
    metrics.box_satisfaction = 100.0 * hover_in_box as f64 / (hover_samples + 1) as f64;
    timing.total_seconds = started.elapsed().as_secs_f64();
    Ok(RunOutput { log, metrics, timing })
}

fn schedule(plan: &FallbackPlan<f64>, k: usize, spacing: usize, pending: &mut VecDeque<Pending>) {
    for (i, imp) in plan.impulses.iter().enumerate() {
        if !imp.is_zero() {
            pending.push_back(Pending { sample: k + i * spacing, dv: imp.dv });
        }
    }
}

fn pop_due(pending: &mut VecDeque<Pending>, k: usize) -> Option<[f64; 3]> {
    if pending.front().is_some_and(|p| p.sample == k) {
        pending.pop_front().map(|p| p.dv)
    } else {
        None
    }
}

/// Post-impulse contract check of one hovering single impulse: legal
/// magnitude, periodicity after in-plane action, and admissibility of every
/// fired plane (of the full state when all planes outside were fired).
pub fn impulse_contract_violations(
    ev: &ImpulseEvent,
    sc: &Scenario,
    tol_periodicity: f64,
) -> Vec<String> {
    let mut out = Vec::new();
    if !ev.kind.is_single_impulse() {
        return out;
    }
    let e = sc.orbit.e();
    let n = (ev.dv[0].powi(2) + ev.dv[1].powi(2) + ev.dv[2].powi(2)).sqrt();
    if !sc.limits.admits(n) {
        out.push(format!("‖ΔV‖₂ = {n:e} outside [{:e}, {:e}]", sc.limits.dv_min(), sc.limits.dv_max()));
    }
    let after = DState(ev.d_after);
    let before = DState(ev.d_before);
    if ev.kind != Decision::OutOfPlane && after.d0().abs() >= 1e-9 {
        out.push(format!("|d0⁺| = {:e}", after.d0().abs()));
    }
    use hover_core::admissible::{is_admissible_xz, is_admissible_y};
    let xz_out = !is_admissible_xz(&before.xz(), &sc.hover_box, e, tol_periodicity);
    let y_out = !is_admissible_y(&before.y(), &sc.hover_box, e);
    if ev.fired_xz && !is_admissible_xz(&after.xz(), &sc.hover_box, e, tol_periodicity) {
        out.push("in-plane part not admissible after the impulse".into());
    }
    if ev.fired_y && !is_admissible_y(&after.y(), &sc.hover_box, e) {
        out.push("out-of-plane part not admissible after the impulse".into());
    }
    let all_fired = (!xz_out || ev.fired_xz) && (!y_out || ev.fired_y);
    if all_fired && !is_admissible(&after, &sc.hover_box, e, tol_periodicity) {
        out.push("state not admissible after the impulse".into());
    }
    out
}
