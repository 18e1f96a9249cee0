//! Scenario configuration (TOML, angles in degrees) and its validated form.

use std::path::Path;

use hover_core::dynamics::MU_EARTH_KM3_S2;
use hover_core::{CartesianRelativeState, FallbackConfig, HoveringBox, TargetOrbit, ThrusterLimits, TriggerConfig};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::propagation::{Disturbances, ExponentialAtmosphere};

/// A threshold given either explicitly or as `"auto"` (estimated per run).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThresholdSetting {
    Value(f64),
    Keyword(AutoKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AutoKeyword {
    #[serde(rename = "auto")]
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitSection {
    /// [km³/s²]
    #[serde(default = "default_mu")]
    pub mu: f64,
    /// Perigee altitude [km].
    pub perigee_altitude: f64,
    pub eccentricity: f64,
    /// [deg]
    pub inclination: f64,
    /// [deg]
    #[serde(default)]
    pub raan: f64,
    /// [deg]
    #[serde(default)]
    pub arg_perigee: f64,
    /// Initial true anomaly [deg].
    #[serde(default)]
    pub nu0: f64,
}

fn default_mu() -> f64 {
    MU_EARTH_KM3_S2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    /// LVLH relative state `[x, y, z, vx, vy, vz]` [m, m/s].
    pub state: [f64; 6],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSection {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub z: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThrusterSection {
    /// [m/s]
    pub dv_min: f64,
    /// [m/s]
    pub dv_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriggerSection {
    pub delta_xz: ThresholdSetting,
    pub delta_y: ThresholdSetting,
    /// Sampling step [deg].
    #[serde(default = "default_delta_nu")]
    pub delta_nu: f64,
    #[serde(default = "default_n_l")]
    pub n_l: usize,
    /// [m]
    #[serde(default = "default_tol")]
    pub tol_periodicity: f64,
    /// Multiplier applied to an estimated bound when a threshold is `"auto"`.
    #[serde(default = "default_threshold_scale")]
    pub threshold_scale: f64,
    #[serde(default = "default_threshold_samples")]
    pub threshold_samples: usize,
    #[serde(default = "default_threshold_seed")]
    pub threshold_seed: u64,
}

fn default_delta_nu() -> f64 {
    1.0
}
fn default_n_l() -> usize {
    100
}
fn default_tol() -> f64 {
    1e-6
}
fn default_threshold_scale() -> f64 {
    2.0
}
fn default_threshold_samples() -> usize {
    8
}
fn default_threshold_seed() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FallbackSection {
    /// Spacing between the three impulses [deg].
    #[serde(default = "default_spacing")]
    pub spacing: f64,
    /// Largest approach impulse [m/s].
    #[serde(default = "default_approach_dv_max")]
    pub approach_dv_max: f64,
    /// `|d0|` tolerance that ends the approach phase [m].
    #[serde(default = "default_approach_tol")]
    pub approach_tol_periodicity: f64,
    #[serde(default = "default_attempts")]
    pub max_approach_attempts: usize,
    /// State the approach manoeuvre steers to.
    #[serde(default)]
    pub approach_target: ApproachTarget,
    /// Fraction of the boundary-to-centre distance the entry target lies inside.
    #[serde(default = "default_entry_depth")]
    pub approach_entry_depth: f64,
}

/// Target of the approach manoeuvre.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApproachTarget {
    /// Most interior periodic state of the admissible set.
    #[default]
    Centre,
    /// First admissible state on the way from the current periodic state to the centre.
    Entry,
}

fn default_spacing() -> f64 {
    30.0
}
fn default_approach_dv_max() -> f64 {
    10.0
}
fn default_approach_tol() -> f64 {
    0.05
}
fn default_entry_depth() -> f64 {
    0.1
}
fn default_attempts() -> usize {
    10
}

impl Default for FallbackSection {
    fn default() -> Self {
        Self {
            spacing: default_spacing(),
            approach_dv_max: default_approach_dv_max(),
            approach_tol_periodicity: default_approach_tol(),
            max_approach_attempts: default_attempts(),
            approach_target: ApproachTarget::default(),
            approach_entry_depth: default_entry_depth(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSection {
    pub j2: bool,
    pub drag: bool,
    /// [kg/m³]
    #[serde(default = "default_rho0")]
    pub rho0: f64,
    /// [km]
    #[serde(default = "default_h0")]
    pub h0: f64,
    /// [km]
    #[serde(default = "default_scale_height")]
    pub scale_height: f64,
}

fn default_rho0() -> f64 {
    1.0e-13
}
fn default_h0() -> f64 {
    600.0
}
fn default_scale_height() -> f64 {
    70.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpacecraftSection {
    /// [kg/m²]
    pub target_ballistic: f64,
    /// [kg/m²]
    pub chaser_ballistic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Hovering duration in target periods.
    pub periods: f64,
    /// Below this eccentricity the controller measures `ν` as argument of
    /// latitude minus the nominal argument of perigee.
    #[serde(default = "default_osculating_threshold")]
    pub osculating_anomaly_min_e: f64,
    #[serde(default)]
    pub plant: Plant,
}

/// Dynamics that move the chaser between samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Plant {
    /// Inertial propagation of both spacecraft with the selected disturbances.
    #[default]
    Nonlinear,
    /// Exact linear relative dynamics in `D` (no disturbance input); the
    /// disturbance settings are ignored.
    Linear,
}

fn default_osculating_threshold() -> f64 {
    0.05
}

/// Raw scenario file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub orbit: OrbitSection,
    pub initial: InitialSection,
    #[serde(rename = "box")]
    pub hover_box: BoxSection,
    pub thrusters: ThrusterSection,
    pub trigger: TriggerSection,
    #[serde(default)]
    pub fallback: FallbackSection,
    pub disturbances: DisturbanceSection,
    pub spacecraft: SpacecraftSection,
    pub run: RunSection,
}

/// Validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub orbit: TargetOrbit<f64>,
    /// [rad]
    pub nu0: f64,
    pub x0: CartesianRelativeState<f64>,
    pub hover_box: HoveringBox<f64>,
    pub limits: ThrusterLimits<f64>,
    pub delta_xz: Option<f64>,
    pub delta_y: Option<f64>,
    /// Trigger parameters; thresholds marked `"auto"` hold a placeholder until resolved.
    pub trigger: TriggerConfig<f64>,
    pub threshold_scale: f64,
    pub threshold_samples: usize,
    pub threshold_seed: u64,
    pub fallback: FallbackConfig<f64>,
    pub approach: FallbackConfig<f64>,
    pub approach_tol_periodicity: f64,
    pub max_approach_attempts: usize,
    pub approach_target: ApproachTarget,
    pub approach_entry_depth: f64,
    pub disturbances: Disturbances,
    pub target_ballistic: f64,
    pub chaser_ballistic: f64,
    pub periods: f64,
    pub osculating_anomaly_min_e: f64,
    pub plant: Plant,
}

fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(SimError::Config(msg.into()))
}

fn threshold(s: ThresholdSetting, name: &str) -> Result<Option<f64>> {
    match s {
        ThresholdSetting::Value(v) if v.is_finite() && v <= 0.0 => Ok(Some(v)),
        ThresholdSetting::Value(v) => config(format!("trigger.{name} must be finite and ≤ 0, got {v}")),
        ThresholdSetting::Keyword(AutoKeyword::Auto) => Ok(None),
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| SimError::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config is always representable as TOML")
    }

    /// Checks every field and builds the typed scenario.
    pub fn validate(&self) -> Result<Scenario> {
        let deg = std::f64::consts::PI / 180.0;
        let o = &self.orbit;
        let orbit = TargetOrbit::from_perigee_altitude(
            o.perigee_altitude,
            o.eccentricity,
            o.inclination * deg,
            o.raan * deg,
            o.arg_perigee * deg,
            o.mu,
        )
        .map_err(|e| SimError::Config(e.to_string()))?;
        if !o.nu0.is_finite() {
            return config("orbit.nu0 must be finite");
        }
        if self.initial.state.iter().any(|v| !v.is_finite()) {
            return config("initial.state must be finite");
        }
        let b = &self.hover_box;
        let hover_box = HoveringBox::new(b.x[0], b.x[1], b.y[0], b.y[1], b.z[0], b.z[1])
            .map_err(|e| SimError::Config(e.to_string()))?;
        let limits = ThrusterLimits::new(self.thrusters.dv_min, self.thrusters.dv_max)
            .map_err(|e| SimError::Config(e.to_string()))?;
        let t = &self.trigger;
        let delta_xz = threshold(t.delta_xz, "delta_xz")?;
        let delta_y = threshold(t.delta_y, "delta_y")?;
        let trigger = TriggerConfig::new(
            delta_xz.unwrap_or(0.0),
            delta_y.unwrap_or(0.0),
            t.delta_nu * deg,
            t.n_l,
            t.tol_periodicity,
        )
        .map_err(|e| SimError::Config(e.to_string()))?;
        if !(t.threshold_scale >= 1.0) || !t.threshold_scale.is_finite() {
            return config("trigger.threshold_scale must be finite and ≥ 1");
        }
        if t.threshold_samples == 0 {
            return config("trigger.threshold_samples must be positive");
        }
        let f = &self.fallback;
        if !(f.spacing > 0.0 && f.spacing < 180.0) {
            return config("fallback.spacing must lie in (0, 180) deg");
        }
        let fallback = FallbackConfig { spacing: f.spacing * deg, limits };
        let approach_limits = ThrusterLimits::new(self.thrusters.dv_min, f.approach_dv_max)
            .map_err(|e| SimError::Config(format!("fallback.approach_dv_max: {e}")))?;
        let approach = FallbackConfig { spacing: f.spacing * deg, limits: approach_limits };
        if !(f.approach_tol_periodicity >= 0.0) {
            return config("fallback.approach_tol_periodicity must be non-negative");
        }
        if !(0.0..=1.0).contains(&f.approach_entry_depth) {
            return config("fallback.approach_entry_depth must lie in [0, 1]");
        }
        if f.max_approach_attempts == 0 {
            return config("fallback.max_approach_attempts must be positive");
        }
        let d = &self.disturbances;
        if !(d.scale_height > 0.0) || !(d.rho0 >= 0.0) || !d.h0.is_finite() {
            return config("disturbances: scale_height must be > 0, rho0 ≥ 0");
        }
        let sc = &self.spacecraft;
        if !(sc.target_ballistic > 0.0) || !(sc.chaser_ballistic > 0.0) {
            return config("spacecraft ballistic coefficients must be positive");
        }
        if !(self.run.periods >= 1.0) || !self.run.periods.is_finite() {
            return config("run.periods must be at least 1");
        }
        let s = self.initial.state;
        Ok(Scenario {
            orbit,
            nu0: o.nu0 * deg,
            x0: CartesianRelativeState::new(s[0], s[1], s[2], s[3], s[4], s[5]),
            hover_box,
            limits,
            delta_xz,
            delta_y,
            trigger,
            threshold_scale: t.threshold_scale,
            threshold_samples: t.threshold_samples,
            threshold_seed: t.threshold_seed,
            fallback,
            approach,
            approach_tol_periodicity: f.approach_tol_periodicity,
            max_approach_attempts: f.max_approach_attempts,
            approach_target: f.approach_target,
            approach_entry_depth: f.approach_entry_depth,
            disturbances: Disturbances {
                j2: d.j2,
                drag: d.drag,
                atmosphere: ExponentialAtmosphere {
                    rho0: d.rho0,
                    h0: d.h0 * 1e3,
                    scale_height: d.scale_height * 1e3,
                },
            },
            target_ballistic: sc.target_ballistic,
            chaser_ballistic: sc.chaser_ballistic,
            periods: self.run.periods,
            osculating_anomaly_min_e: self.run.osculating_anomaly_min_e,
            plant: self.run.plant,
        })
    }
}

/// The nominal hovering scenario: 605 km perigee, 98° inclination, a
/// 100 m × 50 m × 50 m box 50 m ahead of the target, ten periods.
pub fn nominal_config(eccentricity: f64) -> ScenarioConfig {
    ScenarioConfig {
        orbit: OrbitSection {
            mu: MU_EARTH_KM3_S2,
            perigee_altitude: 605.0,
            eccentricity,
            inclination: 98.0,
            raan: 0.0,
            arg_perigee: 0.0,
            nu0: 0.0,
        },
        initial: InitialSection { state: [300.0, 400.0, -40.0, 0.0, 0.0, 0.0] },
        hover_box: BoxSection { x: [50.0, 150.0], y: [-25.0, 25.0], z: [-25.0, 25.0] },
        thrusters: ThrusterSection { dv_min: 1e-3, dv_max: 0.1 },
        trigger: TriggerSection {
            delta_xz: ThresholdSetting::Keyword(AutoKeyword::Auto),
            delta_y: ThresholdSetting::Value(-100.0),
            delta_nu: default_delta_nu(),
            n_l: default_n_l(),
            tol_periodicity: default_tol(),
            threshold_scale: default_threshold_scale(),
            threshold_samples: default_threshold_samples(),
            threshold_seed: default_threshold_seed(),
        },
        fallback: FallbackSection::default(),
        disturbances: DisturbanceSection {
            j2: true,
            drag: true,
            rho0: default_rho0(),
            h0: default_h0(),
            scale_height: default_scale_height(),
        },
        spacecraft: SpacecraftSection { target_ballistic: 139.80, chaser_ballistic: 175.90 },
        run: RunSection {
            periods: 10.0,
            osculating_anomaly_min_e: default_osculating_threshold(),
            plant: Plant::Nonlinear,
        },
    }
}
