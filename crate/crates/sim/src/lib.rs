//! Nonlinear closed-loop simulation of event-based hovering: inertial
//! propagation with J2 and drag, LVLH conversions, scenario files, runs and
//! parameter sweeps.

// `!(a <= b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_loop;
pub mod error;
pub mod frames;
pub mod propagation;
pub mod scenario;
pub mod sweep;

pub use closed_loop::{run_closed_loop, Decision, ImpulseEvent, Metrics, Phase, RunOutput, SampleRecord, SimulationLog, Timing};
pub use error::{Result, SimError};
pub use propagation::{propagate_nonlinear, Disturbances, ExponentialAtmosphere, ForceModel, InertialState};
pub use scenario::{nominal_config, Scenario, ScenarioConfig};
pub use sweep::{sweep, SweepParam, SweepRow};
