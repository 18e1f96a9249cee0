//! Event-based impulsive hovering control about an elliptic target orbit.
//!
//! The crate is generic over the floating-point type through [`Real`]; the
//! `*F64` aliases at the crate root cover the common double-precision use.

// `!(a <= b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admissible;
pub mod controller;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod reachability;
pub mod scalar;

pub use admissible::{EnvelopeValues, HoveringBox};
pub use controller::{ControlDecision, FallbackConfig, FallbackPlan, Plane, TriggerConfig, TriggerEvaluation};
pub use dynamics::{CartesianRelativeState, DState, Impulse, TargetOrbit, ThrusterLimits};
pub use error::{HoverError, Result};
pub use scalar::Real;

pub type TargetOrbitF64 = TargetOrbit<f64>;
pub type DStateF64 = DState<f64>;
pub type CartesianRelativeStateF64 = CartesianRelativeState<f64>;
pub type ImpulseF64 = Impulse<f64>;
pub type ThrusterLimitsF64 = ThrusterLimits<f64>;
pub type HoveringBoxF64 = HoveringBox<f64>;
pub type TriggerConfigF64 = TriggerConfig<f64>;
pub type ControlDecisionF64 = ControlDecision<f64>;
pub type FallbackConfigF64 = FallbackConfig<f64>;
