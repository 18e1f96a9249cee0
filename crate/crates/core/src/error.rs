use thiserror::Error;

/// Errors raised by the controller math.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HoverError {
    #[error("invalid orbit: {0}")]
    InvalidOrbit(String),
    #[error("invalid hovering box: {0}")]
    InvalidBox(String),
    #[error("invalid thruster limits: dv_min = {dv_min}, dv_max = {dv_max}")]
    InvalidLimits { dv_min: f64, dv_max: f64 },
    #[error("invalid trigger configuration: {0}")]
    InvalidTrigger(String),
    #[error("Kepler iteration did not converge for mean anomaly {mean_anomaly}")]
    KeplerNonConvergence { mean_anomaly: f64 },
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("infeasible single-impulse program: {0}")]
    Infeasible(String),
    #[error("sampling failed: {0}")]
    Sampling(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, HoverError>;
