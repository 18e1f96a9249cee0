use hover_core::HoverError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("degenerate frame: {0}")]
    Frame(String),
    #[error("controller error: {0}")]
    Controller(#[from] HoverError),
    #[error("approach phase did not reach the admissible set after {attempts} fallback plans")]
    ApproachFailed { attempts: usize },
}

impl SimError {
    /// Whether the failure comes from controller infeasibility rather than input.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, SimError::Controller(_) | SimError::ApproachFailed { .. })
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
