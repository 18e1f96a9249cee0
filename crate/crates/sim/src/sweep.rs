//! Independent closed-loop runs over a parameter grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_loop::{run_closed_loop, Metrics};
use crate::error::{Result, SimError};
use crate::scenario::ScenarioConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Target eccentricity (perigee altitude kept).
    Eccentricity,
    /// Minimum impulse `dv_min` [m/s].
    DeadZone,
    /// Maximum impulse `dv_max` [m/s].
    Saturation,
}

impl SweepParam {
    pub fn apply(self, base: &ScenarioConfig, value: f64) -> ScenarioConfig {
        let mut c = base.clone();
        match self {
            SweepParam::Eccentricity => c.orbit.eccentricity = value,
            SweepParam::DeadZone => c.thrusters.dv_min = value,
            SweepParam::Saturation => c.thrusters.dv_max = value,
        }
        c
    }
}

/// Outcome of one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub outcome: std::result::Result<Metrics, String>,
}

/// Runs every grid value on a pool of `jobs` threads; failures are recorded
/// per row and do not stop the sweep.
pub fn sweep(base: &ScenarioConfig, param: SweepParam, values: &[f64], jobs: usize) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(SimError::Config("sweep grid is empty".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| SimError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        values
            .par_iter()
            .map(|&value| {
                let outcome = param
                    .apply(base, value)
                    .validate()
                    .and_then(|sc| run_closed_loop(&sc))
                    .map(|out| out.metrics)
                    .map_err(|e| e.to_string());
                SweepRow { value, outcome }
            })
            .collect()
    }))
}
