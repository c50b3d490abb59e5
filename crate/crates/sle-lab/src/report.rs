//! Run reports: every statistic carries its sample count and, where it is an
//! estimate, a standard error.

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

pub const RNG_ID: &str = "chacha8 keyed per-increment via splitmix64(seed, stream, counter)";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummaryRow {
    pub kappa: Option<f64>,
    pub label: String,
    pub value: f64,
    pub n: usize,
    pub se: Option<f64>,
    /// None = reported but not gated.
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub experiment: String,
    pub version: String,
    pub rng: String,
    pub wall_clock_secs: f64,
    pub config: ExperimentConfig,
    pub rows: Vec<SummaryRow>,
    pub pass: bool,
}

impl RunReport {
    pub fn new(config: &ExperimentConfig, rows: Vec<SummaryRow>, wall_clock_secs: f64) -> Self {
        let pass = rows.iter().all(|r| r.pass.unwrap_or(true));
        RunReport {
            experiment: config.experiment.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            rng: RNG_ID.to_string(),
            wall_clock_secs,
            config: config.clone(),
            rows,
            pass,
        }
    }
}
