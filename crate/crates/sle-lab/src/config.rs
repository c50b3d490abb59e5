//! Strict TOML experiment configuration. Unknown keys are rejected and the
//! report echoes every resolved value, so a run is reproducible from its
//! report alone.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    PhaseScan,
    BoundaryClass,
    Mirror,
    ExcursionHull,
    Lambda,
    DistributionTest,
    TraceRender,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ExperimentKind::PhaseScan => "phase_scan",
            ExperimentKind::BoundaryClass => "boundary_class",
            ExperimentKind::Mirror => "mirror",
            ExperimentKind::ExcursionHull => "excursion_hull",
            ExperimentKind::Lambda => "lambda",
            ExperimentKind::DistributionTest => "distribution_test",
            ExperimentKind::TraceRender => "trace_render",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub tol_contact: f64,
    pub tol_height: f64,
    pub exclude_radius: f64,
    pub zero_threshold: f64,
    pub escape_level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub kappa: Vec<f64>,
    pub t_end: f64,
    pub n_steps: usize,
    pub m: f64,
    pub thresholds: Thresholds,
    pub base_seed: u64,
    pub seed_count: usize,
    pub out_dir: PathBuf,
    /// Horizons for the lambda experiment; ignored elsewhere.
    #[serde(default)]
    pub horizons: Vec<f64>,
    /// BESQ dimension for the lambda experiment; ignored elsewhere.
    #[serde(default)]
    pub delta: Option<f64>,
}

impl ExperimentConfig {
    pub fn dt(&self) -> f64 {
        self.t_end / self.n_steps as f64
    }

    /// Every violated field, not just the first.
    pub fn validate(&self) -> Result<(), String> {
        let mut problems = Vec::new();
        if self.seed_count == 0 {
            problems.push("seed_count: must be >= 1".to_string());
        }
        if self.n_steps == 0 {
            problems.push("n_steps: must be >= 1".to_string());
        }
        if !(self.t_end > 0.0) {
            problems.push(format!("t_end: must be positive, got {}", self.t_end));
        }
        if !(self.m > 0.0) {
            problems.push(format!("m: must be positive, got {}", self.m));
        }
        for (name, v) in [
            ("thresholds.tol_contact", self.thresholds.tol_contact),
            ("thresholds.tol_height", self.thresholds.tol_height),
            ("thresholds.exclude_radius", self.thresholds.exclude_radius),
            ("thresholds.zero_threshold", self.thresholds.zero_threshold),
            ("thresholds.escape_level", self.thresholds.escape_level),
        ] {
            if !(v > 0.0) {
                problems.push(format!("{name}: must be positive, got {v}"));
            }
        }
        for k in &self.kappa {
            if !(*k > 0.0) {
                problems.push(format!("kappa: values must be positive, got {k}"));
            }
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d < 2.0) {
                problems.push(format!("delta: must lie in (0, 2), got {d}"));
            }
        }
        for h in &self.horizons {
            if !(*h > 0.0) {
                problems.push(format!("horizons: values must be positive, got {h}"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems.join("\n"))
        }
    }
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    let cfg: ExperimentConfig =
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    cfg.validate().map_err(|e| format!("{}:\n{e}", path.display()))?;
    Ok(cfg)
}
