//! JSON experiment configuration.

use std::path::{Path, PathBuf};

use gm_core::faq::FaqOptions;
use serde::{Deserialize, Serialize};

use crate::error::{config_error, Result};
use crate::model::ModelSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Trajectory,
    PhaseTransition,
    Disagreement,
    ExpectationCheck,
    TwoStepCheck,
    RestartProbe,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Trajectory => "trajectory",
            Self::PhaseTransition => "phase_transition",
            Self::Disagreement => "disagreement",
            Self::ExpectationCheck => "expectation_check",
            Self::TwoStepCheck => "two_step_check",
            Self::RestartProbe => "restart_probe",
        }
    }
}

/// One experiment. Fields that a given kind does not use are ignored, but
/// unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Random graph model; the expectation check uses `models` instead.
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub models: Vec<ModelSpec>,
    /// Seed counts (trace of the block-diagonal start).
    #[serde(default)]
    pub s_grid: Vec<usize>,
    #[serde(default)]
    pub n_grid: Vec<usize>,
    /// Total disagreement between the start partition and the SBM blocks.
    #[serde(default)]
    pub delta_grid: Vec<usize>,
    /// Target traces of the starting matrix for the two-step check.
    #[serde(default)]
    pub trace_grid: Vec<f64>,
    pub replicates: usize,
    /// Exponent used when reporting theoretical thresholds.
    #[serde(default = "default_theory_delta")]
    pub theory_delta: f64,
    #[serde(default)]
    pub faq: FaqOptions,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Seed count whose individual replicate curves are plotted.
    #[serde(default)]
    pub detail_s: Option<usize>,
    /// Monte Carlo samples per permutation pair.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Random permutation pairs per model.
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    /// Random starts per replicate.
    #[serde(default = "default_restarts")]
    pub restarts: usize,
}

fn default_theory_delta() -> f64 {
    0.1
}

fn default_workers() -> usize {
    1
}

fn default_samples() -> usize {
    10_000
}

fn default_pairs() -> usize {
    20
}

fn default_restarts() -> usize {
    10
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn model(&self) -> Result<&ModelSpec> {
        self.model.as_ref().ok_or_else(|| config_error(format!("{} needs a model", self.kind.name())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(config_error("replicates must be at least 1"));
        }
        if self.workers == 0 {
            return Err(config_error("workers must be at least 1"));
        }
        self.faq.validate()?;
        let need = |ok: bool, what: &str| if ok { Ok(()) } else { Err(config_error(format!("{} needs a non-empty {what}", self.kind.name()))) };
        match self.kind {
            ExperimentKind::Trajectory => {
                self.model()?.validate()?;
                need(!self.s_grid.is_empty(), "s_grid")?;
            }
            ExperimentKind::PhaseTransition => {
                let m = self.model()?;
                m.validate()?;
                if m.model != crate::model::ModelKind::Hom {
                    return Err(config_error("phase_transition runs on the hom model"));
                }
                need(!self.s_grid.is_empty(), "s_grid")?;
                need(!self.n_grid.is_empty(), "n_grid")?;
            }
            ExperimentKind::Disagreement => {
                let m = self.model()?;
                m.validate()?;
                if m.model != crate::model::ModelKind::Sbm {
                    return Err(config_error("disagreement runs on the sbm model"));
                }
                need(!self.delta_grid.is_empty(), "delta_grid")?;
            }
            ExperimentKind::ExpectationCheck => {
                need(!self.models.is_empty(), "models list")?;
                for m in &self.models {
                    m.validate()?;
                }
                if self.samples < 2 || self.pairs == 0 {
                    return Err(config_error("expectation_check needs samples ≥ 2 and pairs ≥ 1"));
                }
            }
            ExperimentKind::TwoStepCheck => {
                self.model()?.validate()?;
                need(!self.trace_grid.is_empty(), "trace_grid")?;
            }
            ExperimentKind::RestartProbe => {
                self.model()?.validate()?;
                if self.restarts == 0 {
                    return Err(config_error("restarts must be at least 1"));
                }
            }
        }
        if self.s_grid.contains(&0) {
            return Err(config_error("s_grid entries must be positive"));
        }
        Ok(())
    }

    /// Worker count after applying the `GM_WORKERS` override.
    pub fn effective_workers(&self) -> usize {
        workers_override(std::env::var("GM_WORKERS").ok().as_deref()).unwrap_or(self.workers)
    }
}

pub(crate) fn workers_override(value: Option<&str>) -> Option<usize> {
    value.and_then(|v| v.trim().parse::<usize>().ok()).filter(|&w| w > 0)
}
