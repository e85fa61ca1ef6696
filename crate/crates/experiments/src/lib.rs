//! Simulation studies for soft-seeded FAQ graph matching.
//!
//! Each experiment is described by a JSON [`ExperimentConfig`]. Replicate `i`
//! draws from the stream seeded with `rng_seed + i`, tasks run on a fixed
//! worker pool and results are merged in task order, so outputs do not depend
//! on scheduling.

pub mod common;
pub mod config;
pub mod disagreement;
pub mod error;
pub mod expectation;
pub mod model;
pub mod phase;
pub mod plot;
pub mod restart;
pub mod trajectory;
pub mod two_step;

pub use common::{Artifact, Artifacts};
pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{ExperimentError, Result};
pub use model::{ModelKind, ModelSpec};

/// Runs any experiment and renders its CSV and SVG outputs.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Artifacts> {
    cfg.validate()?;
    match cfg.kind {
        ExperimentKind::Trajectory => trajectory::run_trajectory(cfg)?.artifacts(),
        ExperimentKind::PhaseTransition => phase::run_phase_transition(cfg)?.artifacts(),
        ExperimentKind::Disagreement => disagreement::run_disagreement(cfg)?.artifacts(),
        ExperimentKind::ExpectationCheck => expectation::expectation_artifacts(&expectation::run_expectation_check(cfg)?),
        ExperimentKind::TwoStepCheck => two_step::run_two_step(cfg)?.artifacts(),
        ExperimentKind::RestartProbe => {
            let (rows, summary) = restart::run_restart_probe(cfg)?;
            restart::restart_artifacts(&rows, &summary)
        }
    }
}
