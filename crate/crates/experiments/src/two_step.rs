//! Two-step recovery of the identity from starts of prescribed trace.

use gm_core::ds_init::{barycenter, convex_combination};
use gm_core::faq::two_step_check;
use gm_core::linalg::DoublyStochasticMatrix;
use gm_core::random_graphs::{theory_thresholds, TheoryThresholds};
use serde::Serialize;

use crate::common::{mean, replicate_rng, replicate_seed, run_tasks, spearman, to_csv, Artifact, Artifacts};
use crate::config::ExperimentConfig;
use crate::error::{config_error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoStepRow {
    pub trace: f64,
    pub replicate: usize,
    pub success: bool,
    pub steps_used: usize,
    pub rng_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoStepSummary {
    pub trace: f64,
    pub replicates: usize,
    pub success_rate: f64,
    pub ell: f64,
    pub m: f64,
    pub c: f64,
    pub epsilon: f64,
    pub theory_delta: f64,
    pub binding: bool,
}

#[derive(Debug, Clone)]
pub struct TwoStepStudy {
    pub rows: Vec<TwoStepRow>,
    pub summary: Vec<TwoStepSummary>,
    pub thresholds: TheoryThresholds,
}

/// `(1 − w) I + w J/n` with trace `t`, so `w = (n − t)/(n − 1)`.
pub fn start_with_trace(n: usize, t: f64) -> Result<DoublyStochasticMatrix> {
    if n < 2 || !(1.0..=n as f64).contains(&t) {
        return Err(config_error(format!("trace {t} is outside [1, {n}]")));
    }
    let w = (n as f64 - t) / (n as f64 - 1.0);
    Ok(convex_combination(&[1.0 - w, w], &[&DoublyStochasticMatrix::identity(n), &barycenter(n)?])?)
}

pub fn run_two_step(cfg: &ExperimentConfig) -> Result<TwoStepStudy> {
    let model = cfg.model()?;
    let n = model.require_n()?;
    let starts = cfg.trace_grid.iter().map(|&t| start_with_trace(n, t)).collect::<Result<Vec<_>>>()?;
    let thresholds = theory_thresholds(&model.params(n, &mut replicate_rng(cfg.rng_seed, 0))?, cfg.theory_delta)?;

    let per_replicate = run_tasks(cfg.effective_workers(), cfg.replicates, |replicate| {
        let mut rng = replicate_rng(cfg.rng_seed, replicate);
        let (a, b) = model.sample_pair(n, &mut rng)?;
        cfg.trace_grid
            .iter()
            .zip(&starts)
            .map(|(&trace, d0)| {
                let out = two_step_check(&a, &b, d0, Some(thresholds))?;
                Ok(TwoStepRow {
                    trace,
                    replicate,
                    success: out.converged_to_identity_in_two,
                    steps_used: out.steps_used,
                    rng_seed: replicate_seed(cfg.rng_seed, replicate),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut rows: Vec<TwoStepRow> = per_replicate.into_iter().flatten().collect();
    rows.sort_by(|x, y| {
        let pos = |t: f64| cfg.trace_grid.iter().position(|&g| g == t);
        pos(x.trace).cmp(&pos(y.trace)).then(x.replicate.cmp(&y.replicate))
    });

    let summary = cfg
        .trace_grid
        .iter()
        .map(|&trace| {
            let cell: Vec<&TwoStepRow> = rows.iter().filter(|r| r.trace == trace).collect();
            TwoStepSummary {
                trace,
                replicates: cell.len(),
                success_rate: mean(cell.iter().map(|r| f64::from(u8::from(r.success)))),
                ell: thresholds.ell,
                m: thresholds.m,
                c: thresholds.c,
                epsilon: thresholds.epsilon,
                theory_delta: thresholds.delta,
                binding: thresholds.binding,
            }
        })
        .collect();
    Ok(TwoStepStudy { rows, summary, thresholds })
}

impl TwoStepStudy {
    pub fn rate_at(&self, trace: f64) -> Option<f64> {
        self.summary.iter().find(|r| r.trace == trace).map(|r| r.success_rate)
    }

    /// Rank correlation between start trace and success rate.
    pub fn trend(&self) -> Option<f64> {
        let t: Vec<f64> = self.summary.iter().map(|r| r.trace).collect();
        let rate: Vec<f64> = self.summary.iter().map(|r| r.success_rate).collect();
        spearman(&t, &rate)
    }

    pub fn artifacts(&self) -> Result<Artifacts> {
        Ok(Artifacts(vec![
            Artifact::new("two_step.csv", to_csv(&self.rows)?),
            Artifact::new("two_step_summary.csv", to_csv(&self.summary)?),
        ]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn start_traces() {
        for t in [1.0, 3.5, 10.0] {
            assert!((start_with_trace(10, t).unwrap().trace() - t).abs() < 1e-12);
        }
        assert_eq!(start_with_trace(10, 10.0).unwrap(), DoublyStochasticMatrix::identity(10));
        assert!(start_with_trace(10, 0.5).is_err());
    }

    #[test]
    fn full_trace_always_succeeds() {
        let cfg = ExperimentConfig::from_json(
            r#"{"kind":"two_step_check","model":{"model":"hom","n":40,"p":0.5,"r":0.5},
                "trace_grid":[5,40],"replicates":3}"#,
        )
        .unwrap();
        let study = run_two_step(&cfg).unwrap();
        assert_eq!(study.rate_at(40.0), Some(1.0));
        assert!(study.rows.iter().filter(|r| r.trace == 40.0).all(|r| r.steps_used == 0));
        assert!(!study.thresholds.binding);
    }
}
