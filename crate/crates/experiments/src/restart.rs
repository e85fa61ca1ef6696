//! Local maxima reached from random doubly stochastic starts.

use gm_core::ds_init::RandomDsMethod;
use gm_core::faq::random_restart_probe;
use gm_core::linalg::{permutation_objective, PermutationMatrix};
use serde::Serialize;

use crate::common::{replicate_rng, replicate_seed, run_tasks, to_csv, Artifact, Artifacts};
use crate::config::ExperimentConfig;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartRow {
    pub replicate: usize,
    pub rank: usize,
    pub start: usize,
    pub objective: f64,
    pub accuracy: f64,
    pub iterations: usize,
    pub rng_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartSummary {
    pub replicate: usize,
    pub best_objective: f64,
    /// Objective of the true correspondence.
    pub truth_objective: f64,
    pub gap_to_next: f64,
    pub best_accuracy: f64,
    pub distinct_objectives: usize,
}

pub fn run_restart_probe(cfg: &ExperimentConfig) -> Result<(Vec<RestartRow>, Vec<RestartSummary>)> {
    let model = cfg.model()?;
    let n = model.require_n()?;
    let per_replicate = run_tasks(cfg.effective_workers(), cfg.replicates, |replicate| {
        let seed = replicate_seed(cfg.rng_seed, replicate);
        let mut rng = replicate_rng(cfg.rng_seed, replicate);
        let (a, b) = model.sample_pair(n, &mut rng)?;
        let probe = random_restart_probe(&a, &b, cfg.restarts, RandomDsMethod::SinkhornOfUniform, &cfg.faq, &mut rng)?;
        let rows: Vec<RestartRow> = probe
            .runs
            .iter()
            .enumerate()
            .map(|(rank, run)| RestartRow {
                replicate,
                rank,
                start: run.start,
                objective: run.objective,
                accuracy: run.result.accuracy(),
                iterations: run.result.iterations,
                rng_seed: seed,
            })
            .collect();
        let mut objectives: Vec<f64> = rows.iter().map(|r| r.objective).collect();
        objectives.dedup();
        let summary = RestartSummary {
            replicate,
            best_objective: rows[0].objective,
            truth_objective: permutation_objective(&a, &b, &PermutationMatrix::identity(n))? as f64,
            gap_to_next: probe.gap_to_next,
            best_accuracy: rows[0].accuracy,
            distinct_objectives: objectives.len(),
        };
        Ok((rows, summary))
    })?;
    let (rows, summary): (Vec<Vec<RestartRow>>, Vec<RestartSummary>) = per_replicate.into_iter().unzip();
    Ok((rows.into_iter().flatten().collect(), summary))
}

pub fn restart_artifacts(rows: &[RestartRow], summary: &[RestartSummary]) -> Result<Artifacts> {
    Ok(Artifacts(vec![
        Artifact::new("restart_probe.csv", to_csv(rows)?),
        Artifact::new("restart_summary.csv", to_csv(summary)?),
    ]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_are_sorted() {
        let cfg = ExperimentConfig::from_json(
            r#"{"kind":"restart_probe","model":{"model":"hom","n":20,"p":0.5,"r":0.8},"replicates":2,"restarts":4}"#,
        )
        .unwrap();
        let (rows, summary) = run_restart_probe(&cfg).unwrap();
        assert_eq!(rows.len(), 8);
        assert_eq!(summary.len(), 2);
        for w in rows.windows(2).filter(|w| w[0].replicate == w[1].replicate) {
            assert!(w[0].objective >= w[1].objective);
        }
    }
}
