//! Soft seeding from a vertex partition that disagrees with the SBM blocks.

use gm_core::ds_init::{sample_partition_with_confusion, soft_seed_partition, PartitionPair};
use gm_core::faq::{error_breakdown, faq};
use serde::Serialize;

use crate::common::{mean, replicate_rng, replicate_seed, run_tasks, to_csv, Artifact, Artifacts};
use crate::config::ExperimentConfig;
use crate::error::{config_error, Result};
use crate::plot::{render_line_plot, LinePlot, Series};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisagreementRow {
    pub delta: usize,
    pub replicate: usize,
    pub accuracy: f64,
    pub perfect: bool,
    pub within_d0: usize,
    pub between_d0: usize,
    pub within_sbm: usize,
    pub between_sbm: usize,
    pub rng_seed: u64,
}

/// Per-δ aggregates; error means are taken over imperfect runs only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisagreementSummary {
    pub delta: usize,
    pub replicates: usize,
    pub perfect_rate: f64,
    pub mean_accuracy: f64,
    pub imperfect: usize,
    pub mean_imperfect_accuracy: Option<f64>,
    pub mean_within_d0: Option<f64>,
    pub mean_between_d0: Option<f64>,
    pub mean_within_sbm: Option<f64>,
    pub mean_between_sbm: Option<f64>,
    /// Imperfect runs with at least one error across SBM blocks.
    pub imperfect_with_between_sbm: usize,
}

#[derive(Debug, Clone)]
pub struct DisagreementStudy {
    pub rows: Vec<DisagreementRow>,
    pub summary: Vec<DisagreementSummary>,
}

pub fn run_disagreement(cfg: &ExperimentConfig) -> Result<DisagreementStudy> {
    let model = cfg.model()?;
    let beta = model.partition()?;
    let n = beta.n();
    let k = beta.parts();
    if beta.sizes().iter().any(|&s| s * k != n) {
        return Err(config_error("disagreement study needs equal SBM blocks"));
    }
    if let Some(d) = cfg.delta_grid.iter().find(|&&d| d % (k * (k - 1)) != 0) {
        return Err(config_error(format!("delta = {d} is not a multiple of K(K-1) = {}", k * (k - 1))));
    }

    let per_replicate = run_tasks(cfg.effective_workers(), cfg.replicates, |replicate| {
        let seed = replicate_seed(cfg.rng_seed, replicate);
        let mut rng = replicate_rng(cfg.rng_seed, replicate);
        let (a, b) = model.sample_pair(n, &mut rng)?;
        let mut rows = Vec::new();
        for &delta in &cfg.delta_grid {
            let eta = sample_partition_with_confusion(n, k, delta, &beta, &mut rng)?;
            let d0 = soft_seed_partition(&PartitionPair::new(eta.clone(), eta.clone())?);
            let res = faq(&a, &b, &d0, &cfg.faq)?;
            let errors = error_breakdown(&res.p_star, &eta, &beta)?;
            rows.push(DisagreementRow {
                delta,
                replicate,
                accuracy: res.accuracy(),
                perfect: res.p_star.is_identity(),
                within_d0: errors.within_d0,
                between_d0: errors.between_d0,
                within_sbm: errors.within_sbm,
                between_sbm: errors.between_sbm,
                rng_seed: seed,
            });
        }
        Ok(rows)
    })?;
    let mut rows: Vec<DisagreementRow> = per_replicate.into_iter().flatten().collect();
    rows.sort_by_key(|r| (cfg.delta_grid.iter().position(|&d| d == r.delta), r.replicate));

    let summary = cfg
        .delta_grid
        .iter()
        .map(|&delta| {
            let all: Vec<&DisagreementRow> = rows.iter().filter(|r| r.delta == delta).collect();
            let bad: Vec<&DisagreementRow> = all.iter().copied().filter(|r| !r.perfect).collect();
            let cond = |f: fn(&DisagreementRow) -> f64| (!bad.is_empty()).then(|| mean(bad.iter().map(|r| f(r))));
            DisagreementSummary {
                delta,
                replicates: all.len(),
                perfect_rate: mean(all.iter().map(|r| f64::from(u8::from(r.perfect)))),
                mean_accuracy: mean(all.iter().map(|r| r.accuracy)),
                imperfect: bad.len(),
                mean_imperfect_accuracy: cond(|r| r.accuracy),
                mean_within_d0: cond(|r| r.within_d0 as f64),
                mean_between_d0: cond(|r| r.between_d0 as f64),
                mean_within_sbm: cond(|r| r.within_sbm as f64),
                mean_between_sbm: cond(|r| r.between_sbm as f64),
                imperfect_with_between_sbm: bad.iter().filter(|r| r.between_sbm > 0).count(),
            }
        })
        .collect();
    Ok(DisagreementStudy { rows, summary })
}

impl DisagreementStudy {
    pub fn summary_for(&self, delta: usize) -> Option<&DisagreementSummary> {
        self.summary.iter().find(|r| r.delta == delta)
    }

    pub fn artifacts(&self) -> Result<Artifacts> {
        let plot = LinePlot {
            title: "Final accuracy against partition disagreement".into(),
            x_label: "disagreement delta".into(),
            y_label: "rate".into(),
            series: vec![
                Series {
                    label: "mean accuracy".into(),
                    points: self.summary.iter().map(|r| (r.delta as f64, r.mean_accuracy)).collect(),
                },
                Series {
                    label: "perfect rate".into(),
                    points: self.summary.iter().map(|r| (r.delta as f64, r.perfect_rate)).collect(),
                },
            ],
            y_range: Some((0.0, 1.0)),
            note: None,
            hide_legend: false,
        };
        Ok(Artifacts(vec![
            Artifact::new("disagreement.csv", to_csv(&self.rows)?),
            Artifact::new("disagreement_summary.csv", to_csv(&self.summary)?),
            Artifact::new("disagreement.svg", render_line_plot(&plot)?),
        ]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_study() {
        let cfg = ExperimentConfig::from_json(
            r#"{"kind":"disagreement","model":{"model":"sbm","blocks":[10,10,10],"within_p":0.5,"between_p":0.1,"r":0.5},
                "delta_grid":[0,6],"replicates":3,"rng_seed":1}"#,
        )
        .unwrap();
        let study = run_disagreement(&cfg).unwrap();
        assert_eq!(study.rows.len(), 6);
        for r in &study.rows {
            assert_eq!(r.within_d0 + r.between_d0, r.within_sbm + r.between_sbm);
            assert_eq!(r.perfect, r.within_d0 + r.between_d0 == 0);
        }
        let files = study.artifacts().unwrap();
        assert!(files
            .get("disagreement.csv")
            .unwrap()
            .starts_with("delta,replicate,accuracy,perfect,within_d0,between_d0,within_sbm,between_sbm,rng_seed\n"));
        let bad = cfg.clone();
        let bad = ExperimentConfig { delta_grid: vec![4], ..bad };
        assert!(run_disagreement(&bad).is_err());
    }
}
