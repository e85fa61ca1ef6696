//! Accuracy over a grid of graph sizes and seed counts.

use gm_core::ds_init::block_diag_barycenter;
use gm_core::faq::faq;
use serde::Serialize;

use crate::common::{mean, replicate_rng, replicate_seed, run_tasks, to_csv, Artifact, Artifacts};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::plot::{render_heatmap, Heatmap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Iter1,
    Iter2,
    Final,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Iter1, Stage::Iter2, Stage::Final];

    fn name(self) -> &'static str {
        match self {
            Stage::Iter1 => "iter1",
            Stage::Iter2 => "iter2",
            Stage::Final => "final",
        }
    }
}

/// One run; stage accuracies after one and two steps are `trace(D_k)/n`
/// (held at the last iterate for shorter runs) and the final one is that of
/// the rounded permutation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseRun {
    pub n: usize,
    pub s: usize,
    pub replicate: usize,
    pub rng_seed: u64,
    pub iter1: f64,
    pub iter2: f64,
    pub final_accuracy: f64,
    pub iterations: usize,
}

impl PhaseRun {
    pub fn stage(&self, stage: Stage) -> f64 {
        match stage {
            Stage::Iter1 => self.iter1,
            Stage::Iter2 => self.iter2,
            Stage::Final => self.final_accuracy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatmapRow {
    pub n: usize,
    pub s: usize,
    pub stage: Stage,
    pub mean_accuracy: f64,
    pub replicates: usize,
}

#[derive(Debug, Clone)]
pub struct PhaseStudy {
    pub runs: Vec<PhaseRun>,
    pub heatmap: Vec<HeatmapRow>,
    n_grid: Vec<usize>,
    s_grid: Vec<usize>,
}

pub fn run_phase_transition(cfg: &ExperimentConfig) -> Result<PhaseStudy> {
    let model = cfg.model()?;
    let tasks: Vec<(usize, usize)> =
        cfg.n_grid.iter().flat_map(|&n| (0..cfg.replicates).map(move |rep| (n, rep))).collect();

    let per_task = run_tasks(cfg.effective_workers(), tasks.len(), |t| {
        let (n, replicate) = tasks[t];
        let mut rng = replicate_rng(cfg.rng_seed, replicate);
        let (a, b) = model.sample_pair(n, &mut rng)?;
        let mut runs = Vec::new();
        for &s in cfg.s_grid.iter().filter(|&&s| s <= n) {
            let res = faq(&a, &b, &block_diag_barycenter(n, s)?, &cfg.faq)?;
            let at = |k| res.trajectory.accuracy_at(k).unwrap_or(f64::NAN);
            runs.push(PhaseRun {
                n,
                s,
                replicate,
                rng_seed: replicate_seed(cfg.rng_seed, replicate),
                iter1: at(1),
                iter2: at(2),
                final_accuracy: res.accuracy(),
                iterations: res.iterations,
            });
        }
        Ok(runs)
    })?;
    let runs: Vec<PhaseRun> = per_task.into_iter().flatten().collect();

    let mut heatmap = Vec::new();
    for &n in &cfg.n_grid {
        for &s in cfg.s_grid.iter().filter(|&&s| s <= n) {
            let cell: Vec<&PhaseRun> = runs.iter().filter(|r| r.n == n && r.s == s).collect();
            for stage in Stage::ALL {
                heatmap.push(HeatmapRow {
                    n,
                    s,
                    stage,
                    mean_accuracy: mean(cell.iter().map(|r| r.stage(stage))),
                    replicates: cell.len(),
                });
            }
        }
    }
    Ok(PhaseStudy { runs, heatmap, n_grid: cfg.n_grid.clone(), s_grid: cfg.s_grid.clone() })
}

impl PhaseStudy {
    pub fn mean_accuracy(&self, n: usize, s: usize, stage: Stage) -> Option<f64> {
        self.heatmap.iter().find(|r| r.n == n && r.s == s && r.stage == stage).map(|r| r.mean_accuracy)
    }

    pub fn artifacts(&self) -> Result<Artifacts> {
        let mut files = vec![
            Artifact::new("phase_runs.csv", to_csv(&self.runs)?),
            Artifact::new("heatmap.csv", to_csv(&self.heatmap)?),
        ];
        for stage in Stage::ALL {
            let values = self
                .n_grid
                .iter()
                .map(|&n| self.s_grid.iter().map(|&s| self.mean_accuracy(n, s, stage).unwrap_or(f64::NAN)).collect())
                .collect();
            let map = Heatmap {
                title: format!("Mean accuracy, stage {}", stage.name()),
                x_label: "seeds s".into(),
                y_label: "vertices n".into(),
                x_ticks: self.s_grid.iter().map(ToString::to_string).collect(),
                y_ticks: self.n_grid.iter().map(ToString::to_string).collect(),
                values,
                range: (0.0, 1.0),
            };
            files.push(Artifact::new(format!("heatmap_{}.svg", stage.name()), render_heatmap(&map)?));
        }
        Ok(Artifacts(files))
    }
}
