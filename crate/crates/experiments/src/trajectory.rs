//! Accuracy trajectories from block-diagonal soft-seeded starts.

use gm_core::ds_init::block_diag_barycenter;
use gm_core::faq::{faq, StopReason};
use serde::Serialize;

use crate::common::{mean, replicate_seed, run_tasks, to_csv, Artifact, Artifacts, replicate_rng};
use crate::config::ExperimentConfig;
use crate::error::{config_error, Result};
use crate::plot::{render_line_plot, LinePlot, Series};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub model: &'static str,
    pub s: usize,
    pub replicate: usize,
    pub iteration: usize,
    pub accuracy: f64,
    pub objective: f64,
    pub alpha: Option<f64>,
    pub rng_seed: u64,
}

/// Outcome of one run after rounding.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub model: &'static str,
    pub s: usize,
    pub replicate: usize,
    pub rng_seed: u64,
    pub final_accuracy: f64,
    pub iterations: usize,
    pub converged_at_permutation: bool,
    pub stop_reason: StopReason,
}

impl RunOutcome {
    pub fn perfect(&self) -> bool {
        self.final_accuracy == 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryMeanRow {
    pub model: &'static str,
    pub s: usize,
    pub iteration: usize,
    pub mean_accuracy: f64,
    pub replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySummaryRow {
    pub model: &'static str,
    pub s: usize,
    pub replicates: usize,
    pub perfect: usize,
    pub mean_final_accuracy: f64,
    pub max_imperfect_accuracy: Option<f64>,
    pub mean_iterations: f64,
}

#[derive(Debug, Clone)]
pub struct TrajectoryStudy {
    pub rows: Vec<TrajectoryRow>,
    pub outcomes: Vec<RunOutcome>,
    pub means: Vec<TrajectoryMeanRow>,
    pub summary: Vec<TrajectorySummaryRow>,
    detail_s: Option<usize>,
}

pub fn run_trajectory(cfg: &ExperimentConfig) -> Result<TrajectoryStudy> {
    let model = cfg.model()?;
    let n = model.require_n()?;
    if let Some(&s) = cfg.s_grid.iter().find(|&&s| s > n) {
        return Err(config_error(format!("s = {s} exceeds n = {n}")));
    }
    let starts = cfg.s_grid.iter().map(|&s| block_diag_barycenter(n, s)).collect::<Result<Vec<_>, _>>()?;
    let id = model.id();

    let per_replicate = run_tasks(cfg.effective_workers(), cfg.replicates, |replicate| {
        let seed = replicate_seed(cfg.rng_seed, replicate);
        let mut rng = replicate_rng(cfg.rng_seed, replicate);
        let (a, b) = model.sample_pair(n, &mut rng)?;
        let mut rows = Vec::new();
        let mut outcomes = Vec::new();
        for (&s, d0) in cfg.s_grid.iter().zip(&starts) {
            let res = faq(&a, &b, d0, &cfg.faq)?;
            for rec in res.trajectory.records() {
                rows.push(TrajectoryRow {
                    model: id,
                    s,
                    replicate,
                    iteration: rec.iter,
                    accuracy: rec.accuracy,
                    objective: rec.objective,
                    alpha: rec.alpha,
                    rng_seed: seed,
                });
            }
            outcomes.push(RunOutcome {
                model: id,
                s,
                replicate,
                rng_seed: seed,
                final_accuracy: res.accuracy(),
                iterations: res.iterations,
                converged_at_permutation: res.converged_at_permutation,
                stop_reason: res.stop_reason,
            });
        }
        Ok((rows, outcomes))
    })?;

    let mut rows = Vec::new();
    let mut outcomes = Vec::new();
    for (r, o) in per_replicate {
        rows.extend(r);
        outcomes.extend(o);
    }
    rows.sort_by_key(|r| (cfg.s_grid.iter().position(|&s| s == r.s), r.replicate, r.iteration));
    outcomes.sort_by_key(|o| (cfg.s_grid.iter().position(|&s| s == o.s), o.replicate));

    let means = mean_curves(id, &cfg.s_grid, &rows);
    let summary = cfg
        .s_grid
        .iter()
        .map(|&s| {
            let runs: Vec<&RunOutcome> = outcomes.iter().filter(|o| o.s == s).collect();
            let imperfect = runs.iter().filter(|o| !o.perfect()).map(|o| o.final_accuracy);
            TrajectorySummaryRow {
                model: id,
                s,
                replicates: runs.len(),
                perfect: runs.iter().filter(|o| o.perfect()).count(),
                mean_final_accuracy: mean(runs.iter().map(|o| o.final_accuracy)),
                max_imperfect_accuracy: imperfect.fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x)))),
                mean_iterations: mean(runs.iter().map(|o| o.iterations as f64)),
            }
        })
        .collect();
    Ok(TrajectoryStudy { rows, outcomes, means, summary, detail_s: cfg.detail_s })
}

/// Accuracy of each replicate at iteration `k`, holding the last recorded value
/// for runs that stopped earlier.
fn carried(rows: &[&TrajectoryRow], horizon: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(horizon + 1);
    let mut last = f64::NAN;
    let mut it = rows.iter().peekable();
    for k in 0..=horizon {
        while let Some(r) = it.next_if(|r| r.iteration <= k) {
            last = r.accuracy;
        }
        out.push(last);
    }
    out
}

fn mean_curves(id: &'static str, s_grid: &[usize], rows: &[TrajectoryRow]) -> Vec<TrajectoryMeanRow> {
    let mut out = Vec::new();
    for &s in s_grid {
        let mut by_rep: Vec<Vec<&TrajectoryRow>> = Vec::new();
        for r in rows.iter().filter(|r| r.s == s) {
            if by_rep.last().is_none_or(|v| v[0].replicate != r.replicate) {
                by_rep.push(Vec::new());
            }
            by_rep.last_mut().unwrap().push(r);
        }
        let horizon = rows.iter().filter(|r| r.s == s).map(|r| r.iteration).max().unwrap_or(0);
        let curves: Vec<Vec<f64>> = by_rep.iter().map(|v| carried(v, horizon)).collect();
        for k in 0..=horizon {
            out.push(TrajectoryMeanRow {
                model: id,
                s,
                iteration: k,
                mean_accuracy: mean(curves.iter().map(|c| c[k])),
                replicates: curves.len(),
            });
        }
    }
    out
}

impl TrajectoryStudy {
    pub fn outcomes_for(&self, s: usize) -> impl Iterator<Item = &RunOutcome> {
        self.outcomes.iter().filter(move |o| o.s == s)
    }

    pub fn summary_for(&self, s: usize) -> Option<&TrajectorySummaryRow> {
        self.summary.iter().find(|r| r.s == s)
    }

    pub fn artifacts(&self) -> Result<Artifacts> {
        let id = self.summary.first().map_or("model", |r| r.model);
        let mut files = vec![
            Artifact::new("trajectory.csv", to_csv(&self.rows)?),
            Artifact::new("trajectory_final.csv", to_csv(&self.outcomes)?),
            Artifact::new("trajectory_mean.csv", to_csv(&self.means)?),
            Artifact::new("trajectory_summary.csv", to_csv(&self.summary)?),
        ];
        let note = "Runs stop early; each replicate's last accuracy is carried forward to the longest run.";
        let series = self
            .summary
            .iter()
            .map(|row| Series {
                label: format!("s = {}", row.s),
                points: self.means.iter().filter(|m| m.s == row.s).map(|m| (m.iteration as f64, m.mean_accuracy)).collect(),
            })
            .collect();
        let mean_plot = LinePlot {
            title: format!("Mean accuracy by iteration ({id})"),
            x_label: "iteration".into(),
            y_label: "mean accuracy".into(),
            series,
            y_range: Some((0.0, 1.0)),
            note: Some(note.into()),
            hide_legend: false,
        };
        files.push(Artifact::new("trajectory_mean.svg", render_line_plot(&mean_plot)?));

        if let Some(s) = self.detail_s.filter(|s| self.summary_for(*s).is_some()) {
            let mut series: Vec<Series> = Vec::new();
            for r in self.rows.iter().filter(|r| r.s == s) {
                if series.last().is_none_or(|x| x.label != r.replicate.to_string()) {
                    series.push(Series { label: r.replicate.to_string(), points: Vec::new() });
                }
                series.last_mut().unwrap().points.push((r.iteration as f64, r.accuracy));
            }
            let detail = LinePlot {
                title: format!("Replicate trajectories, s = {s} ({id})"),
                x_label: "iteration".into(),
                y_label: "accuracy".into(),
                series,
                y_range: Some((0.0, 1.0)),
                note: None,
                hide_legend: true,
            };
            files.push(Artifact::new(format!("trajectory_s{s}.svg"), render_line_plot(&detail)?));
        }
        Ok(Artifacts(files))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ExperimentConfig {
        ExperimentConfig::from_json(
            r#"{"kind":"trajectory","model":{"model":"hom","n":40,"p":0.5,"r":0.5},
                "s_grid":[2,10,20],"replicates":4,"rng_seed":7,"detail_s":10}"#,
        )
        .unwrap()
    }

    #[test]
    fn iteration_zero_is_s_over_n() {
        let study = run_trajectory(&config()).unwrap();
        for r in study.rows.iter().filter(|r| r.iteration == 0) {
            assert_eq!(r.accuracy, r.s as f64 / 40.0);
            assert!(r.alpha.is_none());
        }
        assert!(study.rows.iter().all(|r| (0.0..=1.0).contains(&r.accuracy)));
    }

    #[test]
    fn means_average_replicates() {
        let study = run_trajectory(&config()).unwrap();
        for m in study.means.iter().filter(|m| m.iteration == 0) {
            assert!((m.mean_accuracy - m.s as f64 / 40.0).abs() < 1e-12);
            assert_eq!(m.replicates, 4);
        }
        let files = study.artifacts().unwrap();
        assert!(files.get("trajectory_s10.svg").is_some());
        assert!(files.get("trajectory.csv").unwrap().starts_with("model,s,replicate,iteration,accuracy,objective,alpha,rng_seed\n"));
    }

    #[test]
    fn carry_forward() {
        let row = |iteration, accuracy| TrajectoryRow {
            model: "hom",
            s: 1,
            replicate: 0,
            iteration,
            accuracy,
            objective: 0.0,
            alpha: None,
            rng_seed: 0,
        };
        let (a, b) = (row(0, 0.1), row(1, 0.4));
        assert_eq!(carried(&[&a, &b], 3), vec![0.1, 0.4, 0.4, 0.4]);
    }
}
