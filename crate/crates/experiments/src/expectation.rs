//! Monte Carlo check of the closed-form expectation of `trace(A P B Qᵀ)`.

use gm_core::ds_init::random_permutation;
use gm_core::linalg::PermutationMatrix;
use gm_core::random_graphs::{bilinear_trace, expected_trace, sample_corr_er};
use serde::Serialize;

use crate::common::{replicate_rng, replicate_seed, run_tasks, to_csv, Artifact, Artifacts};
use crate::config::ExperimentConfig;
use crate::error::{config_error, Result};

/// Largest graph the check accepts.
pub const MAX_N: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationRow {
    pub model: &'static str,
    pub pair: usize,
    pub n: usize,
    pub samples: usize,
    pub sigma: String,
    pub tau: String,
    pub expected: f64,
    pub mc_mean: f64,
    pub mc_sd: f64,
    pub z: f64,
    pub rng_seed: u64,
}

fn join(p: &PermutationMatrix) -> String {
    p.sigma().iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

/// Standardized difference of a sample mean from its target.
pub fn z_score(mean: f64, sd: f64, samples: usize, expected: f64) -> f64 {
    let diff = mean - expected;
    if sd == 0.0 {
        if diff.abs() <= 1e-9 * expected.abs().max(1.0) {
            0.0
        } else {
            f64::INFINITY.copysign(diff)
        }
    } else {
        diff / (sd / (samples as f64).sqrt())
    }
}

/// For each model, `pairs` permutation pairs (the first is `P = Q = I`), each
/// estimated from fresh graph samples. Model `m`, pair `k` uses stream
/// `rng_seed + m·pairs + k`; RDPG latent positions come from that stream too.
pub fn run_expectation_check(cfg: &ExperimentConfig) -> Result<Vec<ExpectationRow>> {
    for m in &cfg.models {
        let n = m.require_n()?;
        if n > MAX_N {
            return Err(config_error(format!("expectation check is limited to n ≤ {MAX_N}")));
        }
    }
    let tasks: Vec<(usize, usize)> = (0..cfg.models.len()).flat_map(|m| (0..cfg.pairs).map(move |k| (m, k))).collect();
    run_tasks(cfg.effective_workers(), tasks.len(), |t| {
        let (mi, pair) = tasks[t];
        let model = &cfg.models[mi];
        let n = model.require_n()?;
        let mut rng = replicate_rng(cfg.rng_seed, t);
        let params = model.params(n, &mut rng)?;
        let (p, q) = if pair == 0 {
            (PermutationMatrix::identity(n), PermutationMatrix::identity(n))
        } else {
            (random_permutation(n, &mut rng), random_permutation(n, &mut rng))
        };
        let expected = expected_trace(&params, &p, &q)?;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..cfg.samples {
            let (a, b) = sample_corr_er(&params, &mut rng);
            let x = bilinear_trace(&a, &b, &p, &q)?;
            sum += x;
            sum_sq += x * x;
        }
        let count = cfg.samples as f64;
        let mc_mean = sum / count;
        let mc_sd = ((sum_sq - count * mc_mean * mc_mean) / (count - 1.0)).max(0.0).sqrt();
        Ok(ExpectationRow {
            model: model.id(),
            pair,
            n,
            samples: cfg.samples,
            sigma: join(&p),
            tau: join(&q),
            expected,
            mc_mean,
            mc_sd,
            z: z_score(mc_mean, mc_sd, cfg.samples, expected),
            rng_seed: replicate_seed(cfg.rng_seed, t),
        })
    })
}

pub fn expectation_artifacts(rows: &[ExpectationRow]) -> Result<Artifacts> {
    Ok(Artifacts(vec![Artifact::new("expectation_check.csv", to_csv(rows)?)]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_scores() {
        assert_eq!(z_score(1.0, 0.0, 10, 1.0), 0.0);
        assert_eq!(z_score(2.0, 0.0, 10, 1.0), f64::INFINITY);
        assert!((z_score(1.1, 1.0, 100, 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn independent_graphs_small_run() {
        let cfg = ExperimentConfig::from_json(
            r#"{"kind":"expectation_check","models":[{"model":"hom","n":6,"p":0.5,"r":0.0}],
                "samples":4000,"pairs":4,"replicates":1,"rng_seed":2}"#,
        )
        .unwrap();
        let rows = run_expectation_check(&cfg).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].sigma, "0 1 2 3 4 5");
        for r in &rows {
            assert!(r.z.abs() < 5.0, "{r:?}");
        }
        assert!((rows[0].expected - 0.25 * 30.0).abs() < 1e-12);
    }
}
