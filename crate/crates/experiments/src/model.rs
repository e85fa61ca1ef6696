//! Random graph model specifications as they appear in configs.

use gm_core::ds_init::Partition;
use gm_core::linalg::AdjacencyMatrix;
use gm_core::random_graphs::{hom_params, rdpg_params, sample_corr_er, sample_dirichlet_positions, sbm_params, CorrErParams};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config_error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Hom,
    Sbm,
    Rdpg,
}

/// `{"model", "n", "p", "r", "blocks", "within_p", "between_p", "rng_seed"}`.
///
/// `blocks` lists SBM block sizes. RDPG latent positions are drawn from the
/// replicate's random stream, so each replicate sees a fresh latent configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub model: ModelKind,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub p: Option<f64>,
    pub r: f64,
    #[serde(default)]
    pub blocks: Option<Vec<usize>>,
    #[serde(default)]
    pub within_p: Option<f64>,
    #[serde(default)]
    pub between_p: Option<f64>,
    /// Used by the standalone sampler; experiments derive seeds from their own base seed.
    #[serde(default)]
    pub rng_seed: Option<u64>,
}

fn prob(x: Option<f64>, name: &str) -> Result<f64> {
    match x {
        Some(v) if (0.0..=1.0).contains(&v) => Ok(v),
        Some(v) => Err(config_error(format!("{name} = {v} is not a probability"))),
        None => Err(config_error(format!("model needs {name}"))),
    }
}

impl ModelSpec {
    pub fn hom(n: usize, p: f64, r: f64) -> Self {
        Self { model: ModelKind::Hom, n: Some(n), p: Some(p), r, blocks: None, within_p: None, between_p: None, rng_seed: None }
    }

    pub fn sbm(blocks: Vec<usize>, within_p: f64, between_p: f64, r: f64) -> Self {
        Self {
            model: ModelKind::Sbm,
            n: Some(blocks.iter().sum()),
            p: None,
            r,
            blocks: Some(blocks),
            within_p: Some(within_p),
            between_p: Some(between_p),
            rng_seed: None,
        }
    }

    pub fn rdpg(n: usize, r: f64) -> Self {
        Self { model: ModelKind::Rdpg, n: Some(n), p: None, r, blocks: None, within_p: None, between_p: None, rng_seed: None }
    }

    /// Parses and validates a standalone model document.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn id(&self) -> &'static str {
        match self.model {
            ModelKind::Hom => "hom",
            ModelKind::Sbm => "sbm",
            ModelKind::Rdpg => "rdpg",
        }
    }

    pub fn validate(&self) -> Result<()> {
        prob(Some(self.r), "r")?;
        match self.model {
            ModelKind::Hom => {
                prob(self.p, "p")?;
            }
            ModelKind::Sbm => {
                prob(self.within_p, "within_p")?;
                prob(self.between_p, "between_p")?;
                let blocks = self.blocks.as_ref().ok_or_else(|| config_error("sbm needs blocks"))?;
                if blocks.is_empty() || blocks.contains(&0) {
                    return Err(config_error("sbm blocks must be non-empty and positive"));
                }
                if let Some(n) = self.n {
                    if n != blocks.iter().sum::<usize>() {
                        return Err(config_error("sbm n must equal the sum of block sizes"));
                    }
                }
            }
            ModelKind::Rdpg => {}
        }
        Ok(())
    }

    /// Vertex count, when fixed by the spec.
    pub fn n(&self) -> Option<usize> {
        self.n.or_else(|| self.blocks.as_ref().map(|b| b.iter().sum()))
    }

    pub fn require_n(&self) -> Result<usize> {
        self.n().ok_or_else(|| config_error(format!("{} model needs n", self.id())))
    }

    /// SBM block partition in vertex order.
    pub fn partition(&self) -> Result<Partition> {
        let blocks = self.blocks.as_ref().ok_or_else(|| config_error("only sbm models carry blocks"))?;
        Ok(Partition::from_block_sizes(blocks)?)
    }

    /// Edge parameters at `n` vertices (ignored for SBM). RDPG draws its
    /// latent positions from `rng`.
    pub fn params<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<CorrErParams> {
        Ok(match self.model {
            ModelKind::Hom => hom_params(n, prob(self.p, "p")?, self.r)?,
            ModelKind::Sbm => sbm_params(
                self.blocks.as_deref().unwrap_or_default(),
                prob(self.within_p, "within_p")?,
                prob(self.between_p, "between_p")?,
                self.r,
            )?,
            ModelKind::Rdpg => rdpg_params(&sample_dirichlet_positions(n, rng).view(), self.r)?,
        })
    }

    pub fn sample_pair<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<(AdjacencyMatrix, AdjacencyMatrix)> {
        let params = self.params(n, rng)?;
        Ok(sample_corr_er(&params, rng))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parse_and_validate() {
        let m: ModelSpec = serde_json::from_str(r#"{"model":"sbm","blocks":[50,50],"within_p":0.5,"between_p":0.1,"r":0.5}"#).unwrap();
        m.validate().unwrap();
        assert_eq!(m.n(), Some(100));
        assert!(serde_json::from_str::<ModelSpec>(r#"{"model":"hom","n":5,"p":0.5,"r":0.5,"q":1}"#).is_err());
        assert!(ModelSpec::hom(5, 1.5, 0.5).validate().is_err());
        let mut wrong_n = ModelSpec::sbm(vec![2, 3], 0.5, 0.1, 0.5);
        wrong_n.n = Some(4);
        assert!(wrong_n.validate().is_err());
    }

    #[test]
    fn samples_have_requested_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for spec in [ModelSpec::hom(12, 0.5, 0.5), ModelSpec::sbm(vec![6, 6], 0.5, 0.1, 0.5), ModelSpec::rdpg(12, 0.5)] {
            let (a, b) = spec.sample_pair(12, &mut rng).unwrap();
            assert_eq!((a.n(), b.n()), (12, 12));
        }
    }
}
