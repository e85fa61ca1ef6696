use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use gm_core::ds_init::{barycenter, block_diag_barycenter, random_doubly_stochastic, soft_seed_one_to_one, RandomDsMethod, SeedSet};
use gm_core::faq::{faq, faq_with_similarity, FaqOptions};
use gm_core::io::{read_csv_matrix, read_edge_list, write_edge_list};
use gm_core::linalg::{AdjacencyMatrix, DoublyStochasticMatrix};
use gm_experiments::{run_experiment, ExperimentConfig, ModelSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "gm", version, about = "Soft-seeded FAQ graph matching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Align two graphs given as edge lists.
    Match {
        #[arg(long)]
        graph_a: PathBuf,
        #[arg(long)]
        graph_b: PathBuf,
        /// Starting point: barycenter, identity, block:S, seeds or random:SEED.
        #[arg(long, default_value = "barycenter")]
        init: String,
        /// Soft seeds as `u v` lines; required by `--init seeds`.
        #[arg(long)]
        seeds_file: Option<PathBuf>,
        /// Vertex similarity matrix (CSV with a header row) added to the objective.
        #[arg(long)]
        similarity: Option<PathBuf>,
        /// Vertex count, when trailing vertices are isolated.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = FaqOptions::default().max_iter)]
        max_iter: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment config and write its CSV and SVG outputs.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to the config's output_dir.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Sample a correlated graph pair and write `<prefix>_a.edges` and `<prefix>_b.edges`.
    Sample {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_prefix: String,
    },
}

fn read_graph(path: &Path, n: Option<usize>) -> Result<AdjacencyMatrix> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_edge_list(BufReader::new(file), n).with_context(|| format!("reading {}", path.display()))
}

fn read_seeds(path: &Path) -> Result<SeedSet> {
    let text = std::fs::read_to_string(path).with_context(|| format!("opening {}", path.display()))?;
    let mut pairs = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [u, v] = fields.as_slice() else {
            bail!("{}:{}: expected `u v`", path.display(), k + 1);
        };
        pairs.push((u.parse()?, v.parse()?));
    }
    Ok(SeedSet::new(pairs)?)
}

fn initial(spec: &str, n: usize, seeds: Option<&Path>) -> Result<DoublyStochasticMatrix> {
    let (kind, arg) = spec.split_once(':').map_or((spec, None), |(k, a)| (k, Some(a)));
    Ok(match (kind, arg) {
        ("barycenter", None) => barycenter(n)?,
        ("identity", None) => DoublyStochasticMatrix::identity(n),
        ("block", Some(s)) => block_diag_barycenter(n, s.parse().context("block:S needs an integer S")?)?,
        ("random", Some(seed)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.parse().context("random:SEED needs an integer seed")?);
            random_doubly_stochastic(n, RandomDsMethod::SinkhornOfUniform, &mut rng)?
        }
        ("seeds", None) => {
            let path = seeds.context("--init seeds needs --seeds-file")?;
            soft_seed_one_to_one(n, &read_seeds(path)?)?
        }
        _ => bail!("unknown init spec {spec:?}; expected barycenter, identity, block:S, seeds or random:SEED"),
    })
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Match { graph_a, graph_b, init, seeds_file, similarity, n, max_iter, out } => {
            let a = read_graph(&graph_a, n)?;
            let b = read_graph(&graph_b, n)?;
            if a.n() != b.n() {
                bail!("graphs have {} and {} vertices; pass --n to pad", a.n(), b.n());
            }
            let d0 = initial(&init, a.n(), seeds_file.as_deref())?;
            let opts = FaqOptions { max_iter, ..FaqOptions::default() };
            let result = match similarity {
                Some(path) => {
                    let s = read_csv_matrix(File::open(&path).with_context(|| format!("opening {}", path.display()))?)?;
                    faq_with_similarity(&a, &b, &s.view(), &d0, &opts)?
                }
                None => faq(&a, &b, &d0, &opts)?,
            };
            std::fs::write(&out, result.to_json()?).with_context(|| format!("writing {}", out.display()))?;
            eprintln!(
                "{} iterations, objective {:.1}, converged at a permutation: {}",
                result.iterations, result.final_objective, result.converged_at_permutation
            );
        }
        Command::Experiment { config, out_dir } => {
            let cfg = ExperimentConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
            let dir = out_dir.or_else(|| cfg.output_dir.clone()).context("no --out-dir and no output_dir in the config")?;
            let artifacts = run_experiment(&cfg)?;
            artifacts.write_to(&dir)?;
            for name in artifacts.names() {
                println!("{}", dir.join(name).display());
            }
        }
        Command::Sample { config, out_prefix } => {
            let text = std::fs::read_to_string(&config).with_context(|| format!("opening {}", config.display()))?;
            let spec = ModelSpec::from_json(&text)?;
            let n = spec.require_n()?;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed.unwrap_or(0));
            let (a, b) = spec.sample_pair(n, &mut rng)?;
            for (suffix, g) in [("a", &a), ("b", &b)] {
                let path = format!("{out_prefix}_{suffix}.edges");
                write_edge_list(BufWriter::new(File::create(&path).with_context(|| format!("creating {path}"))?), g)?;
                println!("{path}");
            }
        }
    }
    Ok(())
}
