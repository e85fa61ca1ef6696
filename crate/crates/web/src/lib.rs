//! WebAssembly bindings for the browser demo. Every export returns a JSON
//! string; errors come back as `{"error": "..."}`.

use gm_core::ds_init::{barycenter, block_diag_barycenter, random_doubly_stochastic, sinkhorn_knopp, RandomDsMethod};
use gm_core::ds_init::{SINKHORN_MAX_ITER, SINKHORN_TOL};
use gm_core::error::GmError;
use gm_core::faq::{faq, FaqOptions};
use gm_core::linalg::DoublyStochasticMatrix;
use gm_core::random_graphs::{hom_params, sample_bivariate_bernoulli, sample_corr_er, BivariateTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wasm_bindgen::prelude::wasm_bindgen;

/// Largest graph the page will attempt.
pub const MAX_DEMO_N: usize = 400;

#[derive(Debug, Serialize)]
pub struct MatchDemo {
    pub n: usize,
    pub s: usize,
    pub accuracy: Vec<f64>,
    pub alpha: Vec<Option<f64>>,
    pub final_accuracy: f64,
    pub iterations: usize,
    pub converged_at_permutation: bool,
}

#[derive(Debug, Serialize)]
pub struct MatrixDemo {
    pub n: usize,
    pub label: String,
    pub entries: Vec<f64>,
    pub trace: f64,
    pub max_entry: f64,
}

#[derive(Debug, Serialize)]
pub struct BernoulliDemo {
    pub lambda: f64,
    pub rho: f64,
    pub draws: usize,
    /// Cells in the order 11, 10, 01, 00.
    pub expected: [f64; 4],
    pub observed: [f64; 4],
}

fn to_json<T: Serialize>(r: Result<T, GmError>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(e) => error_json(&e.to_string()),
    }
}

fn error_json(msg: &str) -> String {
    serde_json::json!({ "error": msg }).to_string()
}

fn check_n(n: usize) -> Result<(), GmError> {
    if n == 0 || n > MAX_DEMO_N {
        return Err(GmError::TooLarge { n, limit: MAX_DEMO_N });
    }
    Ok(())
}

/// Samples a correlated Erdős–Rényi pair and matches it from `s` soft seeds.
pub fn match_demo(n: usize, p: f64, r: f64, s: usize, seed: u64) -> Result<MatchDemo, GmError> {
    check_n(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = sample_corr_er(&hom_params(n, p, r)?, &mut rng);
    let res = faq(&a, &b, &block_diag_barycenter(n, s)?, &FaqOptions::default())?;
    let records = res.trajectory.records();
    Ok(MatchDemo {
        n,
        s,
        accuracy: records.iter().map(|r| r.accuracy).collect(),
        alpha: records.iter().map(|r| r.alpha).collect(),
        final_accuracy: res.accuracy(),
        iterations: res.iterations,
        converged_at_permutation: res.converged_at_permutation,
    })
}

/// Starting matrices: `barycenter`, `block` (with `s` blocks), `sinkhorn`
/// (balanced random positive matrix) or `mix` (convex mix of permutations).
pub fn matrix_demo(kind: &str, n: usize, s: usize, seed: u64) -> Result<MatrixDemo, GmError> {
    check_n(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (label, d): (String, DoublyStochasticMatrix) = match kind {
        "barycenter" => ("barycenter".into(), barycenter(n)?),
        "block" => (format!("{s} diagonal blocks"), block_diag_barycenter(n, s)?),
        "sinkhorn" => {
            let m = ndarray_uniform(n, &mut rng);
            let out = sinkhorn_knopp(&m.view(), SINKHORN_TOL, SINKHORN_MAX_ITER)?;
            (format!("Sinkhorn balancing, {} sweeps", out.iterations), out.matrix)
        }
        "mix" => ("mixture of permutations".into(), random_doubly_stochastic(n, RandomDsMethod::ConvexMix(s.max(1)), &mut rng)?),
        other => return Err(GmError::InvalidParameter(format!("unknown matrix kind {other:?}"))),
    };
    let entries: Vec<f64> = d.view().iter().copied().collect();
    let max_entry = entries.iter().copied().fold(0.0, f64::max);
    Ok(MatrixDemo { n, label, trace: d.trace(), entries, max_entry })
}

fn ndarray_uniform<R: Rng>(n: usize, rng: &mut R) -> ndarray::Array2<f64> {
    ndarray::Array2::from_shape_fn((n, n), |_| rng.random_range(0.05..1.0))
}

pub fn bernoulli_demo(lambda: f64, rho: f64, draws: usize, seed: u64) -> Result<BernoulliDemo, GmError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = [0usize; 4];
    for _ in 0..draws {
        let (x, y) = sample_bivariate_bernoulli(lambda, rho, &mut rng)?;
        counts[usize::from(!x) * 2 + usize::from(!y)] += 1;
    }
    let t = BivariateTable::new(lambda, rho);
    let total = draws.max(1) as f64;
    Ok(BernoulliDemo {
        lambda,
        rho,
        draws,
        expected: [t.p11, t.p10, t.p01, t.p00],
        observed: counts.map(|c| c as f64 / total),
    })
}

#[wasm_bindgen(js_name = matchDemo)]
pub fn match_demo_json(n: usize, p: f64, r: f64, s: usize, seed: u32) -> String {
    to_json(match_demo(n, p, r, s, u64::from(seed)))
}

#[wasm_bindgen(js_name = matrixDemo)]
pub fn matrix_demo_json(kind: &str, n: usize, s: usize, seed: u32) -> String {
    to_json(matrix_demo(kind, n, s, u64::from(seed)))
}

#[wasm_bindgen(js_name = bernoulliDemo)]
pub fn bernoulli_demo_json(lambda: f64, rho: f64, draws: usize, seed: u32) -> String {
    to_json(bernoulli_demo(lambda, rho, draws, u64::from(seed)))
}
