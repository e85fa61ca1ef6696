//! Correlated Erdős–Rényi graph pairs: parameters, samplers, exact
//! expectations and the two-step recovery threshold quantities.

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, GmError, Result};
use crate::linalg::{check_dim, AdjacencyMatrix, PermutationMatrix};

/// Edge-probability matrix `Λ` and edge-correlation matrix `R` of a
/// correlated Erdős–Rényi pair. `Λ` is symmetric with a zero diagonal;
/// the diagonal of `R` is carried but never used.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrErParams {
    lambda: Array2<f64>,
    rho: Array2<f64>,
}

impl CorrErParams {
    /// Validates ranges and symmetry; the diagonal of `Λ` is zeroed.
    pub fn new(mut lambda: Array2<f64>, rho: Array2<f64>) -> Result<Self> {
        let (rows, cols) = lambda.dim();
        if rows != cols {
            return Err(GmError::NotSquare { rows, cols });
        }
        if rho.dim() != (rows, cols) {
            return Err(GmError::DimensionMismatch { expected: rows, found: rho.nrows() });
        }
        for i in 0..rows {
            lambda[[i, i]] = 0.0;
        }
        for ((i, j), &l) in lambda.indexed_iter() {
            let r = rho[[i, j]];
            if !(0.0..=1.0).contains(&l) {
                return Err(invalid(format!("edge probability {l} at ({i}, {j}) outside [0, 1]")));
            }
            if !(0.0..=1.0).contains(&r) {
                return Err(invalid(format!("correlation {r} at ({i}, {j}) outside [0, 1]")));
            }
            if l != lambda[[j, i]] || r != rho[[j, i]] {
                return Err(GmError::NotSymmetric(i, j));
            }
        }
        Ok(Self { lambda, rho })
    }

    pub fn n(&self) -> usize {
        self.lambda.nrows()
    }

    pub fn lambda(&self) -> ArrayView2<'_, f64> {
        self.lambda.view()
    }

    pub fn rho(&self) -> ArrayView2<'_, f64> {
        self.rho.view()
    }
}

/// Homogeneous model: `Λ = p(J − I)`, constant correlation `r`.
pub fn hom_params(n: usize, p: f64, r: f64) -> Result<CorrErParams> {
    CorrErParams::new(Array2::from_elem((n, n), p), Array2::from_elem((n, n), r))
}

/// Stochastic block model with contiguous blocks of the given sizes.
pub fn sbm_params(block_sizes: &[usize], within_p: f64, between_p: f64, r: f64) -> Result<CorrErParams> {
    if block_sizes.is_empty() || block_sizes.contains(&0) {
        return Err(invalid("block sizes must be non-empty and positive"));
    }
    let labels = block_labels(block_sizes);
    let n = labels.len();
    let lambda = Array2::from_shape_fn((n, n), |(i, j)| {
        if labels[i] == labels[j] {
            within_p
        } else {
            between_p
        }
    });
    CorrErParams::new(lambda, Array2::from_elem((n, n), r))
}

/// Block label of each vertex for contiguous blocks.
pub fn block_labels(block_sizes: &[usize]) -> Vec<usize> {
    block_sizes
        .iter()
        .enumerate()
        .flat_map(|(k, &size)| std::iter::repeat_n(k, size))
        .collect()
}

/// Random dot product graph: `Λ = X Xᵀ` off the diagonal, constant correlation `r`.
pub fn rdpg_params(latent: &ArrayView2<'_, f64>, r: f64) -> Result<CorrErParams> {
    let lambda = latent.dot(&latent.t());
    let n = lambda.nrows();
    for ((i, j), &x) in lambda.indexed_iter() {
        if i != j && !(0.0..=1.0).contains(&x) {
            return Err(invalid(format!("inner product {x} of positions {i}, {j} outside [0, 1]")));
        }
    }
    CorrErParams::new(lambda, Array2::from_elem((n, n), r))
}

/// `n` rows of the first two coordinates of a uniform point on the simplex
/// (Dirichlet(1,1,1)), drawn as normalized exponentials.
pub fn sample_dirichlet_positions<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Array2<f64> {
    let mut x = Array2::zeros((n, 2));
    for i in 0..n {
        let e: [f64; 3] = std::array::from_fn(|_| Exp1.sample(rng));
        let total: f64 = e.iter().sum();
        x[[i, 0]] = e[0] / total;
        x[[i, 1]] = e[1] / total;
    }
    x
}

/// Exact joint law of a correlated Bernoulli pair with common marginal
/// `λ` and correlation `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BivariateTable {
    pub p11: f64,
    pub p10: f64,
    pub p01: f64,
    pub p00: f64,
}

impl BivariateTable {
    pub fn new(lambda: f64, rho: f64) -> Self {
        Self {
            p11: lambda * (lambda + rho * (1.0 - lambda)),
            p10: lambda * (1.0 - rho) * (1.0 - lambda),
            p01: (1.0 - lambda) * lambda * (1.0 - rho),
            p00: (1.0 - lambda + lambda * rho) * (1.0 - lambda),
        }
    }

    /// Probability of the outcome `(x, y)`.
    pub fn prob(&self, x: bool, y: bool) -> f64 {
        match (x, y) {
            (true, true) => self.p11,
            (true, false) => self.p10,
            (false, true) => self.p01,
            (false, false) => self.p00,
        }
    }
}

/// Success probabilities of the three independent coins `(Z0, Z1, Z2)` that
/// generate the pair as `(Z0, (1 − Z0) Z1 + Z0 Z2)`.
pub fn bernoulli_coins(lambda: f64, rho: f64) -> [f64; 3] {
    [lambda, lambda * (1.0 - rho), lambda + rho * (1.0 - lambda)]
}

/// Upper bound `3λ(1−λ) + 2ρ` on the summed variances of the three coins.
pub fn coin_variance_bound(lambda: f64, rho: f64) -> f64 {
    3.0 * lambda * (1.0 - lambda) + 2.0 * rho
}

pub fn sample_bivariate_bernoulli<R: Rng + ?Sized>(lambda: f64, rho: f64, rng: &mut R) -> Result<(bool, bool)> {
    if !(0.0..=1.0).contains(&lambda) || !(0.0..=1.0).contains(&rho) {
        return Err(invalid(format!("bivariate Bernoulli parameters ({lambda}, {rho}) outside [0, 1]")));
    }
    Ok(draw_pair(lambda, rho, rng))
}

#[inline]
fn draw_pair<R: Rng + ?Sized>(lambda: f64, rho: f64, rng: &mut R) -> (bool, bool) {
    let [c0, c1, c2] = bernoulli_coins(lambda, rho);
    let z0 = rng.random::<f64>() < c0;
    let z1 = rng.random::<f64>() < c1;
    let z2 = rng.random::<f64>() < c2;
    (z0, if z0 { z2 } else { z1 })
}

/// Draws `(A, B) ~ CorrER(Λ, R)`, one correlated pair per unordered vertex pair.
pub fn sample_corr_er<R: Rng + ?Sized>(params: &CorrErParams, rng: &mut R) -> (AdjacencyMatrix, AdjacencyMatrix) {
    let n = params.n();
    let mut a = Array2::zeros((n, n));
    let mut b = Array2::zeros((n, n));
    for u in 0..n {
        for v in (u + 1)..n {
            let (x, y) = draw_pair(params.lambda[[u, v]], params.rho[[u, v]], rng);
            if x {
                a[[u, v]] = 1.0;
                a[[v, u]] = 1.0;
            }
            if y {
                b[[u, v]] = 1.0;
                b[[v, u]] = 1.0;
            }
        }
    }
    (AdjacencyMatrix::from_dense_unchecked(a), AdjacencyMatrix::from_dense_unchecked(b))
}

/// Edgewise covariances `S_ij = R_ij Λ_ij (1 − Λ_ij)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    s: Array2<f64>,
}

impl CovarianceMatrix {
    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.s.view()
    }
}

pub fn covariance_matrix(params: &CorrErParams) -> CovarianceMatrix {
    let s = ndarray::Zip::from(&params.lambda)
        .and(&params.rho)
        .map_collect(|&l, &r| r * l * (1.0 - l));
    CovarianceMatrix { s }
}

/// `trace(A P B Qᵀ) = Σ_ij A_ij B_{σ(j) τ(i)}` for permutations `P ↔ σ`, `Q ↔ τ`.
pub fn bilinear_trace(
    a: &AdjacencyMatrix,
    b: &AdjacencyMatrix,
    p: &PermutationMatrix,
    q: &PermutationMatrix,
) -> Result<f64> {
    check_dim(a.n(), b.n())?;
    check_dim(a.n(), p.n())?;
    check_dim(a.n(), q.n())?;
    Ok(bilinear_trace_raw(&a.view(), &b.view(), p.sigma(), q.sigma()))
}

fn bilinear_trace_raw(a: &ArrayView2<'_, f64>, b: &ArrayView2<'_, f64>, sigma: &[usize], tau: &[usize]) -> f64 {
    let n = a.nrows();
    let mut total = 0.0;
    for i in 0..n {
        let ti = tau[i];
        for j in 0..n {
            total += a[[i, j]] * b[[sigma[j], ti]];
        }
    }
    total
}

/// Exact `E[trace(A P B Qᵀ)] = trace(Λ P Λ Qᵀ) + Σ_{i≠j} S_ij (P_ii Q_jj + P_ji Q_ij)`.
pub fn expected_trace(params: &CorrErParams, p: &PermutationMatrix, q: &PermutationMatrix) -> Result<f64> {
    let n = params.n();
    check_dim(n, p.n())?;
    check_dim(n, q.n())?;
    let (sigma, tau) = (p.sigma(), q.sigma());
    let first = bilinear_trace_raw(&params.lambda(), &params.lambda(), sigma, tau);
    let s = covariance_matrix(params);
    Ok(first + covariance_term(&s.view(), sigma, tau))
}

/// `Σ_{i≠j} S_ij (P_ii Q_jj + P_ji Q_ij)`.
pub fn covariance_term(s: &ArrayView2<'_, f64>, sigma: &[usize], tau: &[usize]) -> f64 {
    let n = sigma.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let fixed = sigma[i] == i && tau[j] == j;
            let swapped = sigma[j] == i && tau[i] == j;
            total += s[[i, j]] * (fixed as u8 + swapped as u8) as f64;
        }
    }
    total
}

/// Plug-in values of the two-step recovery thresholds for a parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryThresholds {
    /// Smallest edgewise covariance.
    pub c: f64,
    /// Variance bound `max 3Λ(1−Λ) + 2R`.
    pub epsilon: f64,
    /// Minimum starting trace `2 √(n^{1+2δ}) ε / C²`.
    pub ell: f64,
    /// One-step basin width `C² n^{1−δ} log n / ε`.
    pub m: f64,
    pub delta: f64,
    /// Whether `ℓ ≤ n`; the constants are loose and usually exceed `n` at desk scale.
    pub binding: bool,
}

pub fn theory_thresholds(params: &CorrErParams, delta: f64) -> Result<TheoryThresholds> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(invalid(format!("delta {delta} outside (0, 1/2)")));
    }
    let n = params.n();
    if n < 2 {
        return Err(invalid("thresholds need at least two vertices"));
    }
    let mut c = f64::INFINITY;
    let mut epsilon = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let l = params.lambda[[i, j]];
            let r = params.rho[[i, j]];
            c = c.min(r * l * (1.0 - l));
            epsilon = epsilon.max(coin_variance_bound(l, r));
        }
    }
    if c <= 0.0 {
        return Err(invalid("some edgewise covariance is zero; thresholds are undefined"));
    }
    let nf = n as f64;
    let ell = 2.0 * nf.powf(1.0 + 2.0 * delta).sqrt() * epsilon / (c * c);
    let m = c * c * nf.powf(1.0 - delta) * nf.ln() / epsilon;
    Ok(TheoryThresholds { c, epsilon, ell, m, delta, binding: ell <= nf })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn table_half_half() {
        let t = BivariateTable::new(0.5, 0.5);
        assert!((t.p11 - 0.375).abs() < 1e-15);
        assert!((t.p10 - 0.125).abs() < 1e-15);
        assert!((t.p01 - 0.125).abs() < 1e-15);
        assert!((t.p00 - 0.375).abs() < 1e-15);
    }

    #[test]
    fn coins_reproduce_table() {
        for &l in &[0.0, 0.1, 0.37, 0.5, 0.9, 1.0] {
            for &r in &[0.0, 0.2, 0.5, 1.0] {
                let [c0, c1, c2] = bernoulli_coins(l, r);
                let t = BivariateTable::new(l, r);
                assert!((c0 * c2 - t.p11).abs() < 1e-12);
                assert!((c0 * (1.0 - c2) - t.p10).abs() < 1e-12);
                assert!(((1.0 - c0) * c1 - t.p01).abs() < 1e-12);
                assert!(((1.0 - c0) * (1.0 - c1) - t.p00).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn perfect_correlation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let (x, y) = sample_bivariate_bernoulli(0.3, 1.0, &mut rng).unwrap();
            assert_eq!(x, y);
        }
        assert!(sample_bivariate_bernoulli(1.2, 0.0, &mut rng).is_err());
        assert!(sample_bivariate_bernoulli(0.5, -0.1, &mut rng).is_err());
    }

    #[test]
    fn independence_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let draws = 100_000;
        let (mut sx, mut sy, mut sxy) = (0.0, 0.0, 0.0);
        for _ in 0..draws {
            let (x, y) = sample_bivariate_bernoulli(0.4, 0.0, &mut rng).unwrap();
            let (x, y) = (x as u8 as f64, y as u8 as f64);
            sx += x;
            sy += y;
            sxy += x * y;
        }
        let nd = draws as f64;
        let cov = sxy / nd - (sx / nd) * (sy / nd);
        let corr = cov / (0.4 * 0.6);
        // Sampling sd of the correlation is about 1/sqrt(N).
        assert!(corr.abs() < 3.0 / nd.sqrt(), "corr = {corr}");
    }

    #[test]
    fn identical_and_empty_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (a, b) = sample_corr_er(&hom_params(40, 0.3, 1.0).unwrap(), &mut rng);
        assert_eq!(a, b);
        let (a, b) = sample_corr_er(&hom_params(40, 0.0, 0.5).unwrap(), &mut rng);
        assert_eq!(a.edge_count() + b.edge_count(), 0);
    }

    #[test]
    fn hom_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (a, b) = sample_corr_er(&hom_params(300, 0.5, 0.5).unwrap(), &mut rng);
        let pairs: f64 = 300.0 * 299.0 / 2.0;
        let sd = (0.25 / pairs).sqrt();
        for g in [&a, &b] {
            let density = g.edge_count() as f64 / pairs;
            assert!((density - 0.5).abs() < 3.0 * sd, "density {density}");
        }
    }

    #[test]
    fn sbm_structure() {
        let params = sbm_params(&[50; 6], 0.5, 0.1, 0.5).unwrap();
        let l = params.lambda();
        assert_eq!(params.n(), 300);
        assert_eq!(l[[0, 0]], 0.0);
        assert_eq!(l[[0, 49]], 0.5);
        assert_eq!(l[[0, 50]], 0.1);
        assert_eq!(l[[299, 250]], 0.5);
        assert!(sbm_params(&[3, 0], 0.5, 0.1, 0.5).is_err());
    }

    #[test]
    fn rdpg_reduces_to_hom() {
        let p: f64 = 0.3;
        let x = Array2::from_shape_fn((6, 2), |(_, k)| if k == 0 { p.sqrt() } else { 0.0 });
        let params = rdpg_params(&x.view(), 0.5).unwrap();
        for ((i, j), &v) in params.lambda().indexed_iter() {
            if i != j {
                assert!((v - p).abs() < 1e-15);
            }
        }
        let bad = Array2::from_elem((3, 2), 1.0);
        assert!(rdpg_params(&bad.view(), 0.5).is_err());
    }

    #[test]
    fn dirichlet_positions() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 10_000;
        let x = sample_dirichlet_positions(n, &mut rng);
        for row in x.rows() {
            assert!(row[0] >= 0.0 && row[1] >= 0.0 && row[0] + row[1] <= 1.0);
        }
        // Dirichlet(1,1,1) marginal is Beta(1,2): mean 1/3, variance 1/18.
        let sd = (1.0 / 18.0 / n as f64).sqrt();
        for k in 0..2 {
            let mean = x.column(k).sum() / n as f64;
            assert!((mean - 1.0 / 3.0).abs() < 3.0 * sd, "mean {mean}");
        }
        let params = rdpg_params(&x.slice(ndarray::s![..200, ..]), 0.5).unwrap();
        assert!(params.lambda().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn covariance_examples() {
        let s = covariance_matrix(&hom_params(4, 0.5, 0.5).unwrap());
        assert_eq!(s.view()[[0, 1]], 0.125);
        assert_eq!(s.view()[[2, 2]], 0.0);
        let s = covariance_matrix(&hom_params(4, 0.5, 0.0).unwrap());
        assert!(s.view().iter().all(|&x| x == 0.0));
        let s = covariance_matrix(&hom_params(4, 1.0, 0.7).unwrap());
        assert!(s.view().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn expected_trace_two_vertices() {
        let params = hom_params(2, 0.5, 0.5).unwrap();
        let id = PermutationMatrix::identity(2);
        assert!((expected_trace(&params, &id, &id).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn thresholds_hom() {
        let t = theory_thresholds(&hom_params(300, 0.5, 0.5).unwrap(), 0.1).unwrap();
        assert!((t.epsilon - 1.75).abs() < 1e-15);
        assert!((t.c - 0.125).abs() < 1e-15);
        let expected_ell = 2.0 * 300f64.powf(0.6) * 1.75 / 0.015625;
        assert!((t.ell - expected_ell).abs() < 1e-9);
        assert!(t.ell > 6800.0 && t.ell < 6900.0);
        assert!(!t.binding);
        assert!(theory_thresholds(&hom_params(10, 0.5, 0.0).unwrap(), 0.1).is_err());
        assert!(theory_thresholds(&hom_params(10, 0.5, 0.5).unwrap(), 0.5).is_err());
    }

    #[test]
    fn thresholds_monotone() {
        let n = 100;
        let base = theory_thresholds(&hom_params(n, 0.5, 0.5).unwrap(), 0.2).unwrap();
        // Raising r raises both C and epsilon; compare the formula directly instead.
        let ell = |eps: f64, c: f64| 2.0 * (n as f64).powf(1.4).sqrt() * eps / (c * c);
        assert!((ell(base.epsilon, base.c) - base.ell).abs() < 1e-9);
        assert!(ell(base.epsilon * 1.1, base.c) > base.ell);
        assert!(ell(base.epsilon, base.c * 1.1) < base.ell);
    }
}
