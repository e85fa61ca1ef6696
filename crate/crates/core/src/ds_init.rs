//! Doubly stochastic starting points built from prior correspondence
//! information: seed pairs, matched partitions, similarity matrices and
//! random draws. Also holds the partition utilities used to measure how far
//! two vertex partitions disagree.

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{invalid, GmError, Result};
use crate::lap::solve_lap_max_view;
use crate::linalg::{validate_doubly_stochastic, DoublyStochasticMatrix, PermutationMatrix, DS_TOLERANCE};

pub const SINKHORN_TOL: f64 = 1e-8;
pub const SINKHORN_MAX_ITER: usize = 10_000;
pub const DYKSTRA_TOL: f64 = 1e-9;
pub const DYKSTRA_MAX_SWEEPS: usize = 100_000;

/// One-to-one prior correspondences `(i, j)`: vertex `i` of the first graph
/// is believed to match vertex `j` of the second.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedSet {
    pairs: Vec<(usize, usize)>,
}

impl SeedSet {
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut rows = std::collections::HashSet::new();
        let mut cols = std::collections::HashSet::new();
        for &(i, j) in &pairs {
            if !rows.insert(i) || !cols.insert(j) {
                return Err(invalid(format!("seed pair ({i}, {j}) repeats a row or column")));
            }
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Assignment of each vertex to one of `parts` non-empty parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
    parts: usize,
}

impl Partition {
    pub fn new(labels: Vec<usize>, parts: usize) -> Result<Self> {
        let mut sizes = vec![0usize; parts];
        for &l in &labels {
            if l >= parts {
                return Err(invalid(format!("label {l} out of range for {parts} parts")));
            }
            sizes[l] += 1;
        }
        if sizes.contains(&0) {
            return Err(invalid("partition has an empty part"));
        }
        Ok(Self { labels, parts })
    }

    /// Contiguous parts of the given sizes.
    pub fn from_block_sizes(sizes: &[usize]) -> Result<Self> {
        Self::new(crate::random_graphs::block_labels(sizes), sizes.len())
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn parts(&self) -> usize {
        self.parts
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> usize {
        self.labels[v]
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.parts];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Members of each part, in increasing vertex order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.parts];
        for (v, &l) in self.labels.iter().enumerate() {
            out[l].push(v);
        }
        out
    }
}

/// Two partitions whose `k`-th parts have equal sizes; part `k` of the first
/// graph is believed to correspond to part `k` of the second.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPair {
    eta: Partition,
    zeta: Partition,
}

impl PartitionPair {
    pub fn new(eta: Partition, zeta: Partition) -> Result<Self> {
        if eta.n() != zeta.n() {
            return Err(GmError::DimensionMismatch { expected: eta.n(), found: zeta.n() });
        }
        if eta.sizes() != zeta.sizes() {
            return Err(invalid("matched parts must have equal cardinalities"));
        }
        Ok(Self { eta, zeta })
    }

    pub fn eta(&self) -> &Partition {
        &self.eta
    }

    pub fn zeta(&self) -> &Partition {
        &self.zeta
    }
}

/// `C[i][j] = |η_i ∩ β_j|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    counts: Array2<usize>,
}

impl ConfusionMatrix {
    pub fn counts(&self) -> ArrayView2<'_, usize> {
        self.counts.view()
    }

    pub fn total(&self) -> usize {
        self.counts.sum()
    }
}

/// The constant matrix `J/n`.
pub fn barycenter(n: usize) -> Result<DoublyStochasticMatrix> {
    if n == 0 {
        return Err(invalid("barycenter needs n >= 1"));
    }
    Ok(DoublyStochasticMatrix::from_array_unchecked(Array2::from_elem((n, n), 1.0 / n as f64)))
}

/// Ones on the seed pairs, zeros elsewhere in seeded rows and columns, and
/// the barycenter of the remaining block.
pub fn soft_seed_one_to_one(n: usize, seeds: &SeedSet) -> Result<DoublyStochasticMatrix> {
    if seeds.len() > n {
        return Err(invalid(format!("{} seeds for {n} vertices", seeds.len())));
    }
    let mut row_seeded = vec![false; n];
    let mut col_seeded = vec![false; n];
    let mut d = Array2::zeros((n, n));
    for &(i, j) in seeds.pairs() {
        if i >= n || j >= n {
            return Err(invalid(format!("seed pair ({i}, {j}) out of range")));
        }
        row_seeded[i] = true;
        col_seeded[j] = true;
        d[[i, j]] = 1.0;
    }
    let rest = n - seeds.len();
    if rest > 0 {
        let fill = 1.0 / rest as f64;
        for i in (0..n).filter(|&i| !row_seeded[i]) {
            for j in (0..n).filter(|&j| !col_seeded[j]) {
                d[[i, j]] = fill;
            }
        }
    }
    Ok(DoublyStochasticMatrix::from_array_unchecked(d))
}

/// `D[i][j] = 1/|η_k|` for `i ∈ η_k`, `j ∈ ζ_k`, zero elsewhere.
pub fn soft_seed_partition(pp: &PartitionPair) -> DoublyStochasticMatrix {
    let n = pp.eta.n();
    let eta = pp.eta.members();
    let zeta = pp.zeta.members();
    let mut d = Array2::zeros((n, n));
    for (rows, cols) in eta.iter().zip(&zeta) {
        let fill = 1.0 / rows.len() as f64;
        for &i in rows {
            for &j in cols {
                d[[i, j]] = fill;
            }
        }
    }
    DoublyStochasticMatrix::from_array_unchecked(d)
}

/// Block sizes used by [`block_diag_barycenter`]: `s` blocks of size `n/s`
/// when `s | n`, else `s − 1` blocks of `⌊n/s⌋` and one block holding the rest.
pub fn block_diag_sizes(n: usize, s: usize) -> Result<Vec<usize>> {
    if s == 0 || s > n {
        return Err(invalid(format!("block count {s} outside 1..={n}")));
    }
    let base = n / s;
    let mut sizes = vec![base; s];
    sizes[s - 1] = n - (s - 1) * base;
    Ok(sizes)
}

/// Block-diagonal matrix of `s` barycenters along the diagonal; its trace is `s`.
pub fn block_diag_barycenter(n: usize, s: usize) -> Result<DoublyStochasticMatrix> {
    let part = Partition::from_block_sizes(&block_diag_sizes(n, s)?)?;
    Ok(soft_seed_partition(&PartitionPair { eta: part.clone(), zeta: part }))
}

/// Result of a Sinkhorn-Knopp balancing run.
#[derive(Debug, Clone)]
pub struct SinkhornOutcome {
    pub matrix: DoublyStochasticMatrix,
    /// Row-then-column sweeps performed.
    pub iterations: usize,
}

fn max_sum_deviation(m: &ArrayView2<'_, f64>) -> f64 {
    let rows = m.rows().into_iter().map(|r| (r.sum() - 1.0).abs());
    let cols = m.columns().into_iter().map(|c| (c.sum() - 1.0).abs());
    rows.chain(cols).fold(0.0, f64::max)
}

/// Alternately rescales rows and columns to unit sums until the largest
/// row or column deviation drops below `tol`.
pub fn sinkhorn_knopp(s: &ArrayView2<'_, f64>, tol: f64, max_iter: usize) -> Result<SinkhornOutcome> {
    let (rows, cols) = s.dim();
    if rows != cols {
        return Err(GmError::NotSquare { rows, cols });
    }
    if let Some(((i, j), _)) = s.indexed_iter().find(|(_, &x)| !x.is_finite() || x < 0.0) {
        return Err(invalid(format!("entry ({i}, {j}) is negative or non-finite")));
    }
    if s.rows().into_iter().any(|r| r.sum() == 0.0) || s.columns().into_iter().any(|c| c.sum() == 0.0) {
        return Err(invalid("matrix has an all-zero row or column"));
    }
    let mut m = s.to_owned();
    let accept_tol = tol.max(DS_TOLERANCE);
    if max_sum_deviation(&m.view()) < tol {
        return Ok(SinkhornOutcome {
            matrix: DoublyStochasticMatrix::with_tolerance(m, accept_tol)?,
            iterations: 0,
        });
    }
    for iter in 1..=max_iter {
        for mut row in m.rows_mut() {
            let total = row.sum();
            row /= total;
        }
        for mut col in m.columns_mut() {
            let total = col.sum();
            col /= total;
        }
        if max_sum_deviation(&m.view()) < tol {
            return Ok(SinkhornOutcome {
                matrix: DoublyStochasticMatrix::with_tolerance(m, accept_tol)?,
                iterations: iter,
            });
        }
    }
    Err(GmError::NotConverged { what: "Sinkhorn-Knopp", iterations: max_iter })
}

/// Orthogonal projection onto `{X : X1 = 1, Xᵀ1 = 1}`.
fn project_affine(x: &mut Array2<f64>) {
    let n = x.nrows();
    let nf = n as f64;
    let row: Vec<f64> = x.rows().into_iter().map(|r| r.sum()).collect();
    let col: Vec<f64> = x.columns().into_iter().map(|c| c.sum()).collect();
    let total: f64 = row.iter().sum();
    let shift = (total - nf) / (nf * nf);
    for ((i, j), v) in x.indexed_iter_mut() {
        *v += (1.0 - row[i]) / nf + (1.0 - col[j]) / nf + shift;
    }
}

/// Frobenius-nearest doubly stochastic matrix, by Dykstra's alternating
/// projections between the unit-margin affine set and the nonnegative orthant.
pub fn project_frobenius_to_ds(s: &ArrayView2<'_, f64>, tol: f64) -> Result<DoublyStochasticMatrix> {
    project_frobenius_to_ds_capped(s, tol, DYKSTRA_MAX_SWEEPS)
}

pub fn project_frobenius_to_ds_capped(
    s: &ArrayView2<'_, f64>,
    tol: f64,
    max_sweeps: usize,
) -> Result<DoublyStochasticMatrix> {
    let (rows, cols) = s.dim();
    if rows != cols {
        return Err(GmError::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Err(invalid("empty matrix"));
    }
    if let Some(((i, j), _)) = s.indexed_iter().find(|(_, x)| !x.is_finite()) {
        return Err(GmError::NonFinite(i, j));
    }
    let mut x = s.to_owned();
    // Only the orthant needs a correction term; the affine step is exact.
    let mut correction = Array2::<f64>::zeros(s.raw_dim());
    for _ in 0..max_sweeps {
        let mut y = x.clone();
        project_affine(&mut y);
        let mut change = 0.0;
        ndarray::Zip::from(&mut x)
            .and(&y)
            .and(&mut correction)
            .for_each(|xv, &yv, cv| {
                let z = yv + *cv;
                let next = z.max(0.0);
                *cv = z - next;
                change += (next - *xv) * (next - *xv);
                *xv = next;
            });
        if change.sqrt() < tol && max_sum_deviation(&x.view()) < tol {
            return DoublyStochasticMatrix::with_tolerance(x, tol.max(DS_TOLERANCE));
        }
    }
    Err(GmError::NotConverged { what: "Dykstra projection", iterations: max_sweeps })
}

/// Similarity functions between feature vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    /// `exp(−‖x − y‖² / 2σ²)`.
    Gaussian { sigma: f64 },
    /// `max(⟨x, y⟩, 0)`.
    InnerProduct,
    /// Always 1.
    Constant,
}

impl Kernel {
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            Kernel::Gaussian { sigma } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 / (2.0 * sigma * sigma)).exp()
            }
            Kernel::InnerProduct => x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>().max(0.0),
            Kernel::Constant => 1.0,
        }
    }
}

/// `S[i][j] = κ(X_i, Y_j)` for row-feature tables `X` and `Y`.
pub fn similarity_from_features(
    x: &ArrayView2<'_, f64>,
    y: &ArrayView2<'_, f64>,
    kernel: Kernel,
) -> Result<Array2<f64>> {
    if x.ncols() != y.ncols() {
        return Err(GmError::DimensionMismatch { expected: x.ncols(), found: y.ncols() });
    }
    if let Kernel::Gaussian { sigma } = kernel {
        if !(sigma > 0.0) {
            return Err(invalid("Gaussian kernel needs sigma > 0"));
        }
    }
    let xs: Vec<Vec<f64>> = x.rows().into_iter().map(|r| r.to_vec()).collect();
    let ys: Vec<Vec<f64>> = y.rows().into_iter().map(|r| r.to_vec()).collect();
    Ok(Array2::from_shape_fn((xs.len(), ys.len()), |(i, j)| kernel.eval(&xs[i], &ys[j])))
}

/// Ways of drawing a random doubly stochastic matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomDsMethod {
    /// A uniformly random permutation matrix.
    Permutation,
    /// Sinkhorn balancing of an iid Uniform(0, 1) matrix.
    SinkhornOfUniform,
    /// Uniform-Dirichlet mixture of `k` random permutations.
    ConvexMix(usize),
}

pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PermutationMatrix {
    let mut sigma: Vec<usize> = (0..n).collect();
    sigma.shuffle(rng);
    PermutationMatrix::new(sigma).expect("shuffle of 0..n")
}

pub fn random_doubly_stochastic<R: Rng + ?Sized>(
    n: usize,
    method: RandomDsMethod,
    rng: &mut R,
) -> Result<DoublyStochasticMatrix> {
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    match method {
        RandomDsMethod::Permutation => Ok(DoublyStochasticMatrix::from(&random_permutation(n, rng))),
        RandomDsMethod::SinkhornOfUniform => {
            // Strictly positive draws so balancing always converges.
            let u = Array2::from_shape_fn((n, n), |_| 1.0 - rng.random::<f64>());
            Ok(sinkhorn_knopp(&u.view(), 1e-12, SINKHORN_MAX_ITER)?.matrix)
        }
        RandomDsMethod::ConvexMix(k) => {
            if k == 0 {
                return Err(invalid("convex mixture needs k >= 1"));
            }
            let raw: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
            let total: f64 = raw.iter().sum();
            let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
            let perms: Vec<DoublyStochasticMatrix> =
                (0..k).map(|_| DoublyStochasticMatrix::from(&random_permutation(n, rng))).collect();
            let refs: Vec<&DoublyStochasticMatrix> = perms.iter().collect();
            convex_combination(&weights, &refs)
        }
    }
}

/// `Σ_k w_k D_k` for nonnegative weights summing to one.
pub fn convex_combination(weights: &[f64], matrices: &[&DoublyStochasticMatrix]) -> Result<DoublyStochasticMatrix> {
    if weights.is_empty() || weights.len() != matrices.len() {
        return Err(invalid("need one weight per matrix and at least one matrix"));
    }
    if weights.iter().any(|&w| !(w >= 0.0)) {
        return Err(invalid("weights must be nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(invalid(format!("weights sum to {total}, not 1")));
    }
    let n = matrices[0].n();
    let mut out = Array2::zeros((n, n));
    for (&w, m) in weights.iter().zip(matrices) {
        if m.n() != n {
            return Err(GmError::DimensionMismatch { expected: n, found: m.n() });
        }
        out.scaled_add(w, &m.view());
    }
    debug_assert!(validate_doubly_stochastic(&out.view(), 1e-9));
    Ok(DoublyStochasticMatrix::from_array_unchecked(out))
}

pub fn confusion_matrix(eta: &Partition, beta: &Partition) -> Result<ConfusionMatrix> {
    if eta.n() != beta.n() {
        return Err(GmError::DimensionMismatch { expected: eta.n(), found: beta.n() });
    }
    if eta.parts() != beta.parts() {
        return Err(invalid(format!("part counts differ: {} vs {}", eta.parts(), beta.parts())));
    }
    let mut counts = Array2::zeros((eta.parts(), beta.parts()));
    for (a, b) in eta.labels().iter().zip(beta.labels()) {
        counts[[*a, *b]] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

/// `n − max_P trace(C P)`: vertices in different parts after the best relabelling.
pub fn disagreement(eta: &Partition, beta: &Partition) -> Result<usize> {
    let c = confusion_matrix(eta, beta)?;
    let w = c.counts.mapv(|x| x as f64);
    let p = solve_lap_max_view(w.view())?;
    let matched: usize = p.sigma().iter().enumerate().map(|(i, &j)| c.counts[[i, j]]).sum();
    Ok(eta.n() - matched)
}

/// Samples `η` whose confusion matrix against `β` is exactly
/// `((n−δ)/K) I + (δ/(K(K−1))) (J − I)`. Each part of `β` keeps a uniformly
/// random subset of its vertices and sends equal shares to every other part.
pub fn sample_partition_with_confusion<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    delta: usize,
    beta: &Partition,
    rng: &mut R,
) -> Result<Partition> {
    if k < 2 || n % k != 0 {
        return Err(invalid(format!("need K >= 2 dividing n (n = {n}, K = {k})")));
    }
    if delta % (k * (k - 1)) != 0 {
        return Err(invalid(format!("delta = {delta} is not a multiple of K(K-1) = {}", k * (k - 1))));
    }
    if delta > n - n / k {
        return Err(invalid(format!("delta = {delta} exceeds n - n/K = {}", n - n / k)));
    }
    if beta.n() != n || beta.parts() != k || beta.sizes().iter().any(|&s| s != n / k) {
        return Err(invalid("reference partition must have K equal parts of size n/K"));
    }
    let keep = (n - delta) / k;
    let share = delta / (k * (k - 1));
    let mut labels = vec![0; n];
    for (j, mut members) in beta.members().into_iter().enumerate() {
        members.shuffle(rng);
        let mut it = members.into_iter();
        for v in it.by_ref().take(keep) {
            labels[v] = j;
        }
        for i in (0..k).filter(|&i| i != j) {
            for v in it.by_ref().take(share) {
                labels[v] = i;
            }
        }
    }
    Partition::new(labels, k)
}
