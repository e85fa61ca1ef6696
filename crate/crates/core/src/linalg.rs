//! Matrix types shared by the solver, the samplers and the initializers,
//! together with the matching objectives and accuracy metrics.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, GmError, Result};

/// Default tolerance on row and column sums for [`DoublyStochasticMatrix`].
pub const DS_TOLERANCE: f64 = 1e-9;

/// Symmetric, hollow 0/1 adjacency matrix of a simple undirected graph.
///
/// Entries are stored as `f64` so that products with doubly stochastic
/// matrices go straight through the dense kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    entries: Array2<f64>,
}

impl AdjacencyMatrix {
    pub fn empty(n: usize) -> Self {
        Self { entries: Array2::zeros((n, n)) }
    }

    /// Validates symmetry, hollowness and binary entries.
    pub fn from_dense(entries: Array2<f64>) -> Result<Self> {
        let (rows, cols) = entries.dim();
        if rows != cols {
            return Err(GmError::NotSquare { rows, cols });
        }
        for i in 0..rows {
            if entries[[i, i]] != 0.0 {
                return Err(GmError::SelfLoop(i));
            }
            for j in 0..rows {
                let x = entries[[i, j]];
                if x != 0.0 && x != 1.0 {
                    return Err(GmError::NotBinary(i, j));
                }
                if x != entries[[j, i]] {
                    return Err(GmError::NotSymmetric(i, j));
                }
            }
        }
        Ok(Self { entries })
    }

    /// Builds a graph from undirected edges; duplicates are rejected, self-loops too.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut entries = Array2::zeros((n, n));
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(invalid(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if u == v {
                return Err(GmError::SelfLoop(u));
            }
            if entries[[u, v]] != 0.0 {
                return Err(invalid(format!("duplicate edge ({u}, {v})")));
            }
            entries[[u, v]] = 1.0;
            entries[[v, u]] = 1.0;
        }
        Ok(Self { entries })
    }

    pub(crate) fn from_dense_unchecked(entries: Array2<f64>) -> Self {
        Self { entries }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.entries.view()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.entries[[u, v]] != 0.0
    }

    /// Edges `(u, v)` with `u < v`, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        let mut out = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if self.has_edge(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        (self.entries.sum() / 2.0) as usize
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.entries.rows().into_iter().map(|r| r.sum() as usize).collect()
    }

    /// Squared Frobenius norm, i.e. twice the edge count.
    pub fn frobenius_sq(&self) -> u64 {
        2 * self.edge_count() as u64
    }

    /// The relabelled graph `P A Pᵀ`, whose entry `(i, j)` is `A[σ(i)][σ(j)]`.
    pub fn permuted(&self, p: &PermutationMatrix) -> Result<Self> {
        check_dim(self.n(), p.n())?;
        let s = p.sigma();
        let n = self.n();
        let entries = Array2::from_shape_fn((n, n), |(i, j)| self.entries[[s[i], s[j]]]);
        Ok(Self { entries })
    }
}

/// A bijection `σ` on `0..n`, read as the matrix with `P[i][σ(i)] = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct PermutationMatrix {
    sigma: Vec<usize>,
}

impl PermutationMatrix {
    pub fn new(sigma: Vec<usize>) -> Result<Self> {
        let n = sigma.len();
        let mut seen = vec![false; n];
        for &s in &sigma {
            if s >= n || seen[s] {
                return Err(GmError::InvalidPermutation(n));
            }
            seen[s] = true;
        }
        Ok(Self { sigma })
    }

    pub(crate) fn from_vec_unchecked(sigma: Vec<usize>) -> Self {
        debug_assert!(Self::new(sigma.clone()).is_ok());
        Self { sigma }
    }

    pub fn identity(n: usize) -> Self {
        Self { sigma: (0..n).collect() }
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn image(&self, i: usize) -> usize {
        self.sigma[i]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.n()];
        for (i, &s) in self.sigma.iter().enumerate() {
            inv[s] = i;
        }
        Self { sigma: inv }
    }

    /// Number of fixed points.
    pub fn fixed_points(&self) -> usize {
        self.sigma.iter().enumerate().filter(|&(i, &s)| i == s).count()
    }

    pub fn is_identity(&self) -> bool {
        self.fixed_points() == self.n()
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let n = self.n();
        let mut m = Array2::zeros((n, n));
        for (i, &s) in self.sigma.iter().enumerate() {
            m[[i, s]] = 1.0;
        }
        m
    }

    /// Frobenius inner product `⟨W, P⟩ = Σ_i W[i][σ(i)]`.
    pub fn inner(&self, w: &ArrayView2<'_, f64>) -> f64 {
        self.sigma.iter().enumerate().map(|(i, &s)| w[[i, s]]).sum()
    }

    /// Recovers a permutation from a dense 0/1 matrix, if it is one (within `tol`).
    pub fn from_dense(m: &ArrayView2<'_, f64>, tol: f64) -> Option<Self> {
        let (rows, cols) = m.dim();
        if rows != cols {
            return None;
        }
        let mut sigma = Vec::with_capacity(rows);
        for row in m.rows() {
            let mut hit = None;
            for (j, &x) in row.iter().enumerate() {
                if (x - 1.0).abs() <= tol {
                    if hit.is_some() {
                        return None;
                    }
                    hit = Some(j);
                } else if x.abs() > tol {
                    return None;
                }
            }
            sigma.push(hit?);
        }
        Self::new(sigma).ok()
    }
}

impl TryFrom<Vec<usize>> for PermutationMatrix {
    type Error = GmError;

    fn try_from(sigma: Vec<usize>) -> Result<Self> {
        Self::new(sigma)
    }
}

impl From<PermutationMatrix> for Vec<usize> {
    fn from(p: PermutationMatrix) -> Self {
        p.sigma
    }
}

/// Nonnegative square matrix with unit row and column sums.
#[derive(Debug, Clone, PartialEq)]
pub struct DoublyStochasticMatrix {
    entries: Array2<f64>,
}

impl DoublyStochasticMatrix {
    /// Validates at [`DS_TOLERANCE`].
    pub fn new(entries: Array2<f64>) -> Result<Self> {
        Self::with_tolerance(entries, DS_TOLERANCE)
    }

    pub fn with_tolerance(entries: Array2<f64>, tol: f64) -> Result<Self> {
        let (rows, cols) = entries.dim();
        if rows != cols {
            return Err(GmError::NotSquare { rows, cols });
        }
        if !validate_doubly_stochastic(&entries.view(), tol) {
            return Err(GmError::NotDoublyStochastic { tol });
        }
        Ok(Self { entries })
    }

    pub(crate) fn from_array_unchecked(entries: Array2<f64>) -> Self {
        Self { entries }
    }

    pub fn identity(n: usize) -> Self {
        Self { entries: Array2::eye(n) }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.entries.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.entries
    }

    /// Diagonal sum, reported to twelve decimal places.
    pub fn trace(&self) -> f64 {
        diag_trace(&self.entries.view())
    }

    /// `Some(P)` when every entry is within `tol` of 0 or 1.
    pub fn as_permutation(&self, tol: f64) -> Option<PermutationMatrix> {
        PermutationMatrix::from_dense(&self.view(), tol)
    }
}

impl From<&PermutationMatrix> for DoublyStochasticMatrix {
    fn from(p: &PermutationMatrix) -> Self {
        Self { entries: p.to_dense() }
    }
}

/// Square matrices with a trace, so accuracy and loss apply to both
/// permutations and doubly stochastic iterates.
/// Compensated diagonal sum rounded to twelve decimals, so that starts built
/// from blocks of `1/b` entries report integer traces exactly.
pub fn diag_trace(m: &ArrayView2<'_, f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for &x in m.diag() {
        let t = sum + x;
        comp += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    ((sum + comp) * 1e12).round() / 1e12
}

pub trait SquareTrace {
    fn size(&self) -> usize;
    fn trace_value(&self) -> f64;
}

impl SquareTrace for PermutationMatrix {
    fn size(&self) -> usize {
        self.n()
    }
    fn trace_value(&self) -> f64 {
        self.fixed_points() as f64
    }
}

impl SquareTrace for DoublyStochasticMatrix {
    fn size(&self) -> usize {
        self.n()
    }
    fn trace_value(&self) -> f64 {
        self.trace()
    }
}

/// Fraction of vertices mapped to their true partner, `trace(M)/n`.
pub fn accuracy<M: SquareTrace + ?Sized>(m: &M) -> f64 {
    m.trace_value() / m.size() as f64
}

/// `n − trace(M)`.
pub fn loss<M: SquareTrace + ?Sized>(m: &M) -> f64 {
    m.size() as f64 - m.trace_value()
}

/// True iff all entries are `≥ −tol` and every row and column sum is within `tol` of 1.
pub fn validate_doubly_stochastic(m: &ArrayView2<'_, f64>, tol: f64) -> bool {
    let (rows, cols) = m.dim();
    if rows != cols {
        return false;
    }
    if m.iter().any(|&x| !x.is_finite() || x < -tol) {
        return false;
    }
    let row_ok = m.rows().into_iter().all(|r| (r.sum() - 1.0).abs() <= tol);
    let col_ok = m.columns().into_iter().all(|c| (c.sum() - 1.0).abs() <= tol);
    row_ok && col_ok
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(GmError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `‖A − P B Pᵀ‖_F²`, counted exactly: the number of ordered pairs on which
/// `A` and the relabelled `B` disagree.
pub fn gm_edit_objective(
    a: &AdjacencyMatrix,
    b: &AdjacencyMatrix,
    p: &PermutationMatrix,
) -> Result<u64> {
    check_dim(a.n(), b.n())?;
    check_dim(a.n(), p.n())?;
    let s = p.sigma();
    let n = a.n();
    let mut count = 0u64;
    for i in 0..n {
        for j in 0..n {
            if a.entries[[i, j]] != b.entries[[s[i], s[j]]] {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// `trace(A P B Pᵀ) = Σ_ij A[i][j] B[σ(i)][σ(j)]`, an exact edge-overlap count.
pub fn permutation_objective(
    a: &AdjacencyMatrix,
    b: &AdjacencyMatrix,
    p: &PermutationMatrix,
) -> Result<u64> {
    check_dim(a.n(), b.n())?;
    check_dim(a.n(), p.n())?;
    Ok(overlap(&a.view(), &b.view(), p.sigma()) as u64)
}

/// `Σ_ij A[i][j] B[σ(i)][σ(j)]` for arbitrary (symmetric) real matrices.
pub(crate) fn overlap(a: &ArrayView2<'_, f64>, b: &ArrayView2<'_, f64>, sigma: &[usize]) -> f64 {
    let mut total = 0.0;
    for (i, row) in a.rows().into_iter().enumerate() {
        let brow = b.row(sigma[i]);
        for (j, &x) in row.iter().enumerate() {
            if x != 0.0 {
                total += x * brow[sigma[j]];
            }
        }
    }
    total
}

/// Relaxed objective `trace(A D B Dᵀ)`.
pub fn trace_objective(
    a: &AdjacencyMatrix,
    b: &AdjacencyMatrix,
    d: &DoublyStochasticMatrix,
) -> Result<f64> {
    check_dim(a.n(), b.n())?;
    check_dim(a.n(), d.n())?;
    Ok(trace_objective_raw(&a.view(), &b.view(), &d.view()))
}

pub(crate) fn trace_objective_raw(
    a: &ArrayView2<'_, f64>,
    b: &ArrayView2<'_, f64>,
    d: &ArrayView2<'_, f64>,
) -> f64 {
    let adb = a.dot(d).dot(b);
    frobenius_inner(&adb.view(), d)
}

pub(crate) fn frobenius_inner(x: &ArrayView2<'_, f64>, y: &ArrayView2<'_, f64>) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b).sum()
}

/// One row of a solver trajectory, describing iterate `D_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub iter: usize,
    pub trace: f64,
    pub accuracy: f64,
    pub objective: f64,
    /// Step length that produced this iterate; `None` for the starting point.
    pub alpha: Option<f64>,
    /// Trace of the assignment direction the step moved toward.
    pub direction_trace: Option<f64>,
}

/// Per-iteration history of a solver run. Iteration indices start at 0 and
/// increase by one.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Trajectory {
    records: Vec<TrajectoryRecord>,
}

impl Trajectory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: TrajectoryRecord) {
        debug_assert_eq!(record.iter, self.records.len());
        self.records.push(record);
    }

    pub fn records(&self) -> &[TrajectoryRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TrajectoryRecord> {
        self.records.last()
    }

    /// Accuracy after `iter` steps, carrying the final value forward once the run stopped.
    pub fn accuracy_at(&self, iter: usize) -> Option<f64> {
        self.records.get(iter).or(self.records.last()).map(|r| r.accuracy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn path3() -> AdjacencyMatrix {
        AdjacencyMatrix::from_edges(3, &[(0, 1), (1, 2)]).unwrap()
    }

    fn complete(n: usize) -> AdjacencyMatrix {
        let mut e = vec![];
        for u in 0..n {
            for v in (u + 1)..n {
                e.push((u, v));
            }
        }
        AdjacencyMatrix::from_edges(n, &e).unwrap()
    }

    #[test]
    fn rejects_bad_adjacency() {
        assert!(matches!(
            AdjacencyMatrix::from_dense(array![[0.0, 1.0], [0.0, 0.0]]),
            Err(GmError::NotSymmetric(..))
        ));
        assert!(matches!(
            AdjacencyMatrix::from_dense(array![[1.0, 0.0], [0.0, 0.0]]),
            Err(GmError::SelfLoop(0))
        ));
        assert!(AdjacencyMatrix::from_edges(2, &[(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn edit_objective_identity_is_zero() {
        let a = path3();
        assert_eq!(gm_edit_objective(&a, &a, &PermutationMatrix::identity(3)).unwrap(), 0);
    }

    #[test]
    fn edit_objective_cycle_relabels_path() {
        // B has edges {1,2},{2,0} (0-indexed version of {2,3},{3,1}).
        let a = path3();
        let b = AdjacencyMatrix::from_edges(3, &[(1, 2), (2, 0)]).unwrap();
        let p = PermutationMatrix::new(vec![1, 2, 0]).unwrap();
        assert_eq!(gm_edit_objective(&a, &b, &p).unwrap(), 0);
    }

    #[test]
    fn edit_objective_single_edge_vs_empty() {
        let a = AdjacencyMatrix::from_edges(2, &[(0, 1)]).unwrap();
        let b = AdjacencyMatrix::empty(2);
        for sigma in [vec![0, 1], vec![1, 0]] {
            let p = PermutationMatrix::new(sigma).unwrap();
            assert_eq!(gm_edit_objective(&a, &b, &p).unwrap(), 2);
        }
    }

    #[test]
    fn edit_objective_dimension_mismatch() {
        let a = path3();
        let b = AdjacencyMatrix::empty(2);
        assert!(matches!(
            gm_edit_objective(&a, &b, &PermutationMatrix::identity(3)),
            Err(GmError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn trace_objective_complete_graph() {
        let k3 = complete(3);
        let v = trace_objective(&k3, &k3, &DoublyStochasticMatrix::identity(3)).unwrap();
        assert_eq!(v, 6.0);
    }

    #[test]
    fn trace_objective_at_barycenter() {
        let a = path3();
        let b = complete(3);
        let d = DoublyStochasticMatrix::new(Array2::from_elem((3, 3), 1.0 / 3.0)).unwrap();
        let v = trace_objective(&a, &b, &d).unwrap();
        // (sum A)(sum B)/n^2 = 4 * 6 / 9
        assert!((v - 24.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn accuracy_and_loss() {
        let n = 4;
        let bary = DoublyStochasticMatrix::new(Array2::from_elem((n, n), 0.25)).unwrap();
        assert_eq!(accuracy(&DoublyStochasticMatrix::identity(n)), 1.0);
        assert!((accuracy(&bary) - 0.25).abs() < 1e-15);
        assert!((loss(&bary) - 3.0).abs() < 1e-12);
        let swap = PermutationMatrix::new(vec![1, 0, 2, 3]).unwrap();
        assert_eq!(accuracy(&swap), 0.5);
        assert_eq!(loss(&DoublyStochasticMatrix::identity(n)), 0.0);
        for m in [&bary, &DoublyStochasticMatrix::from(&swap)] {
            assert!((loss(m) - n as f64 * (1.0 - accuracy(m))).abs() < 1e-12);
        }
    }

    #[test]
    fn validation() {
        assert!(validate_doubly_stochastic(&Array2::<f64>::eye(5).view(), 1e-9));
        assert!(validate_doubly_stochastic(&Array2::from_elem((5, 5), 0.2).view(), 1e-9));
        let m = array![[0.6, 0.5], [0.4, 0.5]];
        assert!(!validate_doubly_stochastic(&m.view(), 1e-9));
        let neg = array![[1.5, -0.5], [-0.5, 1.5]];
        assert!(!validate_doubly_stochastic(&neg.view(), 1e-9));
    }

    #[test]
    fn permutation_roundtrip_dense() {
        let p = PermutationMatrix::new(vec![2, 0, 1]).unwrap();
        let d = p.to_dense();
        assert_eq!(PermutationMatrix::from_dense(&d.view(), 1e-12), Some(p.clone()));
        assert_eq!(p.inverse().inverse(), p);
        assert!(PermutationMatrix::new(vec![0, 0, 1]).is_err());
    }
}
