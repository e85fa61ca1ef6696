//! Maximum-weight linear assignment.
//!
//! [`solve_lap_max`] runs a shortest-augmenting-path solver with row and
//! column potentials (O(n³)) on the negated weights, then walks the tight
//! edges of the optimal dual to return the lexicographically smallest
//! optimal assignment, so tied instances give reproducible answers.

use ndarray::ArrayView2;

use crate::error::{GmError, Result};
use crate::linalg::{DoublyStochasticMatrix, PermutationMatrix};

/// Relative tolerance used to decide that two assignments tie.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Largest size accepted by [`lap_bruteforce`].
pub const BRUTEFORCE_LIMIT: usize = 9;

/// A square matrix of finite assignment scores.
#[derive(Debug, Clone, Copy)]
pub struct AssignmentWeights<'a> {
    w: ArrayView2<'a, f64>,
}

impl<'a> AssignmentWeights<'a> {
    pub fn new(w: ArrayView2<'a, f64>) -> Result<Self> {
        let (rows, cols) = w.dim();
        if rows != cols {
            return Err(GmError::NotSquare { rows, cols });
        }
        for ((i, j), x) in w.indexed_iter() {
            if !x.is_finite() {
                return Err(GmError::NonFinite(i, j));
            }
        }
        Ok(Self { w })
    }

    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    pub fn view(&self) -> ArrayView2<'a, f64> {
        self.w
    }

    /// `⟨W, P⟩`.
    pub fn value(&self, p: &PermutationMatrix) -> f64 {
        p.inner(&self.w)
    }

    fn tie_tolerance(&self) -> f64 {
        let scale = self.w.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        TIE_TOLERANCE * scale
    }
}

/// Permutation maximizing `Σ_i W[i][σ(i)]`; ties go to the lexicographically
/// smallest `σ`.
pub fn solve_lap_max(weights: &AssignmentWeights<'_>) -> PermutationMatrix {
    let n = weights.n();
    if n == 0 {
        return PermutationMatrix::identity(0);
    }
    let cost: Vec<f64> = weights.w.iter().map(|&x| -x).collect();
    let (mut row_to_col, u, v) = shortest_augmenting_path(&cost, n);
    let tol = weights.tie_tolerance();
    lexicographic_refine(&cost, n, &u, &v, &mut row_to_col, tol);
    PermutationMatrix::from_vec_unchecked(row_to_col)
}

/// Validating wrapper over [`solve_lap_max`].
pub fn solve_lap_max_view(w: ArrayView2<'_, f64>) -> Result<PermutationMatrix> {
    Ok(solve_lap_max(&AssignmentWeights::new(w)?))
}

/// Rounds a doubly stochastic matrix to the permutation maximizing `⟨D, P⟩`,
/// which is also the Frobenius-nearest permutation.
pub fn project_to_permutation(d: &DoublyStochasticMatrix) -> PermutationMatrix {
    let view = d.view();
    solve_lap_max(&AssignmentWeights { w: view })
}

/// Exhaustive search over all `n!` assignments in lexicographic order.
pub fn lap_bruteforce(weights: &AssignmentWeights<'_>) -> Result<PermutationMatrix> {
    let n = weights.n();
    if n > BRUTEFORCE_LIMIT {
        return Err(GmError::TooLarge { n, limit: BRUTEFORCE_LIMIT });
    }
    let tol = weights.tie_tolerance();
    let w = weights.w;
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = perm.clone();
    let mut best_value = f64::NEG_INFINITY;
    loop {
        let value: f64 = perm.iter().enumerate().map(|(i, &j)| w[[i, j]]).sum();
        if value > best_value + tol {
            best_value = value;
            best.copy_from_slice(&perm);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(PermutationMatrix::from_vec_unchecked(best))
}

/// Advances to the next permutation in lexicographic order; false when `perm` was the last.
pub fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Minimum-cost assignment on a row-major `n×n` cost matrix.
/// Returns the row→column map and the row/column potentials, which satisfy
/// `cost[i][j] − u[i] − v[j] ≥ 0` with equality on the assignment.
fn shortest_augmenting_path(cost: &[f64], n: usize) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    const NONE: usize = usize::MAX;
    // Column index n is the virtual root; col_row[j] is the row owning column j.
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n + 1];
    let mut col_row = vec![NONE; n + 1];
    let mut way = vec![n; n + 1];
    let mut minv = vec![0.0; n + 1];
    let mut used = vec![false; n + 1];

    for row in 0..n {
        col_row[n] = row;
        let mut j0 = n;
        minv.iter_mut().for_each(|m| *m = f64::INFINITY);
        used.iter_mut().for_each(|b| *b = false);
        loop {
            used[j0] = true;
            let i0 = col_row[j0];
            let crow = &cost[i0 * n..(i0 + 1) * n];
            let ui0 = u[i0];
            let mut delta = f64::INFINITY;
            let mut j1 = NONE;
            for j in 0..n {
                if used[j] {
                    continue;
                }
                let cur = crow[j] - ui0 - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[col_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_row[j0] == NONE {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_row[j0] = col_row[j1];
            j0 = j1;
            if j0 == n {
                break;
            }
        }
    }

    let mut row_to_col = vec![0; n];
    for j in 0..n {
        row_to_col[col_row[j]] = j;
    }
    v.truncate(n);
    (row_to_col, u, v)
}

/// Rewrites an optimal assignment into the lexicographically smallest one
/// among the perfect matchings on tight (zero reduced cost) edges.
fn lexicographic_refine(
    cost: &[f64],
    n: usize,
    u: &[f64],
    v: &[f64],
    row_to_col: &mut [usize],
    tol: f64,
) {
    let tight = |i: usize, j: usize| cost[i * n + j] - u[i] - v[j] <= tol;
    let mut col_to_row = vec![0; n];
    for (i, &j) in row_to_col.iter().enumerate() {
        col_to_row[j] = i;
    }
    let mut reach_parent = vec![usize::MAX; n];
    let mut queue = Vec::with_capacity(n);

    for i in 0..n {
        let c0 = row_to_col[i];
        // Only columns smaller than the current one, owned by unfixed rows, can improve.
        let has_candidate = (0..c0).any(|j| col_to_row[j] > i && tight(i, j));
        if !has_candidate {
            continue;
        }
        // Rows that can give up their column along an alternating path ending at c0.
        reach_parent.iter_mut().for_each(|p| *p = usize::MAX);
        queue.clear();
        queue.push(c0);
        let mut head = 0;
        while head < queue.len() {
            let c = queue[head];
            head += 1;
            for r in (i + 1)..n {
                if reach_parent[r] == usize::MAX && r != col_to_row[c] && tight(r, c) {
                    reach_parent[r] = c;
                    queue.push(row_to_col[r]);
                }
            }
        }
        let target = (0..c0).find(|&j| {
            let r = col_to_row[j];
            r > i && tight(i, j) && reach_parent[r] != usize::MAX
        });
        if let Some(j) = target {
            let mut chain = vec![(i, j)];
            let mut r = col_to_row[j];
            loop {
                let c = reach_parent[r];
                chain.push((r, c));
                if c == c0 {
                    break;
                }
                r = col_to_row[c];
            }
            for (r, c) in chain {
                row_to_col[r] = c;
                col_to_row[c] = r;
            }
        }
    }
}
