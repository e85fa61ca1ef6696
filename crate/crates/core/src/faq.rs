//! Frank-Wolfe ascent on the doubly stochastic relaxation of graph matching.
//!
//! Every variant maximizes a quadratic of the form
//! `f(D) = trace(A D B Dᵀ) + ⟨L, D⟩` over the Birkhoff polytope, where the
//! linear term `L` is zero for plain matching, `Sᵀ` for a similarity-augmented
//! objective and `2 A₁₂ᵀ B₁₂` for hard seeds. Each step solves a linear
//! assignment problem on the gradient `2 A D B + L` and moves toward the
//! resulting permutation by an exact line search.
//!
//! The direction step maximizes the Frobenius inner product `⟨G, P⟩`; for
//! symmetric `A` and `B` this picks the same maximizers as `trace(A D B P)`
//! up to transposing `P`.

use ndarray::{s, Array2, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ds_init::{random_doubly_stochastic, Partition, RandomDsMethod};
use crate::error::{invalid, GmError, Result};
use crate::lap::{project_to_permutation, solve_lap_max, AssignmentWeights};
use crate::linalg::{
    check_dim, diag_trace, frobenius_inner, overlap, trace_objective_raw, AdjacencyMatrix, DoublyStochasticMatrix,
    PermutationMatrix, Trajectory, TrajectoryRecord,
};
use crate::random_graphs::TheoryThresholds;

/// Entries within this distance of 0 or 1 count as a permutation.
pub const PERMUTATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FaqOptions {
    pub max_iter: usize,
    /// Stop once the Frank-Wolfe gap is at most `obj_tol · max(1, |f(D)|)`.
    pub obj_tol: f64,
    /// Stop once a step moves `D` by less than this in Frobenius norm.
    pub d_tol: f64,
    pub record_trajectory: bool,
    /// Round the final iterate with a linear assignment; otherwise the last
    /// search direction is reported when the iterate is not a permutation.
    pub project_final: bool,
}

impl Default for FaqOptions {
    fn default() -> Self {
        Self { max_iter: 100, obj_tol: 1e-10, d_tol: 1e-8, record_trajectory: true, project_final: true }
    }
}

impl FaqOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(invalid("max_iter must be at least 1"));
        }
        if !(self.obj_tol > 0.0) || !(self.d_tol > 0.0) {
            return Err(invalid("tolerances must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Frank-Wolfe gap below tolerance, or no ascent along the segment.
    Stationary,
    /// The last step moved less than `d_tol`.
    SmallStep,
    MaxIter,
}

#[derive(Debug, Clone)]
pub struct MatchResult {
    pub p_star: PermutationMatrix,
    pub d_final: DoublyStochasticMatrix,
    pub trajectory: Trajectory,
    /// Frank-Wolfe steps taken.
    pub iterations: usize,
    pub converged_at_permutation: bool,
    /// Relaxed objective at `d_final`.
    pub final_objective: f64,
    pub stop_reason: StopReason,
}

#[derive(Serialize)]
struct TrajectoryRow {
    iter: usize,
    trace: f64,
    accuracy: f64,
    objective: f64,
    alpha: Option<f64>,
}

#[derive(Serialize)]
struct MatchResultDoc<'a> {
    sigma: &'a [usize],
    accuracy: f64,
    objective: f64,
    iterations: usize,
    converged_at_permutation: bool,
    trajectory: Vec<TrajectoryRow>,
}

impl MatchResult {
    pub fn accuracy(&self) -> f64 {
        crate::linalg::accuracy(&self.p_star)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = MatchResultDoc {
            sigma: self.p_star.sigma(),
            accuracy: self.accuracy(),
            objective: self.final_objective,
            iterations: self.iterations,
            converged_at_permutation: self.converged_at_permutation,
            trajectory: self
                .trajectory
                .records()
                .iter()
                .map(|r| TrajectoryRow {
                    iter: r.iter,
                    trace: r.trace,
                    accuracy: r.accuracy,
                    objective: r.objective,
                    alpha: r.alpha,
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }
}

/// Quadratic coefficients of `f(D + α(P − D)) = a α² + b α + c` and the
/// chosen step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearch {
    pub alpha: f64,
    pub objective: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl LineSearch {
    fn from_coefficients(a: f64, b: f64, c: f64) -> Self {
        let alpha = if a == 0.0 && b == 0.0 {
            0.0
        } else if a < 0.0 {
            (-b / (2.0 * a)).clamp(0.0, 1.0)
        } else if a + b >= 0.0 {
            1.0
        } else {
            0.0
        };
        Self { alpha, objective: a * alpha * alpha + b * alpha + c, a, b, c }
    }

    pub fn eval(&self, alpha: f64) -> f64 {
        self.a * alpha * alpha + self.b * alpha + self.c
    }
}

/// Exact maximizer of `trace(A D_α B D_αᵀ)` for `D_α = D + α(P − D)`, `α ∈ [0, 1]`.
pub fn line_search_alpha(
    a: &AdjacencyMatrix,
    b: &AdjacencyMatrix,
    d: &DoublyStochasticMatrix,
    p: &PermutationMatrix,
) -> Result<LineSearch> {
    check_dim(a.n(), b.n())?;
    check_dim(a.n(), d.n())?;
    check_dim(a.n(), p.n())?;
    let adb = a.view().dot(&d.view()).dot(&b.view());
    let c = frobenius_inner(&adb.view(), &d.view());
    let adb_p = p.inner(&adb.view());
    let quad = overlap(&a.view(), &b.view(), p.sigma()) - 2.0 * adb_p + c;
    let lin = 2.0 * (adb_p - c);
    Ok(LineSearch::from_coefficients(quad, lin, c))
}

/// View of an iterate handed to run observers.
pub struct IterateView<'a> {
    pub iter: usize,
    pub d: ArrayView2<'a, f64>,
    pub objective: f64,
}

struct Problem<'a> {
    a: ArrayView2<'a, f64>,
    b: ArrayView2<'a, f64>,
    linear: Option<ArrayView2<'a, f64>>,
}

struct RawRun {
    d: Array2<f64>,
    trajectory: Trajectory,
    iterations: usize,
    objective: f64,
    last_direction: Option<PermutationMatrix>,
    stop_reason: StopReason,
}

fn frank_wolfe(
    problem: &Problem<'_>,
    d0: Array2<f64>,
    opts: &FaqOptions,
    observer: &mut dyn FnMut(&IterateView<'_>),
) -> RawRun {
    let n = d0.nrows();
    let nf = n as f64;
    let mut d = d0;
    let mut trajectory = Trajectory::new();
    let mut iterations = 0;
    let mut last_step: Option<(f64, f64)> = None;
    let mut last_direction = None;
    let mut pending_stop = None;

    loop {
        let adb = problem.a.dot(&d).dot(&problem.b);
        let quad = frobenius_inner(&adb.view(), &d.view());
        let lin = problem.linear.map_or(0.0, |l| frobenius_inner(&l, &d.view()));
        let objective = quad + lin;
        let trace = diag_trace(&d.view());
        trajectory.push(TrajectoryRecord {
            iter: iterations,
            trace,
            accuracy: trace / nf,
            objective,
            alpha: last_step.map(|s| s.0),
            direction_trace: last_step.map(|s| s.1),
        });
        observer(&IterateView { iter: iterations, d: d.view(), objective });

        if let Some(reason) = pending_stop {
            return RawRun { d, trajectory, iterations, objective, last_direction, stop_reason: reason };
        }
        if iterations >= opts.max_iter {
            return RawRun { d, trajectory, iterations, objective, last_direction, stop_reason: StopReason::MaxIter };
        }

        let mut grad = adb.clone() * 2.0;
        if let Some(l) = problem.linear {
            grad += &l;
        }
        let direction = solve_lap_max(&AssignmentWeights::new(grad.view()).expect("finite gradient"));
        let grad_p = direction.inner(&grad.view());
        let grad_d = frobenius_inner(&grad.view(), &d.view());
        let gap = grad_p - grad_d;
        if gap <= opts.obj_tol * objective.abs().max(1.0) {
            last_direction = Some(direction);
            return RawRun { d, trajectory, iterations, objective, last_direction, stop_reason: StopReason::Stationary };
        }

        let adb_p = direction.inner(&adb.view());
        let curvature = overlap(&problem.a, &problem.b, direction.sigma()) - 2.0 * adb_p + quad;
        let step = LineSearch::from_coefficients(curvature, gap, objective);
        if step.alpha <= 0.0 {
            last_direction = Some(direction);
            return RawRun { d, trajectory, iterations, objective, last_direction, stop_reason: StopReason::Stationary };
        }

        let alpha = step.alpha;
        let sigma = direction.sigma();
        let mut moved_sq = 0.0;
        for ((i, j), v) in d.indexed_iter_mut() {
            let target = if sigma[i] == j { 1.0 } else { 0.0 };
            let delta = alpha * (target - *v);
            moved_sq += delta * delta;
            *v = if alpha == 1.0 { target } else { *v + delta };
        }
        iterations += 1;
        last_step = Some((alpha, direction.fixed_points() as f64));
        last_direction = Some(direction);
        if moved_sq.sqrt() < opts.d_tol {
            pending_stop = Some(StopReason::SmallStep);
        }
    }
}

fn finish(
    raw: RawRun,
    d_final: DoublyStochasticMatrix,
    p_star: PermutationMatrix,
    converged_at_permutation: bool,
    opts: &FaqOptions,
) -> MatchResult {
    let mut trajectory = raw.trajectory;
    if !opts.record_trajectory {
        trajectory = Trajectory::new();
    }
    MatchResult {
        p_star,
        d_final,
        trajectory,
        iterations: raw.iterations,
        converged_at_permutation,
        final_objective: raw.objective,
        stop_reason: raw.stop_reason,
    }
}

fn round_final(raw: &RawRun, opts: &FaqOptions) -> (DoublyStochasticMatrix, PermutationMatrix, bool) {
    let d_final = DoublyStochasticMatrix::from_array_unchecked(raw.d.clone());
    let exact = d_final.as_permutation(PERMUTATION_TOL);
    let converged = exact.is_some();
    let p_star = match exact {
        Some(p) => p,
        None if opts.project_final => project_to_permutation(&d_final),
        None => raw.last_direction.clone().unwrap_or_else(|| project_to_permutation(&d_final)),
    };
    (d_final, p_star, converged)
}

fn check_pair(a: &AdjacencyMatrix, b: &AdjacencyMatrix, d0: &DoublyStochasticMatrix) -> Result<()> {
    check_dim(a.n(), b.n())?;
    check_dim(a.n(), d0.n())
}

/// Plain FAQ: maximizes `trace(A D B Dᵀ)` from `d0`.
pub fn faq(
    a: &AdjacencyMatrix,
    b: &AdjacencyMatrix,
    d0: &DoublyStochasticMatrix,
    opts: &FaqOptions,
) -> Result<MatchResult> {
    faq_observed(a, b, d0, opts, &mut |_| {})
}

/// [`faq`] with a callback invoked on every iterate, including the start.
pub fn faq_observed(
    a: &AdjacencyMatrix,
    b: &AdjacencyMatrix,
    d0: &DoublyStochasticMatrix,
    opts: &FaqOptions,
    observer: &mut dyn FnMut(&IterateView<'_>),
) -> Result<MatchResult> {
    check_pair(a, b, d0)?;
    opts.validate()?;
    let problem = Problem { a: a.view(), b: b.view(), linear: None };
    let raw = frank_wolfe(&problem, d0.view().to_owned(), opts, observer);
    let (d_final, p_star, converged) = round_final(&raw, opts);
    Ok(finish(raw, d_final, p_star, converged, opts))
}

/// Maximizes `trace(A D B Dᵀ) + trace(S D)`; the gradient is `2 A D B + Sᵀ`.
pub fn faq_with_similarity(
    a: &AdjacencyMatrix,
    b: &AdjacencyMatrix,
    similarity: &ArrayView2<'_, f64>,
    d0: &DoublyStochasticMatrix,
    opts: &FaqOptions,
) -> Result<MatchResult> {
    check_pair(a, b, d0)?;
    opts.validate()?;
    if similarity.dim() != (a.n(), a.n()) {
        return Err(GmError::DimensionMismatch { expected: a.n(), found: similarity.nrows() });
    }
    if let Some(((i, j), _)) = similarity.indexed_iter().find(|(_, x)| !x.is_finite()) {
        return Err(GmError::NonFinite(i, j));
    }
    let linear = similarity.t();
    let problem = Problem { a: a.view(), b: b.view(), linear: Some(linear) };
    let raw = frank_wolfe(&problem, d0.view().to_owned(), opts, &mut |_| {});
    let (d_final, p_star, converged) = round_final(&raw, opts);
    Ok(finish(raw, d_final, p_star, converged, opts))
}

/// Seeded objective `2 trace(A₁₂ D B₁₂ᵀ) + trace(A₂₂ D B₂₂ Dᵀ)` over the
/// non-seed block, where the first `seeds` vertices of both graphs are known
/// to correspond. The returned permutation fixes the seeds; trajectory traces
/// and accuracies count the seeds as matched.
pub fn faq_hard_seeded(
    a: &AdjacencyMatrix,
    b: &AdjacencyMatrix,
    seeds: usize,
    d0_nonseed: &DoublyStochasticMatrix,
    opts: &FaqOptions,
) -> Result<MatchResult> {
    check_dim(a.n(), b.n())?;
    opts.validate()?;
    let n = a.n();
    if seeds >= n {
        return Err(invalid(format!("{seeds} seeds leave no free vertices out of {n}")));
    }
    check_dim(n - seeds, d0_nonseed.n())?;
    let (av, bv) = (a.view(), b.view());
    let a22 = av.slice(s![seeds.., seeds..]);
    let b22 = bv.slice(s![seeds.., seeds..]);
    let linear = if seeds > 0 {
        let a12 = av.slice(s![..seeds, seeds..]);
        let b12 = bv.slice(s![..seeds, seeds..]);
        Some(a12.t().dot(&b12) * 2.0)
    } else {
        None
    };
    let problem = Problem { a: a22, b: b22, linear: linear.as_ref().map(|l| l.view()) };
    let mut raw = frank_wolfe(&problem, d0_nonseed.view().to_owned(), opts, &mut |_| {});
    let (d_sub, p_sub, converged) = round_final(&raw, opts);

    let mut sigma: Vec<usize> = (0..seeds).collect();
    sigma.extend(p_sub.sigma().iter().map(|&j| j + seeds));
    let p_star = PermutationMatrix::from_vec_unchecked(sigma);
    let mut d_full = Array2::zeros((n, n));
    for i in 0..seeds {
        d_full[[i, i]] = 1.0;
    }
    d_full.slice_mut(s![seeds.., seeds..]).assign(&d_sub.view());

    let shift = seeds as f64;
    let mut trajectory = Trajectory::new();
    for r in raw.trajectory.records() {
        trajectory.push(TrajectoryRecord {
            trace: r.trace + shift,
            accuracy: (r.trace + shift) / n as f64,
            direction_trace: r.direction_trace.map(|t| t + shift),
            ..r.clone()
        });
    }
    raw.trajectory = trajectory;
    let d_final = DoublyStochasticMatrix::from_array_unchecked(d_full);
    Ok(finish(raw, d_final, p_star, converged, opts))
}

/// Where the mistakes of an alignment fall relative to two vertex partitions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBreakdown {
    pub within_d0: usize,
    pub between_d0: usize,
    pub within_sbm: usize,
    pub between_sbm: usize,
}

impl ErrorBreakdown {
    pub fn errors(&self) -> usize {
        self.within_d0 + self.between_d0
    }
}

/// Classifies every vertex with `σ(i) ≠ i` as a within-part or between-part
/// error against each partition.
pub fn error_breakdown(p: &PermutationMatrix, d0_partition: &Partition, sbm_partition: &Partition) -> Result<ErrorBreakdown> {
    check_dim(p.n(), d0_partition.n())?;
    check_dim(p.n(), sbm_partition.n())?;
    let mut out = ErrorBreakdown::default();
    for (i, &j) in p.sigma().iter().enumerate() {
        if i == j {
            continue;
        }
        if d0_partition.label(i) == d0_partition.label(j) {
            out.within_d0 += 1;
        } else {
            out.between_d0 += 1;
        }
        if sbm_partition.label(i) == sbm_partition.label(j) {
            out.within_sbm += 1;
        } else {
            out.between_sbm += 1;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoStepOutcome {
    /// Whether some iterate among `D_0, D_1, D_2` is the identity.
    pub converged_to_identity_in_two: bool,
    /// Index of the first identity iterate, or the number of steps taken when none was.
    pub steps_used: usize,
    pub start_trace: f64,
    pub thresholds: Option<TheoryThresholds>,
}

/// Runs at most two Frank-Wolfe steps from `d0` and reports whether the
/// identity (the true correspondence) was reached.
pub fn two_step_check(
    a: &AdjacencyMatrix,
    b: &AdjacencyMatrix,
    d0: &DoublyStochasticMatrix,
    thresholds: Option<TheoryThresholds>,
) -> Result<TwoStepOutcome> {
    let opts = FaqOptions { max_iter: 2, ..FaqOptions::default() };
    let n = a.n() as f64;
    let mut first_identity = None;
    let run = faq_observed(a, b, d0, &opts, &mut |it| {
        if first_identity.is_none() && diag_trace(&it.d) >= n - PERMUTATION_TOL {
            first_identity = Some(it.iter);
        }
    })?;
    Ok(TwoStepOutcome {
        converged_to_identity_in_two: first_identity.is_some(),
        steps_used: first_identity.unwrap_or(run.iterations),
        start_trace: d0.trace(),
        thresholds,
    })
}

#[derive(Debug, Clone)]
pub struct RestartRun {
    /// Index of the random start that produced this run.
    pub start: usize,
    pub result: MatchResult,
    /// `trace(A P* B P*ᵀ)` of the rounded matching.
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct RestartProbe {
    /// Runs sorted by decreasing objective (stable in start order).
    pub runs: Vec<RestartRun>,
    /// Best objective minus the best objective among the other runs.
    pub gap_to_next: f64,
}

/// Runs FAQ from `k` random doubly stochastic starts to explore local maxima.
pub fn random_restart_probe<R: Rng + ?Sized>(
    a: &AdjacencyMatrix,
    b: &AdjacencyMatrix,
    k: usize,
    method: RandomDsMethod,
    opts: &FaqOptions,
    rng: &mut R,
) -> Result<RestartProbe> {
    if k == 0 {
        return Err(invalid("need at least one restart"));
    }
    check_dim(a.n(), b.n())?;
    let mut runs = Vec::with_capacity(k);
    for start in 0..k {
        let d0 = random_doubly_stochastic(a.n(), method, rng)?;
        let result = faq(a, b, &d0, opts)?;
        let objective = overlap(&a.view(), &b.view(), result.p_star.sigma());
        runs.push(RestartRun { start, result, objective });
    }
    runs.sort_by(|x, y| y.objective.total_cmp(&x.objective));
    let gap_to_next = if runs.len() > 1 { runs[0].objective - runs[1].objective } else { 0.0 };
    Ok(RestartProbe { runs, gap_to_next })
}

/// Relaxed objective `trace(A D B Dᵀ)` on raw arrays, exposed for diagnostics.
pub fn relaxed_objective(a: &AdjacencyMatrix, b: &AdjacencyMatrix, d: &ArrayView2<'_, f64>) -> f64 {
    trace_objective_raw(&a.view(), &b.view(), d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ds_init::{barycenter, block_diag_barycenter};
    use crate::lap::next_permutation;
    use crate::linalg::{permutation_objective, trace_objective};
    use crate::random_graphs::{hom_params, sample_corr_er};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pair(n: usize, p: f64, r: f64, seed: u64) -> (AdjacencyMatrix, AdjacencyMatrix) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sample_corr_er(&hom_params(n, p, r).unwrap(), &mut rng)
    }

    fn all_perms(n: usize) -> Vec<PermutationMatrix> {
        let mut p: Vec<usize> = (0..n).collect();
        let mut out = vec![];
        loop {
            out.push(PermutationMatrix::new(p.clone()).unwrap());
            if !next_permutation(&mut p) {
                break;
            }
        }
        out
    }

    #[test]
    fn line_search_matches_direct_evaluation() {
        let (a, b) = pair(8, 0.5, 0.3, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let d = random_doubly_stochastic(8, RandomDsMethod::SinkhornOfUniform, &mut rng).unwrap();
            let p = crate::ds_init::random_permutation(8, &mut rng);
            let ls = line_search_alpha(&a, &b, &d, &p).unwrap();
            let pd = DoublyStochasticMatrix::from(&p);
            for k in 0..=10 {
                let t = k as f64 / 10.0;
                let mix = crate::ds_init::convex_combination(&[1.0 - t, t], &[&d, &pd]).unwrap();
                let direct = trace_objective(&a, &b, &mix).unwrap();
                assert!((ls.eval(t) - direct).abs() <= 1e-9 * direct.abs().max(1.0));
            }
            for k in 0..=100 {
                assert!(ls.objective >= ls.eval(k as f64 / 100.0) - 1e-9);
            }
        }
    }

    #[test]
    fn line_search_endpoint_rules() {
        assert_eq!(LineSearch::from_coefficients(1.0, 0.5, 0.0).alpha, 1.0);
        assert_eq!(LineSearch::from_coefficients(1.0, -0.5, 0.0).alpha, 1.0);
        assert_eq!(LineSearch::from_coefficients(1.0, -2.0, 0.0).alpha, 0.0);
        assert_eq!(LineSearch::from_coefficients(-1.0, 1.0, 0.0).alpha, 0.5);
        assert_eq!(LineSearch::from_coefficients(-1.0, -1.0, 0.0).alpha, 0.0);
        assert_eq!(LineSearch::from_coefficients(0.0, 0.0, 3.0).alpha, 0.0);
    }

    #[test]
    fn identical_graphs_start_at_identity() {
        for seed in 0..50 {
            let (a, _) = pair(20, 0.3, 0.0, seed);
            let res = faq(&a, &a, &DoublyStochasticMatrix::identity(20), &FaqOptions::default()).unwrap();
            assert_eq!(res.iterations, 0);
            assert!(res.p_star.is_identity());
            assert!(res.converged_at_permutation);
            assert_eq!(res.accuracy(), 1.0);
        }
    }

    #[test]
    fn small_graphs_never_beat_bruteforce() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for seed in 0..30 {
            let n = 4 + (seed as usize % 3);
            let (a, b) = pair(n, 0.5, 0.6, 100 + seed);
            let perms = all_perms(n);
            let best = perms.iter().map(|p| permutation_objective(&a, &b, p).unwrap()).max().unwrap() as f64;
            let d0 = random_doubly_stochastic(n, RandomDsMethod::SinkhornOfUniform, &mut rng).unwrap();
            let res = faq(&a, &b, &d0, &FaqOptions::default()).unwrap();
            assert!(res.final_objective <= best + 1e-9);
            let argmax = perms.iter().find(|p| permutation_objective(&a, &b, p).unwrap() as f64 == best).unwrap();
            let res = faq(&a, &b, &DoublyStochasticMatrix::from(argmax), &FaqOptions::default()).unwrap();
            if res.converged_at_permutation {
                assert_eq!(res.final_objective, best);
                assert_eq!(permutation_objective(&a, &b, &res.p_star).unwrap() as f64, best);
            }
        }
    }

    #[test]
    fn ascent_feasibility_and_trace_identity() {
        let (a, b) = pair(40, 0.4, 0.6, 4);
        let d0 = block_diag_barycenter(40, 4).unwrap();
        let mut prev: Option<(f64, Array2<f64>)> = None;
        let res = faq_observed(&a, &b, &d0, &FaqOptions::default(), &mut |it| {
            assert!(crate::linalg::validate_doubly_stochastic(&it.d, 1e-7));
            if let Some((obj, _)) = &prev {
                assert!(it.objective >= obj - 1e-9);
            }
            prev = Some((it.objective, it.d.to_owned()));
        })
        .unwrap();
        let recs = res.trajectory.records();
        for w in recs.windows(2) {
            let (alpha, dir) = (w[1].alpha.unwrap(), w[1].direction_trace.unwrap());
            let predicted = (1.0 - alpha) * w[0].trace + alpha * dir;
            assert!((w[1].trace - predicted).abs() < 1e-9);
            assert!(w[1].objective >= w[0].objective - 1e-9);
        }
        assert_eq!(recs[0].iter, 0);
        assert!((recs[0].accuracy - 0.1).abs() < 1e-12);
    }

    #[test]
    fn hard_seeded_small_cases() {
        let (a, b) = pair(7, 0.5, 0.7, 5);
        let res = faq_hard_seeded(&a, &b, 6, &barycenter(1).unwrap(), &FaqOptions::default()).unwrap();
        assert!(res.p_star.is_identity());

        for seed in 0..10 {
            let n = 7;
            let s = 2;
            let (a, b) = pair(n, 0.5, 0.7, 200 + seed);
            let seeded_obj = |p: &PermutationMatrix| {
                let mut sigma: Vec<usize> = (0..s).collect();
                sigma.extend(p.sigma().iter().map(|&j| j + s));
                // trace(A P B Pᵀ) with identity seeds differs from the seeded objective
                // by the seed-seed block, which is constant.
                permutation_objective(&a, &b, &PermutationMatrix::new(sigma).unwrap()).unwrap() as f64
            };
            let best = all_perms(n - s).iter().map(seeded_obj).fold(f64::MIN, f64::max);
            let seed_block: f64 = (0..s).flat_map(|i| (0..s).map(move |j| (i, j))).map(|(i, j)| a.view()[[i, j]] * b.view()[[i, j]]).sum();
            let res = faq_hard_seeded(&a, &b, s, &barycenter(n - s).unwrap(), &FaqOptions::default()).unwrap();
            assert!(res.final_objective + seed_block <= best + 1e-9);
            assert_eq!(&res.p_star.sigma()[..s], &[0, 1]);
        }
    }

    #[test]
    fn hard_seeded_without_seeds_is_plain_faq() {
        let (a, b) = pair(30, 0.5, 0.5, 6);
        let d0 = block_diag_barycenter(30, 5).unwrap();
        let plain = faq(&a, &b, &d0, &FaqOptions::default()).unwrap();
        let seeded = faq_hard_seeded(&a, &b, 0, &d0, &FaqOptions::default()).unwrap();
        assert_eq!(plain.p_star, seeded.p_star);
        assert_eq!(plain.trajectory, seeded.trajectory);
        assert!(faq_hard_seeded(&a, &b, 30, &d0, &FaqOptions::default()).is_err());
    }

    #[test]
    fn similarity_variants() {
        let (a, b) = pair(25, 0.5, 0.0, 7);
        let d0 = barycenter(25).unwrap();
        let big = Array2::<f64>::eye(25) * 1e6;
        let res = faq_with_similarity(&a, &b, &big.view(), &d0, &FaqOptions::default()).unwrap();
        assert!(res.p_star.is_identity());
        let zero = Array2::<f64>::zeros((25, 25));
        let with = faq_with_similarity(&a, &b, &zero.view(), &d0, &FaqOptions::default()).unwrap();
        let without = faq(&a, &b, &d0, &FaqOptions::default()).unwrap();
        assert_eq!(with.p_star, without.p_star);
        assert_eq!(with.trajectory, without.trajectory);
    }

    #[test]
    fn similarity_never_beats_bruteforce() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for seed in 0..10 {
            let n = 5;
            let (a, b) = pair(n, 0.5, 0.5, 300 + seed);
            let s = Array2::from_shape_fn((n, n), |_| rng.random::<f64>() * 3.0);
            let best = all_perms(n)
                .iter()
                .map(|p| permutation_objective(&a, &b, p).unwrap() as f64 + p.inner(&s.t()))
                .fold(f64::MIN, f64::max);
            let res = faq_with_similarity(&a, &b, &s.view(), &barycenter(n).unwrap(), &FaqOptions::default()).unwrap();
            assert!(res.final_objective <= best + 1e-9);
        }
    }

    #[test]
    fn breakdown_counts() {
        let d0p = Partition::from_block_sizes(&[3, 3]).unwrap();
        let sbm = Partition::from_block_sizes(&[2, 4]).unwrap();
        let id = PermutationMatrix::identity(6);
        assert_eq!(error_breakdown(&id, &d0p, &sbm).unwrap(), ErrorBreakdown::default());
        let swap = PermutationMatrix::new(vec![0, 1, 2, 4, 3, 5]).unwrap();
        assert_eq!(
            error_breakdown(&swap, &d0p, &sbm).unwrap(),
            ErrorBreakdown { within_d0: 2, between_d0: 0, within_sbm: 2, between_sbm: 0 }
        );
    }

    #[test]
    fn two_step_from_identity() {
        let (a, b) = pair(30, 0.5, 0.5, 9);
        let out = two_step_check(&a, &b, &DoublyStochasticMatrix::identity(30), None).unwrap();
        assert!(out.converged_to_identity_in_two);
        assert_eq!(out.steps_used, 0);
    }

    #[test]
    fn restart_probe_small_graph() {
        let (a, _) = pair(6, 0.5, 0.0, 10);
        let best = all_perms(6).iter().map(|p| permutation_objective(&a, &a, p).unwrap()).max().unwrap() as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let probe = random_restart_probe(&a, &a, 10, RandomDsMethod::Permutation, &FaqOptions::default(), &mut rng).unwrap();
        assert_eq!(probe.runs.len(), 10);
        assert_eq!(probe.runs[0].objective, best);
        for w in probe.runs.windows(2) {
            assert!(w[0].objective >= w[1].objective);
        }
        assert!(probe.runs.iter().all(|r| r.objective <= best));
    }

    #[test]
    fn json_document_fields() {
        let (a, b) = pair(12, 0.5, 0.9, 12);
        let res = faq(&a, &b, &block_diag_barycenter(12, 6).unwrap(), &FaqOptions::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&res.to_json().unwrap()).unwrap();
        for key in ["sigma", "accuracy", "objective", "iterations", "converged_at_permutation", "trajectory"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert!(v["trajectory"][0]["alpha"].is_null());
        assert_eq!(v["sigma"].as_array().unwrap().len(), 12);
    }
}
