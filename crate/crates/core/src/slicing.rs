//! Linear sections of Gr(2,6) ⊂ P¹⁴ by 7-dimensional subspaces.
//!
//! The 14 intersection points are found with a three-stage homotopy in the
//! chart `H = [[1,0,t₁..t₄],[0,1,t₅..t₈]]`:
//!
//! 1. a total-degree bootstrap solves the toric fiber `A_s·p_0(t) = 0`;
//! 2. the ω-degeneration is undone, `u: 0 → 1`, at fixed `A_s`;
//! 3. the section is moved from `A_s` to the target `A_t`.
//!
//! Stages 1–2 depend only on `A_s` and are cached in a [`StartCache`].

use rand::Rng;

use crate::error::{Error, Result};
use crate::grassmann::{
    self, pluecker_embed, pluecker_embed_jacobian, pluecker_embed_u, ChartPoint, PluckerVec,
    N_CHART, N_COORDS,
};
use crate::linalg::{self, nullspace_with_tol, CMat, CVector, Qr, C64, ONE, ZERO};
use crate::par::Execution;
use crate::random::{self, stage, SeededRng};
use crate::selfdual::{Config, DIM, POINTS};
use crate::tracker::{
    distinct_successes, newton_refine, relative_distance, total_degree_start, track_all, track_path,
    unit_interval, EvaluatedSystem, Evaluation, GammaHomotopy, ParamPath, PathResult, StraightLine,
    TrackerOptions,
};

/// Number of linear equations cutting out the section.
pub const N_EQUATIONS: usize = 8;
/// Degree of Gr(2,6) ⊂ P¹⁴: the number of intersection points.
pub const DEGREE: usize = 14;
/// Parameters of the slicing system: `u` followed by the entries of `A`.
pub const N_PARAMS: usize = 1 + N_EQUATIONS * N_COORDS;

/// A 7-dimensional linear subspace `P(Ker A)` of P¹⁴.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSection {
    a: CMat,
    l: CMat,
}

impl LinearSection {
    /// Checks `rank A = 8` and computes an orthonormal kernel basis `L`.
    pub fn new(a: CMat) -> Result<Self> {
        if a.rows() != N_EQUATIONS || a.cols() != N_COORDS {
            return Err(Error::InvalidInput(format!(
                "a section is {N_EQUATIONS}x{N_COORDS}, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        if !a.is_finite() {
            return Err(Error::InvalidInput("non-finite entries in section".into()));
        }
        let qr = Qr::factor_pivoted(&a.transpose());
        let rank = qr.rank(1e-10);
        if rank < N_EQUATIONS {
            let d = qr.r_diag();
            return Err(linalg::LinalgError::RankDeficient {
                column: rank,
                diag: d.get(rank).map_or(0.0, |z| z.norm()),
                tol: 1e-10 * d.first().map_or(0.0, |z| z.norm()),
            }
            .into());
        }
        let l = nullspace_with_tol(&a, 1e-10);
        debug_assert_eq!(l.cols(), DIM);
        Ok(LinearSection { a, l })
    }

    pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::new(random::complex_gaussian_mat(rng, N_EQUATIONS, N_COORDS)).expect("generic rank")
    }

    pub fn random_real<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::new(random::real_gaussian_mat(rng, N_EQUATIONS, N_COORDS)).expect("generic rank")
    }

    /// The 8×15 equations.
    pub fn a(&self) -> &CMat {
        &self.a
    }

    /// The 15×7 kernel basis.
    pub fn l(&self) -> &CMat {
        &self.l
    }

    /// Tracker parameters `(u, A)`.
    pub fn params(&self, u: C64) -> CVector {
        let mut p = Vec::with_capacity(N_PARAMS);
        p.push(u);
        p.extend_from_slice(self.a.as_slice());
        p
    }
}

/// `F(t, u, A) = A·p_u(t)`: 8 equations in `t ∈ ℂ⁸` with parameters
/// `(u, A)`, `A` row-major.
#[derive(Debug, Clone, Copy, Default)]
pub struct SlicingSystem;

impl EvaluatedSystem for SlicingSystem {
    fn n_equations(&self) -> usize {
        N_EQUATIONS
    }
    fn n_variables(&self) -> usize {
        N_CHART
    }
    fn n_params(&self) -> usize {
        N_PARAMS
    }

    fn evaluate(&self, x: &[C64], params: &[C64], out: &mut Evaluation, with_param_jacobian: bool) {
        let t = ChartPoint::from_slice(x);
        let u = params[0];
        let a = &params[1..];
        let p = pluecker_embed_u(&t, u);
        let (jac, du) = pluecker_embed_jacobian(&t, u);
        for r in 0..N_EQUATIONS {
            let row = &a[r * N_COORDS..(r + 1) * N_COORDS];
            out.residual[r] = linalg::dot_unconj(row, &p.0);
            for j in 0..N_CHART {
                let mut acc = ZERO;
                for c in 0..N_COORDS {
                    acc += row[c] * jac[(c, j)];
                }
                out.jac_x[(r, j)] = acc;
            }
        }
        if with_param_jacobian {
            out.jac_p.as_mut_slice().iter_mut().for_each(|z| *z = ZERO);
            for r in 0..N_EQUATIONS {
                let row = &a[r * N_COORDS..(r + 1) * N_COORDS];
                out.jac_p[(r, 0)] = linalg::dot_unconj(row, &du);
                for c in 0..N_COORDS {
                    out.jac_p[(r, 1 + r * N_COORDS + c)] = p.0[c];
                }
            }
        }
    }
}

/// The slicing system at fixed parameters, for the total-degree bootstrap.
struct Fixed<'a> {
    params: &'a [C64],
}

impl EvaluatedSystem for Fixed<'_> {
    fn n_equations(&self) -> usize {
        N_EQUATIONS
    }
    fn n_variables(&self) -> usize {
        N_CHART
    }
    fn n_params(&self) -> usize {
        0
    }
    fn evaluate(&self, x: &[C64], _params: &[C64], out: &mut Evaluation, _with_param_jacobian: bool) {
        let mut inner = Evaluation::new(N_EQUATIONS, N_CHART, 0);
        SlicingSystem.evaluate(x, self.params, &mut inner, false);
        out.residual = inner.residual;
        out.jac_x = inner.jac_x;
    }
}

/// Tunables for slicing and the census.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceOptions {
    pub tracker: TrackerOptions,
    /// Endpoints closer than this (relative max-norm) are considered equal.
    pub distinct_tol: f64,
    /// Fresh γ draws for the total-degree bootstrap.
    pub gamma_retries: usize,
    /// Least-squares recovery must satisfy `‖L·γ_k − Z_k‖ ≤ tol·‖Z_k‖`.
    pub recovery_tol: f64,
    /// Toric start solutions must have `‖F‖∞` below this.
    pub start_residual_tol: f64,
    pub exec: Execution,
}

impl Default for SliceOptions {
    fn default() -> Self {
        SliceOptions {
            tracker: TrackerOptions::default(),
            distinct_tol: 1e-6,
            gamma_retries: 3,
            recovery_tol: 1e-8,
            start_residual_tol: 1e-11,
            exec: Execution::default(),
        }
    }
}

/// Outcome of the toric total-degree bootstrap.
#[derive(Debug, Clone)]
pub struct ToricStart {
    pub solutions: Vec<ChartPoint>,
    /// All 256 path results of the accepted run.
    pub paths: Vec<PathResult>,
    pub gamma: C64,
}

/// Solves `A_s·p_0(t) = 0` with the straight-line γ-homotopy from
/// `t_i² = 1` (256 paths), retrying with a fresh γ if the number of
/// distinct regular solutions is not 14.
pub fn solve_toric_start<R: Rng + ?Sized>(
    a_s: &LinearSection,
    opts: &SliceOptions,
    rng: &mut R,
) -> Result<ToricStart> {
    let (start_sys, starts) = total_degree_start(&[2; N_CHART])?;
    let params = a_s.params(ZERO);
    let target = Fixed { params: &params };
    let mut found = 0;
    for _ in 0..opts.gamma_retries.max(1) {
        let gamma = random::unit_phase(rng);
        let h = GammaHomotopy {
            start: &start_sys,
            target: &target,
            target_params: Vec::new(),
            gamma,
        };
        let paths = track_all(&h, &starts, &unit_interval(), &opts.tracker, opts.exec);
        let keep: Vec<usize> = distinct_successes(&paths, opts.distinct_tol, relative_distance)
            .into_iter()
            .filter(|&i| max_abs_residual(&SlicingSystem, &paths[i].endpoint, &params) < opts.start_residual_tol)
            .collect();
        found = keep.len();
        if found == DEGREE {
            let solutions = keep.iter().map(|&i| ChartPoint::from_slice(&paths[i].endpoint)).collect();
            return Ok(ToricStart {
                solutions,
                paths,
                gamma,
            });
        }
    }
    Err(Error::WrongCount {
        stage: "toric start",
        expected: DEGREE,
        found,
    })
}

fn max_abs_residual<S: EvaluatedSystem + ?Sized>(sys: &S, x: &[C64], p: &[C64]) -> f64 {
    let r = sys.residual(x, p);
    if x.iter().all(|z| z.is_finite()) {
        linalg::max_abs(&r)
    } else {
        f64::INFINITY
    }
}

/// Solutions of `F(t, 1, A_s) = 0`, reused as start points for stage 3.
#[derive(Debug, Clone, PartialEq)]
pub struct StartCache {
    pub section: LinearSection,
    pub solutions: Vec<ChartPoint>,
}

/// Runs stages 1 and 2 at a random complex section drawn from `rng`.
pub fn prepare_start<R: Rng + ?Sized>(opts: &SliceOptions, rng: &mut R) -> Result<StartCache> {
    let a_s = LinearSection::random_complex(rng);
    let toric = solve_toric_start(&a_s, opts, rng)?;
    let path = StraightLine::new(a_s.params(ZERO), a_s.params(ONE));
    let starts: Vec<CVector> = toric.solutions.iter().map(|t| t.0.to_vec()).collect();
    let results = track_all(&SlicingSystem, &starts, &path, &opts.tracker, opts.exec);
    let keep = distinct_successes(&results, opts.distinct_tol, relative_distance);
    if keep.len() != DEGREE {
        return Err(Error::WrongCount {
            stage: "degeneration u: 0 -> 1",
            expected: DEGREE,
            found: keep.len(),
        });
    }
    Ok(StartCache {
        section: a_s,
        solutions: results.iter().map(|r| ChartPoint::from_slice(&r.endpoint)).collect(),
    })
}

/// [`prepare_start`] on the slicing stream of `seed`.
pub fn prepare_start_seeded(seed: u64, opts: &SliceOptions) -> Result<StartCache> {
    prepare_start(opts, &mut random::stream(seed, stage::SLICE_START))
}

/// The 14 points of `𝕃 ∩ Gr(2,6)` and the self-dual configuration they
/// define.
#[derive(Debug, Clone)]
pub struct SliceResult {
    pub section: LinearSection,
    pub chart_points: Vec<ChartPoint>,
    /// `Z_k = p(t_k)`.
    pub plucker_points: Vec<PluckerVec>,
    /// Columns `γ_k` with `L·γ_k ≈ Z_k`, each scaled to unit max-modulus.
    pub gamma: Config,
    /// Max Plücker-relation value over the `Z_k` normalized to unit max-modulus.
    pub max_relation_residual: f64,
    /// Max over `k` of `‖L·γ_k − Z_k‖ / ‖Z_k‖` before normalization.
    pub recovery_residual: f64,
    pub paths: Vec<PathResult>,
}

/// Stage 3 from a cached start to `target`, followed by recovery of Γ.
pub fn slice(target: &LinearSection, cache: &StartCache, opts: &SliceOptions) -> Result<SliceResult> {
    let path = StraightLine::new(cache.section.params(ONE), target.params(ONE));
    let starts: Vec<CVector> = cache.solutions.iter().map(|t| t.0.to_vec()).collect();
    let results = track_all(&SlicingSystem, &starts, &path, &opts.tracker, opts.exec);
    let keep = distinct_successes(&results, opts.distinct_tol, relative_distance);
    if keep.len() != DEGREE {
        return Err(Error::WrongCount {
            stage: "section A_s -> A_t",
            expected: DEGREE,
            found: keep.len(),
        });
    }
    let chart_points: Vec<ChartPoint> = results.iter().map(|r| ChartPoint::from_slice(&r.endpoint)).collect();
    recover(target, chart_points, results, opts)
}

/// Full three-stage slice of `target` with start data drawn from `seed`.
pub fn slice_seeded(target: &LinearSection, seed: u64, opts: &SliceOptions) -> Result<SliceResult> {
    let cache = prepare_start_seeded(seed, opts)?;
    slice(target, &cache, opts)
}

fn recover(
    target: &LinearSection,
    chart_points: Vec<ChartPoint>,
    paths: Vec<PathResult>,
    opts: &SliceOptions,
) -> Result<SliceResult> {
    let plucker_points: Vec<PluckerVec> = chart_points.iter().map(pluecker_embed).collect();
    let qr = Qr::factor(target.l());
    let mut cols = Vec::with_capacity(POINTS);
    let mut recovery_residual = 0.0f64;
    let mut max_rel = 0.0f64;
    for (k, z) in plucker_points.iter().enumerate() {
        let g = qr.solve_least_squares(&z.0, 1e-10)?;
        let back = target.l().matvec(&g);
        let res = linalg::norm2(&linalg::sub_vec(&back, &z.0)) / linalg::norm2(&z.0);
        recovery_residual = recovery_residual.max(res);
        if !(res <= opts.recovery_tol) {
            return Err(Error::RecoveryFailed { index: k, residual: res });
        }
        let zn = linalg::normalize_max(&z.0);
        max_rel = max_rel.max(linalg::max_abs(&grassmann::pluecker_relations(&zn)));
        cols.push(linalg::normalize_max(&g));
    }
    Ok(SliceResult {
        section: target.clone(),
        chart_points,
        plucker_points,
        gamma: Config::new(CMat::from_columns(&cols))?,
        max_relation_residual: max_rel,
        recovery_residual,
        paths,
    })
}

// ---------------------------------------------------------------------------
// census

/// Histogram of real intersection counts over sampled real sections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusTable {
    pub samples: usize,
    /// `histogram[r]` counts samples with exactly `r` real points.
    pub histogram: [usize; DEGREE + 1],
    pub failures: usize,
}

impl CensusTable {
    pub fn proportion(&self, real_count: usize) -> f64 {
        self.histogram[real_count] as f64 / self.samples as f64
    }
}

/// Census tunables on top of [`SliceOptions`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CensusOptions {
    pub slice: SliceOptions,
    /// A point is real when `max |Im t_i| < real_tol`.
    pub real_tol: f64,
    /// Samples with some `max |Im t_i|` in this band are refined again.
    pub borderline: (f64, f64),
    /// Random real charts tried after the standard chart loses a path.
    pub chart_retries: usize,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions {
            slice: SliceOptions::default(),
            real_tol: 1e-6,
            borderline: (1e-8, 1e-4),
            chart_retries: 3,
        }
    }
}

/// Outcome of one census sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleOutcome {
    Real(usize),
    /// Fewer than 14 distinct endpoints, or an odd real count.
    Failed,
}

/// Classifies the real solutions of one real section starting from `cache`.
/// Paths are tracked sequentially; parallelism lives across samples. If a
/// path is lost, typically because a real point lies near the boundary of
/// the chart, the sample is re-tracked in up to `opts.chart_retries` random
/// real charts drawn from `rng`. Real charts preserve realness of points.
pub fn census_sample<R: Rng + ?Sized>(
    section: &LinearSection,
    cache: &StartCache,
    opts: &CensusOptions,
    rng: &mut R,
) -> SampleOutcome {
    let start = cache.section.params(ONE);
    let mut target = section.params(ONE);
    let mut results = track_stage3(&StraightLine::new(start.clone(), target.clone()), cache, opts);
    let mut attempt = 0;
    while distinct_successes(&results, opts.slice.distinct_tol, relative_distance).len() != DEGREE {
        if attempt == opts.chart_retries {
            return SampleOutcome::Failed;
        }
        attempt += 1;
        // same real points, seen through a random real chart
        let moved = section.a() * &compound2(&random_orthogonal(rng)).transpose();
        target = LinearSection::new(moved).map_or(target, |s| s.params(ONE));
        results = track_stage3(&StraightLine::new(start.clone(), target.clone()), cache, opts);
    }
    let (lo, hi) = opts.borderline;
    for r in results.iter_mut() {
        let im = max_imag(&r.endpoint);
        if im >= lo && im <= hi {
            let refined = newton_refine(&SlicingSystem, &r.endpoint, &target, 1e-15, 2 * opts.slice.tracker.refine_iters);
            r.endpoint = refined.x;
        }
    }
    let real = results.iter().filter(|r| max_imag(&r.endpoint) < opts.real_tol).count();
    if real % 2 == 1 {
        return SampleOutcome::Failed;
    }
    SampleOutcome::Real(real)
}

fn track_stage3<P: ParamPath>(path: &P, cache: &StartCache, opts: &CensusOptions) -> Vec<PathResult> {
    cache
        .solutions
        .iter()
        .map(|t| track_path(&SlicingSystem, &t.0, path, &opts.slice.tracker))
        .collect()
}

/// `Λ²g`: the action of `g ∈ GL(6)` on Plücker coordinates,
/// `p(H·g) = Λ²g · p(H)` with `(Λ²g)_{kl,ij} = det g[{i,j},{k,l}]`.
pub fn compound2(g: &CMat) -> CMat {
    let pairs = grassmann::pairs();
    CMat::from_fn(N_COORDS, N_COORDS, |r, c| {
        let (k, l) = (pairs[r].i as usize - 1, pairs[r].j as usize - 1);
        let (i, j) = (pairs[c].i as usize - 1, pairs[c].j as usize - 1);
        g[(i, k)] * g[(j, l)] - g[(i, l)] * g[(j, k)]
    })
}

/// A Haar-like random real orthogonal 6×6 matrix (Gram–Schmidt on a
/// Gaussian matrix).
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R) -> CMat {
    const N: usize = 6;
    let mut q = [[0.0f64; N]; N];
    for c in 0..N {
        let mut v: [f64; N] = std::array::from_fn(|_| random::real_gaussian(rng));
        for _ in 0..2 {
            for prev in q.iter().take(c) {
                let d: f64 = v.iter().zip(prev).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(prev).for_each(|(a, b)| *a -= d * b);
            }
        }
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        q[c] = v.map(|a| a / n);
    }
    CMat::from_fn(N, N, |r, c| C64::new(q[c][r], 0.0))
}

fn max_imag(x: &[C64]) -> f64 {
    linalg::nan_max(x.iter().map(|z| z.im.abs()))
}

/// The stream of census sample `index`; its first draws are the section.
pub fn census_stream(seed: u64, index: usize) -> SeededRng {
    random::stream(seed, stage::CENSUS_SAMPLE_BASE + index as u64)
}

/// The real section of census sample `index`.
pub fn census_section(seed: u64, index: usize) -> LinearSection {
    LinearSection::random_real(&mut census_stream(seed, index))
}

/// Runs census sample `index` in isolation.
pub fn run_census_sample(seed: u64, index: usize, cache: &StartCache, opts: &CensusOptions) -> SampleOutcome {
    let mut rng = census_stream(seed, index);
    let section = LinearSection::random_real(&mut rng);
    census_sample(&section, cache, opts, &mut rng)
}

/// Samples `samples` real Gaussian sections and histograms their number of
/// real intersection points with Gr(2,6). The result depends only on
/// `seed`, not on the execution mode.
pub fn census(samples: usize, seed: u64, opts: &CensusOptions) -> Result<CensusTable> {
    let cache = prepare_start(&opts.slice, &mut random::stream(seed, stage::CENSUS_START))?;
    Ok(census_with_cache(samples, seed, &cache, opts))
}

/// [`census`] with an explicit start cache.
pub fn census_with_cache(samples: usize, seed: u64, cache: &StartCache, opts: &CensusOptions) -> CensusTable {
    let outcomes = opts
        .slice
        .exec
        .map_indexed(samples, |i| run_census_sample(seed, i, cache, opts));
    tally(&outcomes)
}

/// Folds sample outcomes into a table.
pub fn tally(outcomes: &[SampleOutcome]) -> CensusTable {
    let mut table = CensusTable {
        samples: outcomes.len(),
        histogram: [0; DEGREE + 1],
        failures: 0,
    };
    for o in outcomes {
        match *o {
            SampleOutcome::Real(r) => table.histogram[r] += 1,
            SampleOutcome::Failed => table.failures += 1,
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_deficient_section_rejected() {
        let mut a = random::complex_gaussian_mat(&mut random::stream(3, 0), N_EQUATIONS, N_COORDS);
        for c in 0..N_COORDS {
            let v = a[(0, c)];
            a[(1, c)] = v * 2.0;
        }
        assert!(matches!(
            LinearSection::new(a),
            Err(Error::Linalg(linalg::LinalgError::RankDeficient { .. }))
        ));
    }

    #[test]
    fn section_kernel_is_orthonormal() {
        let s = LinearSection::random_complex(&mut random::stream(4, 0));
        assert!((s.a() * s.l()).max_abs() < 1e-12);
        assert!((&(&s.l().adjoint() * s.l()) - &CMat::identity(DIM)).max_abs() < 1e-12);
    }

    #[test]
    fn residual_at_u_one_is_plain_embedding() {
        let mut rng = random::stream(5, 0);
        let s = LinearSection::random_complex(&mut rng);
        let t = ChartPoint::from_slice(&random::complex_gaussian_vec(&mut rng, N_CHART));
        let r = SlicingSystem.residual(&t.0, &s.params(ONE));
        let direct = s.a().matvec(&pluecker_embed(&t).0);
        assert_eq!(r, direct);
    }

    #[test]
    fn tally_conserves_samples() {
        let t = tally(&[SampleOutcome::Real(2), SampleOutcome::Failed, SampleOutcome::Real(2)]);
        assert_eq!(t.histogram[2], 2);
        assert_eq!(t.failures, 1);
        assert_eq!(t.histogram.iter().sum::<usize>() + t.failures, t.samples);
    }
}
