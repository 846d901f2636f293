//! The Mukai lifting problem: given a self-dual configuration `Γ ⊂ P⁶`,
//! find an injective linear `L̂: P⁶ → P¹⁴` with `L̂(Γ) ⊂ Gr(2,6)`.
//!
//! The unknown `L` is restricted to the 69-dimensional affine slice
//! `L = L_start + Σ ℓ_k A_k`, and the 210 equations `q_k(L·γ_i(s)) = 0` are
//! tracked in the skew parameters `s` of `γ_i(s) = [I₇+S | I₇−S]_i`, from a
//! known start pair `(ℓ = 0, s_start)` to the skew normal form of `Γ`.

use std::sync::{Arc, Mutex};

use rand::Rng;

use crate::error::{Error, Result};
use crate::grassmann::{pluecker_relations, relations_jacobian_into, N_COORDS, N_RELATIONS};
use crate::linalg::{self, CMat, CVector, Lu, Qr, C64, ONE, ZERO};
use crate::random::{self, stage};
use crate::selfdual::{
    config_from_skew, skew_normal_form_retrying, Config, NormalFormCert, SelfDualOptions, SkewParams,
    DIM, POINTS, SKEW_LEN,
};
use crate::slicing::{self, LinearSection, SliceOptions, StartCache};
use crate::tracker::{
    track_path_observed, Detour, EvaluatedSystem, Evaluation, ParamPath, PathResult, SquaredUp,
    StepInfo, StraightLine, TrackerOptions,
};

/// Dimension of the affine slice of `ℂ^{15×7}`.
pub const N_DIRECTIONS: usize = 69;
/// Equations `q_k(L·γ_i)`, row `i·15 + k`.
pub const N_LIFT_EQUATIONS: usize = POINTS * N_RELATIONS;
const ENTRIES: usize = N_COORDS * DIM;

/// A start pair for the lifting homotopy.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftProblem {
    /// Maps the columns of `[I₇+S_start | I₇−S_start]` onto Gr(2,6).
    pub l_start: CMat,
    /// The 69 directions `A_k ∈ ℂ^{15×7}`.
    pub directions: Vec<CMat>,
    pub s_start: SkewParams,
    /// Seed the pair was generated from.
    pub seed: u64,
}

impl LiftProblem {
    /// Checks shapes and the rank of the stacked 105×69 direction matrix.
    pub fn new(l_start: CMat, directions: Vec<CMat>, s_start: SkewParams, seed: u64) -> Result<Self> {
        if l_start.rows() != N_COORDS || l_start.cols() != DIM {
            return Err(Error::InvalidInput("L_start must be 15x7".into()));
        }
        if directions.len() != N_DIRECTIONS || directions.iter().any(|a| a.rows() != N_COORDS || a.cols() != DIM) {
            return Err(Error::InvalidInput(format!("expected {N_DIRECTIONS} directions of size 15x7")));
        }
        let p = LiftProblem {
            l_start,
            directions,
            s_start,
            seed,
        };
        let rank = linalg::rank(&p.stacked_directions(), 1e-10);
        if rank != N_DIRECTIONS {
            return Err(Error::InvalidInput(format!("direction matrices have rank {rank}, expected 69")));
        }
        Ok(p)
    }

    /// Column `k` holds the entries of `A_k`, row-major.
    pub fn stacked_directions(&self) -> CMat {
        CMat::from_fn(ENTRIES, N_DIRECTIONS, |r, k| self.directions[k].as_slice()[r])
    }

    /// `L_start + Σ ℓ_k A_k`.
    pub fn embedding(&self, ell: &[C64]) -> CMat {
        let mut l = self.l_start.clone();
        for (a, &e) in self.directions.iter().zip(ell) {
            linalg::axpy(e, a.as_slice(), l.as_mut_slice());
        }
        l
    }

    pub fn start_solution(&self) -> CVector {
        vec![ZERO; N_DIRECTIONS]
    }
}

/// Column `i` of `[I₇+S | I₇−S]`.
fn skew_column(s: &CMat, i: usize) -> CVector {
    let (c, sign) = if i < DIM { (i, 1.0) } else { (i - DIM, -1.0) };
    (0..DIM)
        .map(|r| if r == c { ONE } else { ZERO } + s[(r, c)] * sign)
        .collect()
}

/// Upper-triangle pair `(a, b)` of packed skew index `j`.
fn skew_pair(j: usize) -> (usize, usize) {
    let mut k = 0;
    for a in 0..DIM {
        for b in a + 1..DIM {
            if k == j {
                return (a, b);
            }
            k += 1;
        }
    }
    unreachable!("skew index out of range")
}

/// Per-`s` data: `c_i = L_start·γ_i(s)` and `B_i = [A_k·γ_i(s)]_k`.
struct PointCache {
    s: CVector,
    c: Vec<CVector>,
    b: Vec<CMat>,
}

/// The system `q_k(L(ℓ)·γ_i(s)) = 0`: 210 equations, 69 unknowns `ℓ`,
/// 21 parameters `s`.
pub struct LiftSystem<'a> {
    problem: &'a LiftProblem,
    stacked: CMat,
    cache: Mutex<Option<Arc<PointCache>>>,
}

impl<'a> LiftSystem<'a> {
    pub fn new(problem: &'a LiftProblem) -> Self {
        LiftSystem {
            problem,
            stacked: problem.stacked_directions(),
            cache: Mutex::new(None),
        }
    }

    fn points(&self, s: &[C64]) -> Arc<PointCache> {
        let mut guard = self.cache.lock().expect("lift cache poisoned");
        if let Some(pc) = guard.as_ref() {
            if pc.s == s {
                return Arc::clone(pc);
            }
        }
        let sm = SkewParams::from_slice(s).expect("21 parameters").to_matrix();
        let mut c = Vec::with_capacity(POINTS);
        let mut b = Vec::with_capacity(POINTS);
        for i in 0..POINTS {
            let g = skew_column(&sm, i);
            c.push(self.problem.l_start.matvec(&g));
            let mut bi = CMat::zeros(N_COORDS, N_DIRECTIONS);
            for r in 0..N_COORDS {
                for (col, gc) in g.iter().enumerate() {
                    if *gc == ZERO {
                        continue;
                    }
                    let src = self.stacked.row(r * DIM + col);
                    let dst = &mut bi.as_mut_slice()[r * N_DIRECTIONS..(r + 1) * N_DIRECTIONS];
                    linalg::axpy(*gc, src, dst);
                }
            }
            b.push(bi);
        }
        let pc = Arc::new(PointCache { s: s.to_vec(), c, b });
        *guard = Some(Arc::clone(&pc));
        pc
    }
}

impl EvaluatedSystem for LiftSystem<'_> {
    fn n_equations(&self) -> usize {
        N_LIFT_EQUATIONS
    }
    fn n_variables(&self) -> usize {
        N_DIRECTIONS
    }
    fn n_params(&self) -> usize {
        SKEW_LEN
    }

    fn evaluate(&self, x: &[C64], params: &[C64], out: &mut Evaluation, with_param_jacobian: bool) {
        let pc = self.points(params);
        let l = with_param_jacobian.then(|| self.problem.embedding(x));
        let mut jq = [ZERO; N_RELATIONS * N_COORDS];
        for i in 0..POINTS {
            let mut xi = pc.c[i].clone();
            let bi = &pc.b[i];
            for r in 0..N_COORDS {
                xi[r] += linalg::dot_unconj(bi.row(r), x);
            }
            let q = pluecker_relations(&xi);
            relations_jacobian_into(&xi, &mut jq);
            for k in 0..N_RELATIONS {
                let row = i * N_RELATIONS + k;
                out.residual[row] = q[k];
                let dst = &mut out.jac_x.as_mut_slice()[row * N_DIRECTIONS..(row + 1) * N_DIRECTIONS];
                dst.iter_mut().for_each(|z| *z = ZERO);
                for r in 0..N_COORDS {
                    let w = jq[k * N_COORDS + r];
                    if w != ZERO {
                        linalg::axpy(w, bi.row(r), dst);
                    }
                }
            }
            if let Some(l) = &l {
                // ∂γ_i/∂s_j = ±e_a or ±e_b, so ∂x_i/∂s_j is ± a column of L.
                let (c, sign) = if i < DIM { (i, 1.0) } else { (i - DIM, -1.0) };
                for j in 0..SKEW_LEN {
                    let (a, b) = skew_pair(j);
                    let (col, sgn) = if c == b {
                        (a, sign)
                    } else if c == a {
                        (b, -sign)
                    } else {
                        for k in 0..N_RELATIONS {
                            out.jac_p[(i * N_RELATIONS + k, j)] = ZERO;
                        }
                        continue;
                    };
                    for k in 0..N_RELATIONS {
                        let mut acc = ZERO;
                        for r in 0..N_COORDS {
                            acc += jq[k * N_COORDS + r] * l[(r, col)];
                        }
                        out.jac_p[(i * N_RELATIONS + k, j)] = acc * sgn;
                    }
                }
            }
        }
    }
}

/// Tunables for the lifting pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftOptions {
    pub tracker: TrackerOptions,
    /// Bound on relation values at image points scaled to unit max-modulus.
    pub lift_tol: f64,
    /// Bound on the start-pair residual.
    pub start_tol: f64,
    /// Column permutations tried when the skew normal form is degenerate.
    pub snf_retries: usize,
    /// Track the randomly squared-up 69×69 system instead of Gauss–Newton.
    pub squared_up: bool,
    /// Replace the straight segment in `s` by a random quadratic detour.
    pub gamma_arc: bool,
    pub seed: u64,
}

impl Default for LiftOptions {
    fn default() -> Self {
        LiftOptions {
            tracker: TrackerOptions::default(),
            lift_tol: 1e-8,
            start_tol: 1e-9,
            snf_retries: 32,
            squared_up: false,
            gamma_arc: false,
            seed: 0,
        }
    }
}

/// A start pair together with the configuration it was built from.
#[derive(Debug, Clone)]
pub struct StartPair {
    pub problem: LiftProblem,
    /// The sliced configuration, before the skew normal form.
    pub gamma: Config,
    pub cert: NormalFormCert,
    /// Column order used for the normal form.
    pub perm: Vec<usize>,
    /// `max |q_k(L_start·γ_i(s_start))|` over normalized images.
    pub start_residual: f64,
}

/// Builds a start pair from a slice of a random complex section.
pub fn make_start_pair(seed: u64, opts: &LiftOptions, slice_opts: &SliceOptions) -> Result<StartPair> {
    let cache = slicing::prepare_start(slice_opts, &mut random::stream(seed, stage::SLICE_START))?;
    make_start_pair_with_cache(seed, &cache, opts, slice_opts)
}

/// [`make_start_pair`] reusing prepared slicing start data.
pub fn make_start_pair_with_cache(
    seed: u64,
    cache: &StartCache,
    opts: &LiftOptions,
    slice_opts: &SliceOptions,
) -> Result<StartPair> {
    let mut rng = random::stream(seed, stage::LIFT_START);
    let section = LinearSection::random_complex(&mut rng);
    let sliced = slicing::slice(&section, cache, slice_opts)?;
    let gamma = sliced.gamma;
    let snf = skew_normal_form_retrying(&gamma, &SelfDualOptions::default(), opts.snf_retries, &mut rng)?;
    let s_mat = snf.s.to_matrix();
    // [I+S | I−S] = (I+S)·A⁻¹·Γ_perm·diag(scale), so L₀·A·(I+S)⁻¹ maps it onto L₀·Γ.
    let i_plus = &CMat::identity(DIM) + &s_mat;
    let inv = Lu::factor(&i_plus, &Default::default())?.inverse();
    let mut l_start = &(sliced.section.l() * &snf.cert.a) * &inv;
    let norm = l_start.frobenius();
    l_start = l_start.scale(C64::new((DIM as f64).sqrt() / norm, 0.0));

    let mut drng = random::stream(seed, stage::LIFT_DIRECTIONS);
    let directions = (0..N_DIRECTIONS)
        .map(|_| random::complex_gaussian_mat(&mut drng, N_COORDS, DIM))
        .collect();
    let problem = LiftProblem::new(l_start, directions, snf.s, seed)?;
    let start_residual = verify_lift(&config_from_skew(&snf.s)?, &problem.l_start).max_residual;
    if !(start_residual < opts.start_tol) {
        return Err(Error::StartResidualTooLarge(start_residual));
    }
    Ok(StartPair {
        problem,
        gamma,
        cert: snf.cert,
        perm: snf.perm,
        start_residual,
    })
}

/// Outcome of a successful lift.
#[derive(Debug, Clone)]
pub struct LiftResult {
    pub ell: CVector,
    /// `L_start + Σ ℓ_k A_k`, acting on the skew normal form of `Γ`.
    pub l: CMat,
    /// `L·(I₇+S_γ)·A_γ⁻¹`, acting on `Γ` itself.
    pub l_hat: CMat,
    pub s_target: SkewParams,
    pub cert: NormalFormCert,
    pub perm: Vec<usize>,
    pub max_plucker_residual: f64,
    pub report: LiftReport,
    pub path_stats: PathResult,
}

/// Lifts `gamma` by tracking from the start pair in `problem`.
pub fn lift(gamma: &Config, problem: &LiftProblem, opts: &LiftOptions) -> Result<LiftResult> {
    lift_observed(gamma, problem, opts, &mut |_| {})
}

/// [`lift`] with a callback after every accepted tracker step.
pub fn lift_observed(
    gamma: &Config,
    problem: &LiftProblem,
    opts: &LiftOptions,
    observer: &mut dyn FnMut(&StepInfo),
) -> Result<LiftResult> {
    let mut rng = random::stream(opts.seed, stage::SNF_RETRY);
    let snf = skew_normal_form_retrying(gamma, &SelfDualOptions::default(), opts.snf_retries, &mut rng)?;
    let start = problem.s_start.0.to_vec();
    let target = snf.s.0.to_vec();
    let path: Box<dyn ParamPath> = if opts.gamma_arc {
        let mut arng = random::stream(opts.seed, stage::GAMMA_ARC);
        Box::new(Detour::random(start, target, 0.5, &mut arng))
    } else {
        Box::new(StraightLine::new(start, target))
    };
    let sys = LiftSystem::new(problem);
    let x0 = problem.start_solution();
    let result = if opts.squared_up {
        let sq = SquaredUp::new(&sys, &mut random::stream(opts.seed, stage::SQUARED_UP));
        track_path_observed(&sq, &x0, path.as_ref(), &opts.tracker, observer)
    } else {
        track_path_observed(&sys, &x0, path.as_ref(), &opts.tracker, observer)
    };
    if !result.is_success() {
        return Err(Error::PathFailed(Box::new(result)));
    }
    let ell = result.endpoint.clone();
    let l = problem.embedding(&ell);
    let i_plus = &CMat::identity(DIM) + &snf.s.to_matrix();
    let a_inv = Lu::factor(&snf.cert.a, &Default::default())?.inverse();
    let l_hat = &(&l * &i_plus) * &a_inv;
    let report = verify_lift(gamma, &l_hat);
    if report.degenerate || !(report.max_residual < opts.lift_tol) {
        return Err(Error::ResidualCheckFailed(report.max_residual));
    }
    Ok(LiftResult {
        ell,
        l,
        l_hat,
        s_target: snf.s,
        cert: snf.cert,
        perm: snf.perm,
        max_plucker_residual: report.max_residual,
        report,
        path_stats: result,
    })
}

/// Independent check of a candidate lift.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftReport {
    /// Max relation value over all images scaled to unit max-modulus.
    pub max_residual: f64,
    pub per_point: Vec<f64>,
    /// Numerical rank of `L̂`.
    pub rank: usize,
    /// Rank of the 15×14 matrix of images.
    pub image_rank: usize,
    /// `min |R_ii| / max |R_ii|` of a pivoted QR of `L̂`.
    pub injectivity_margin: f64,
    /// `L̂` is not injective or some image vanishes.
    pub degenerate: bool,
}

/// Evaluates all 15 relations at the 14 images `L̂·γ_i`.
pub fn verify_lift(gamma: &Config, l_hat: &CMat) -> LiftReport {
    let mut per_point = Vec::with_capacity(POINTS);
    let mut images = Vec::with_capacity(POINTS);
    let mut vanishing = false;
    for i in 0..POINTS {
        let x = l_hat.matvec(&gamma.column(i));
        if linalg::max_abs(&x) == 0.0 || !x.iter().all(|z| z.is_finite()) {
            vanishing = true;
            per_point.push(0.0);
            images.push(x);
            continue;
        }
        let xn = linalg::normalize_max(&x);
        per_point.push(linalg::max_abs(&pluecker_relations(&xn)));
        images.push(xn);
    }
    let max_residual = linalg::nan_max(per_point.iter().copied());
    let (rank, injectivity_margin) = if l_hat.max_abs() == 0.0 || !l_hat.is_finite() {
        (0, 0.0)
    } else {
        let qr = Qr::factor_pivoted(l_hat);
        let d = qr.r_diag();
        let margin = d.last().map_or(0.0, |z| z.norm()) / d[0].norm();
        (qr.rank(1e-10), margin)
    };
    let image_rank = linalg::rank(&CMat::from_columns(&images), 1e-8);
    LiftReport {
        max_residual,
        per_point,
        rank,
        image_rank,
        injectivity_margin,
        degenerate: vanishing || rank < DIM,
    }
}

/// A random perturbation helper used by sensitivity checks.
pub fn perturb<R: Rng + ?Sized>(m: &CMat, size: f64, rng: &mut R) -> CMat {
    let noise = random::complex_gaussian_mat(rng, m.rows(), m.cols());
    m + &noise.scale(C64::new(size, 0.0))
}
