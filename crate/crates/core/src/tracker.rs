//! Predictor–corrector path tracking for parameterized polynomial systems
//! `F(x, p) = 0` with `m ≥ n` equations in `n` unknowns.
//!
//! The predictor is an explicit Euler step on the Davidenko equation
//! `J_x·ẋ = −J_p·ṗ(u)`; the corrector runs Newton (square systems, LU) or
//! Gauss–Newton (overdetermined systems, Householder QR) at the new
//! parameter value. Steps shrink on corrector failure and grow after a run of
//! successes. At `u = 1` a final refinement runs to `refine_tol`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, max_abs, CMat, CVector, Lu, Qr, C64, ONE, ZERO};
use crate::par::Execution;

/// Output buffers for one evaluation of a system.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub residual: CVector,
    pub jac_x: CMat,
    /// `∂F/∂params`; only filled when requested.
    pub jac_p: CMat,
}

impl Evaluation {
    pub fn new(m: usize, n: usize, q: usize) -> Self {
        Evaluation {
            residual: vec![ZERO; m],
            jac_x: CMat::zeros(m, n),
            jac_p: CMat::zeros(m, q),
        }
    }

    pub fn for_system<S: EvaluatedSystem + ?Sized>(sys: &S) -> Self {
        Self::new(sys.n_equations(), sys.n_variables(), sys.n_params())
    }
}

/// A parameterized polynomial system with analytic derivatives.
///
/// Implementations must be deterministic and safe to evaluate from several
/// threads at once.
pub trait EvaluatedSystem: Sync {
    fn n_equations(&self) -> usize;
    fn n_variables(&self) -> usize;
    fn n_params(&self) -> usize;

    /// Fills `out.residual` and `out.jac_x`, and `out.jac_p` when
    /// `with_param_jacobian` is set.
    fn evaluate(&self, x: &[C64], params: &[C64], out: &mut Evaluation, with_param_jacobian: bool);

    fn residual(&self, x: &[C64], params: &[C64]) -> CVector {
        let mut ev = Evaluation::for_system(self);
        self.evaluate(x, params, &mut ev, false);
        ev.residual
    }
}

impl<S: EvaluatedSystem + ?Sized> EvaluatedSystem for &S {
    fn n_equations(&self) -> usize {
        (**self).n_equations()
    }
    fn n_variables(&self) -> usize {
        (**self).n_variables()
    }
    fn n_params(&self) -> usize {
        (**self).n_params()
    }
    fn evaluate(&self, x: &[C64], params: &[C64], out: &mut Evaluation, with_param_jacobian: bool) {
        (**self).evaluate(x, params, out, with_param_jacobian)
    }
}

/// A differentiable path `[0,1] → ℂ^q` through parameter space.
pub trait ParamPath: Sync {
    fn at(&self, u: f64) -> CVector;
    fn derivative(&self, u: f64) -> CVector;
}

/// `p(u) = (1 − u)·start + u·target`.
#[derive(Debug, Clone)]
pub struct StraightLine {
    pub start: CVector,
    pub target: CVector,
}

impl StraightLine {
    pub fn new(start: CVector, target: CVector) -> Self {
        assert_eq!(start.len(), target.len(), "path endpoints differ in length");
        StraightLine { start, target }
    }

    pub fn constant(p: CVector) -> Self {
        StraightLine {
            start: p.clone(),
            target: p,
        }
    }

    pub fn reversed(&self) -> Self {
        StraightLine {
            start: self.target.clone(),
            target: self.start.clone(),
        }
    }
}

impl ParamPath for StraightLine {
    fn at(&self, u: f64) -> CVector {
        if u == 1.0 {
            return self.target.clone();
        }
        if u == 0.0 {
            return self.start.clone();
        }
        self.start
            .iter()
            .zip(&self.target)
            .map(|(a, b)| a * (1.0 - u) + b * u)
            .collect()
    }

    fn derivative(&self, _u: f64) -> CVector {
        self.target.iter().zip(&self.start).map(|(b, a)| b - a).collect()
    }
}

/// Quadratic Bézier path `start → control → target`, used to detour around
/// the straight segment.
#[derive(Debug, Clone)]
pub struct Detour {
    pub start: CVector,
    pub control: CVector,
    pub target: CVector,
}

impl Detour {
    /// Control point at the segment midpoint plus a random complex offset
    /// of relative size `scale`.
    pub fn random<R: Rng + ?Sized>(start: CVector, target: CVector, scale: f64, rng: &mut R) -> Self {
        let span = linalg::norm2(&linalg::sub_vec(&target, &start)).max(1.0);
        let control = start
            .iter()
            .zip(&target)
            .map(|(a, b)| (a + b) * 0.5 + crate::random::complex_gaussian(rng) * (scale * span / (start.len() as f64).sqrt()))
            .collect();
        Detour {
            start,
            control,
            target,
        }
    }
}

impl ParamPath for Detour {
    fn at(&self, u: f64) -> CVector {
        if u == 1.0 {
            return self.target.clone();
        }
        let (a, b, c) = ((1.0 - u) * (1.0 - u), 2.0 * u * (1.0 - u), u * u);
        (0..self.start.len())
            .map(|i| self.start[i] * a + self.control[i] * b + self.target[i] * c)
            .collect()
    }

    fn derivative(&self, u: f64) -> CVector {
        (0..self.start.len())
            .map(|i| {
                (self.control[i] - self.start[i]) * (2.0 * (1.0 - u))
                    + (self.target[i] - self.control[i]) * (2.0 * u)
            })
            .collect()
    }
}

/// Tracker tuning knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerOptions {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub corrector_tol: f64,
    pub corrector_iters: usize,
    pub divergence_bound: f64,
    pub refine_tol: f64,
    pub refine_iters: usize,
    pub step_expand: f64,
    pub step_shrink: f64,
    pub successes_before_expand: usize,
    /// Step budget; exhausting it reports `MinStepReached`.
    pub max_steps: usize,
}

impl Default for TrackerOptions {
    fn default() -> Self {
        TrackerOptions {
            initial_step: 0.05,
            min_step: 1e-14,
            max_step: 0.25,
            corrector_tol: 1e-9,
            corrector_iters: 3,
            divergence_bound: 1e8,
            refine_tol: 1e-13,
            refine_iters: 8,
            step_expand: 2.0,
            step_shrink: 0.5,
            successes_before_expand: 4,
            max_steps: 100_000,
        }
    }
}

impl TrackerOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.min_step
            && self.min_step < self.initial_step
            && self.initial_step <= self.max_step
            && self.max_step < 1.0
            && self.corrector_tol > self.refine_tol
            && self.refine_tol > 0.0
            && self.corrector_iters >= 1
            && self.step_shrink > 0.0
            && self.step_shrink < 1.0
            && self.step_expand > 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("inconsistent tracker options: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathStatus {
    Success,
    Diverged,
    MinStepReached,
    CorrectorFailed,
}

/// Outcome of tracking one path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub status: PathStatus,
    pub endpoint: CVector,
    /// Normwise backward error `‖F‖∞ / (‖J‖∞·(1 + ‖x‖∞))` at the endpoint.
    pub residual: f64,
    /// Max-norm of `F(endpoint, p(1))`.
    pub function_residual: f64,
    /// Max-norm of the last Newton correction of the final refinement.
    pub correction: f64,
    pub steps_taken: usize,
    pub steps_rejected: usize,
    pub final_newton_iters: usize,
}

impl PathResult {
    pub fn is_success(&self) -> bool {
        self.status == PathStatus::Success
    }
}

/// Progress snapshot handed to observers after every accepted step.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    pub u: f64,
    pub step: f64,
    pub corrector_iters: usize,
    pub steps_taken: usize,
}

/// Result of [`newton_refine`].
#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub x: CVector,
    /// Max-norm of the last correction applied.
    pub residual: f64,
    pub function_residual: f64,
    /// `‖F‖∞ / (‖J‖∞·(1 + ‖x‖∞))` at the returned iterate.
    pub backward_error: f64,
    pub iters: usize,
    pub converged: bool,
}

/// Solves `J·δ = rhs` (LU when square, least squares otherwise).
fn solve_linearized(jac: &CMat, rhs: &[C64]) -> Option<CVector> {
    if jac.is_square() {
        let lu = Lu::factor_with_tol(jac, 1e-14 * jac.max_abs()).ok()?;
        Some(lu.solve_vec(rhs))
    } else {
        Qr::factor(jac).solve_least_squares(rhs, 1e-13).ok()
    }
}

fn neg(v: &[C64]) -> CVector {
    v.iter().map(|z| -z).collect()
}

fn backward_error(fres: f64, jac: &CMat, x: &[C64]) -> f64 {
    let jn = linalg::nan_max((0..jac.rows()).map(|r| jac.row(r).iter().map(|z| z.norm()).sum::<f64>()));
    let scale = jn * (1.0 + max_abs(x));
    if scale > 0.0 {
        fres / scale
    } else if fres == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Newton / Gauss–Newton refinement at fixed parameters.
///
/// Iterates until the correction satisfies `‖δ‖∞ ≤ tol·(1 + ‖x‖∞)` or
/// `max_iters` is exhausted. A correction that would increase `‖F‖` by more
/// than a factor two is halved up to four times while it is still large.
pub fn newton_refine<S: EvaluatedSystem + ?Sized>(
    sys: &S,
    x: &[C64],
    params: &[C64],
    tol: f64,
    max_iters: usize,
) -> NewtonOutcome {
    let mut ev = Evaluation::for_system(sys);
    let mut x = x.to_vec();
    let mut last = f64::INFINITY;
    let mut iters = 0;
    sys.evaluate(&x, params, &mut ev, false);
    let mut fres = max_abs(&ev.residual);
    let mut converged = false;
    while iters < max_iters {
        let Some(delta) = solve_linearized(&ev.jac_x, &neg(&ev.residual)) else {
            break;
        };
        iters += 1;
        let dn = max_abs(&delta);
        let mut damping = 1.0;
        let mut candidate: CVector;
        loop {
            candidate = x.iter().zip(&delta).map(|(a, d)| a + d * damping).collect();
            if dn * damping <= 1e-6 * (1.0 + max_abs(&x)) || damping < 0.1 {
                break;
            }
            let r = sys.residual(&candidate, params);
            if max_abs(&r) <= 2.0 * fres {
                break;
            }
            damping *= 0.5;
        }
        x = candidate;
        last = dn * damping;
        sys.evaluate(&x, params, &mut ev, false);
        fres = max_abs(&ev.residual);
        if !fres.is_finite() {
            break;
        }
        if last <= tol * (1.0 + max_abs(&x)) {
            converged = true;
            break;
        }
    }
    if max_iters == 0 {
        last = 0.0;
        converged = true;
    }
    let backward_error = backward_error(fres, &ev.jac_x, &x);
    NewtonOutcome {
        x,
        residual: last,
        function_residual: fres,
        backward_error,
        iters,
        converged,
    }
}

/// Tracks one solution path from `u = 0` to `u = 1`.
pub fn track_path<S, P>(sys: &S, x_start: &[C64], path: &P, opts: &TrackerOptions) -> PathResult
where
    S: EvaluatedSystem + ?Sized,
    P: ParamPath + ?Sized,
{
    track_path_observed(sys, x_start, path, opts, &mut |_| {})
}

/// [`track_path`] with a callback after each accepted step.
pub fn track_path_observed<S, P>(
    sys: &S,
    x_start: &[C64],
    path: &P,
    opts: &TrackerOptions,
    observer: &mut dyn FnMut(&StepInfo),
) -> PathResult
where
    S: EvaluatedSystem + ?Sized,
    P: ParamPath + ?Sized,
{
    let mut ev = Evaluation::for_system(sys);
    let mut x = x_start.to_vec();
    let mut u = 0.0f64;
    let mut h = opts.initial_step;
    let mut streak = 0usize;
    let mut accepted = 0usize;
    let mut rejected = 0usize;

    let finish = |status, x: CVector, residual, fres, correction, accepted, rejected, iters| PathResult {
        status,
        endpoint: x,
        residual,
        function_residual: fres,
        correction,
        steps_taken: accepted,
        steps_rejected: rejected,
        final_newton_iters: iters,
    };

    while u < 1.0 {
        if accepted + rejected >= opts.max_steps {
            return finish(PathStatus::MinStepReached, x, f64::NAN, f64::NAN, f64::NAN, accepted, rejected, 0);
        }
        let last_step = h >= 1.0 - u;
        if last_step {
            h = 1.0 - u;
        }
        let u_next = if last_step { 1.0 } else { u + h };

        // predictor
        let p = path.at(u);
        let dp = path.derivative(u);
        sys.evaluate(&x, &p, &mut ev, true);
        let rhs = neg(&ev.jac_p.matvec(&dp));
        let xdot = solve_linearized(&ev.jac_x, &rhs);

        let mut ok = false;
        let mut iters_used = 0;
        let mut candidate = x.clone();
        if let Some(xdot) = xdot {
            linalg::axpy(C64::new(h, 0.0), &xdot, &mut candidate);
            // corrector
            let p_next = path.at(u_next);
            let mut prev = f64::INFINITY;
            for it in 0..opts.corrector_iters {
                sys.evaluate(&candidate, &p_next, &mut ev, false);
                let Some(delta) = solve_linearized(&ev.jac_x, &neg(&ev.residual)) else {
                    break;
                };
                let dn = max_abs(&delta);
                linalg::axpy(ONE, &delta, &mut candidate);
                iters_used = it + 1;
                if !dn.is_finite() {
                    break;
                }
                if dn <= opts.corrector_tol * (1.0 + max_abs(&candidate)) {
                    ok = true;
                    break;
                }
                if it > 0 && dn > 0.5 * prev {
                    break;
                }
                prev = dn;
            }
        }

        if ok {
            x = candidate;
            u = u_next;
            accepted += 1;
            streak += 1;
            observer(&StepInfo {
                u,
                step: h,
                corrector_iters: iters_used,
                steps_taken: accepted,
            });
            if max_abs(&x) > opts.divergence_bound {
                return finish(PathStatus::Diverged, x, f64::NAN, f64::NAN, f64::NAN, accepted, rejected, 0);
            }
            if streak >= opts.successes_before_expand {
                h = (h * opts.step_expand).min(opts.max_step);
                streak = 0;
            }
        } else {
            rejected += 1;
            streak = 0;
            h *= opts.step_shrink;
            if max_abs(&candidate) > opts.divergence_bound && max_abs(&x) > opts.divergence_bound.sqrt() {
                return finish(PathStatus::Diverged, x, f64::NAN, f64::NAN, f64::NAN, accepted, rejected, 0);
            }
            if h < opts.min_step {
                return finish(PathStatus::MinStepReached, x, f64::NAN, f64::NAN, f64::NAN, accepted, rejected, 0);
            }
        }
    }

    let p1 = path.at(1.0);
    let refined = newton_refine(sys, &x, &p1, opts.refine_tol, opts.refine_iters);
    // Converged in the correction, or stalled at the roundoff floor of a
    // badly scaled but accurate endpoint.
    let scale = 1.0 + max_abs(&refined.x);
    let converged = refined.converged && refined.residual <= opts.refine_tol * scale;
    let stalled = refined.residual <= opts.corrector_tol * scale;
    let status = if (converged || stalled) && refined.backward_error <= opts.refine_tol {
        PathStatus::Success
    } else if max_abs(&refined.x) > opts.divergence_bound {
        PathStatus::Diverged
    } else {
        PathStatus::CorrectorFailed
    };
    finish(
        status,
        refined.x,
        refined.backward_error,
        refined.function_residual,
        refined.residual,
        accepted,
        rejected,
        refined.iters,
    )
}

/// Tracks every start independently; results are returned in input order.
pub fn track_all<S, P>(
    sys: &S,
    starts: &[CVector],
    path: &P,
    opts: &TrackerOptions,
    exec: Execution,
) -> Vec<PathResult>
where
    S: EvaluatedSystem + ?Sized,
    P: ParamPath + ?Sized,
{
    exec.map_indexed(starts.len(), |i| track_path(sys, &starts[i], path, opts))
}

// ---------------------------------------------------------------------------
// total-degree start systems

/// Default cap on the Bézout number of a total-degree start system.
pub const DEFAULT_BEZOUT_CAP: u128 = 1_000_000;

/// `G_i(x) = x_i^{d_i} − 1`.
#[derive(Debug, Clone)]
pub struct TotalDegreeSystem {
    pub degrees: Vec<u32>,
}

impl EvaluatedSystem for TotalDegreeSystem {
    fn n_equations(&self) -> usize {
        self.degrees.len()
    }
    fn n_variables(&self) -> usize {
        self.degrees.len()
    }
    fn n_params(&self) -> usize {
        0
    }

    fn evaluate(&self, x: &[C64], _params: &[C64], out: &mut Evaluation, _with_param_jacobian: bool) {
        let n = self.degrees.len();
        for i in 0..n {
            let d = self.degrees[i] as i32;
            out.residual[i] = x[i].powi(d) - ONE;
            for j in 0..n {
                out.jac_x[(i, j)] = ZERO;
            }
            out.jac_x[(i, i)] = x[i].powi(d - 1) * d as f64;
        }
    }
}

/// Start system `x_i^{d_i} = 1` and all of its `∏ d_i` solutions.
pub fn total_degree_start(degrees: &[u32]) -> Result<(TotalDegreeSystem, Vec<CVector>)> {
    total_degree_start_capped(degrees, DEFAULT_BEZOUT_CAP)
}

pub fn total_degree_start_capped(degrees: &[u32], cap: u128) -> Result<(TotalDegreeSystem, Vec<CVector>)> {
    if degrees.is_empty() || degrees.contains(&0) {
        return Err(Error::InvalidInput("degrees must be nonempty and positive".into()));
    }
    let count = degrees.iter().try_fold(1u128, |acc, &d| acc.checked_mul(d as u128));
    let count = match count {
        Some(c) if c <= cap => c as usize,
        Some(c) => return Err(Error::BezoutOverflow { count: c, cap }),
        None => return Err(Error::BezoutOverflow { count: u128::MAX, cap }),
    };
    let roots: Vec<Vec<C64>> = degrees
        .iter()
        .map(|&d| {
            (0..d)
                .map(|k| C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / d as f64))
                .collect()
        })
        .collect();
    let mut starts = Vec::with_capacity(count);
    let mut idx = vec![0usize; degrees.len()];
    for _ in 0..count {
        starts.push(idx.iter().enumerate().map(|(i, &k)| roots[i][k]).collect());
        for (i, d) in degrees.iter().enumerate() {
            idx[i] += 1;
            if idx[i] < *d as usize {
                break;
            }
            idx[i] = 0;
        }
    }
    Ok((
        TotalDegreeSystem {
            degrees: degrees.to_vec(),
        },
        starts,
    ))
}

/// `H(x, u) = (1 − u)·γ·G(x) + u·F(x, p)` at fixed target parameters `p`.
/// Its single parameter is `u`.
pub struct GammaHomotopy<'a, G: EvaluatedSystem + ?Sized, F: EvaluatedSystem + ?Sized> {
    pub start: &'a G,
    pub target: &'a F,
    pub target_params: CVector,
    pub gamma: C64,
}

impl<G: EvaluatedSystem + ?Sized, F: EvaluatedSystem + ?Sized> EvaluatedSystem for GammaHomotopy<'_, G, F> {
    fn n_equations(&self) -> usize {
        self.target.n_equations()
    }
    fn n_variables(&self) -> usize {
        self.target.n_variables()
    }
    fn n_params(&self) -> usize {
        1
    }

    fn evaluate(&self, x: &[C64], params: &[C64], out: &mut Evaluation, with_param_jacobian: bool) {
        let u = params[0];
        let mut eg = Evaluation::for_system(self.start);
        let mut ef = Evaluation::for_system(self.target);
        self.start.evaluate(x, &[], &mut eg, false);
        self.target.evaluate(x, &self.target_params, &mut ef, false);
        let a = (ONE - u) * self.gamma;
        for i in 0..out.residual.len() {
            out.residual[i] = a * eg.residual[i] + u * ef.residual[i];
            for j in 0..x.len() {
                out.jac_x[(i, j)] = a * eg.jac_x[(i, j)] + u * ef.jac_x[(i, j)];
            }
            if with_param_jacobian {
                out.jac_p[(i, 0)] = ef.residual[i] - self.gamma * eg.residual[i];
            }
        }
    }
}

/// Path `u: 0 → 1` for a [`GammaHomotopy`].
pub fn unit_interval() -> StraightLine {
    StraightLine::new(vec![ZERO], vec![ONE])
}

/// Randomized squaring-up `R·F` of an overdetermined system with a fixed
/// `n×m` complex Gaussian `R`.
pub struct SquaredUp<S: EvaluatedSystem> {
    pub inner: S,
    pub mixer: CMat,
}

impl<S: EvaluatedSystem> SquaredUp<S> {
    pub fn new<R: Rng + ?Sized>(inner: S, rng: &mut R) -> Self {
        let mixer = crate::random::complex_gaussian_mat(rng, inner.n_variables(), inner.n_equations());
        SquaredUp { inner, mixer }
    }
}

impl<S: EvaluatedSystem> EvaluatedSystem for SquaredUp<S> {
    fn n_equations(&self) -> usize {
        self.inner.n_variables()
    }
    fn n_variables(&self) -> usize {
        self.inner.n_variables()
    }
    fn n_params(&self) -> usize {
        self.inner.n_params()
    }

    fn evaluate(&self, x: &[C64], params: &[C64], out: &mut Evaluation, with_param_jacobian: bool) {
        let mut inner = Evaluation::for_system(&self.inner);
        self.inner.evaluate(x, params, &mut inner, with_param_jacobian);
        out.residual = self.mixer.matvec(&inner.residual);
        out.jac_x = &self.mixer * &inner.jac_x;
        if with_param_jacobian {
            out.jac_p = &self.mixer * &inner.jac_p;
        }
    }
}

/// Indices of results that succeeded and whose endpoints are pairwise at
/// least `min_dist` apart under `dist` (first occurrence wins).
pub fn distinct_successes(
    results: &[PathResult],
    min_dist: f64,
    dist: impl Fn(&[C64], &[C64]) -> f64,
) -> Vec<usize> {
    let mut keep: Vec<usize> = Vec::new();
    for (i, r) in results.iter().enumerate() {
        if !r.is_success() {
            continue;
        }
        if keep.iter().all(|&k| dist(&results[k].endpoint, &r.endpoint) > min_dist) {
            keep.push(i);
        }
    }
    keep
}

/// Relative max-norm distance `‖a − b‖∞ / (1 + max(‖a‖∞, ‖b‖∞))`.
pub fn relative_distance(a: &[C64], b: &[C64]) -> f64 {
    let d = max_abs(&linalg::sub_vec(a, b));
    d / (1.0 + max_abs(a).max(max_abs(b)))
}
