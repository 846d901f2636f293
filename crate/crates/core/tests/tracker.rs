use mukai_core::linalg::{CMat, CVector, C64};
use mukai_core::random;
use mukai_core::tracker::{
    distinct_successes, relative_distance, total_degree_start, track_all, track_path, track_path_observed,
    EvaluatedSystem, Evaluation, GammaHomotopy, PathStatus, SquaredUp, StraightLine, TrackerOptions,
    unit_interval,
};
use mukai_core::Execution;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `x_i² − p_i = 0`.
struct Squares(usize);

impl EvaluatedSystem for Squares {
    fn n_equations(&self) -> usize {
        self.0
    }
    fn n_variables(&self) -> usize {
        self.0
    }
    fn n_params(&self) -> usize {
        self.0
    }
    fn evaluate(&self, x: &[C64], p: &[C64], out: &mut Evaluation, with_p: bool) {
        for i in 0..self.0 {
            out.residual[i] = x[i] * x[i] - p[i];
            for j in 0..self.0 {
                out.jac_x[(i, j)] = if i == j { x[i] * 2.0 } else { c(0.0, 0.0) };
                if with_p {
                    out.jac_p[(i, j)] = if i == j { c(-1.0, 0.0) } else { c(0.0, 0.0) };
                }
            }
        }
    }
}

/// `p·x − 1 = 0`; the solution escapes to infinity as `p → 0`.
struct Reciprocal;

impl EvaluatedSystem for Reciprocal {
    fn n_equations(&self) -> usize {
        1
    }
    fn n_variables(&self) -> usize {
        1
    }
    fn n_params(&self) -> usize {
        1
    }
    fn evaluate(&self, x: &[C64], p: &[C64], out: &mut Evaluation, with_p: bool) {
        out.residual[0] = p[0] * x[0] - 1.0;
        out.jac_x[(0, 0)] = p[0];
        if with_p {
            out.jac_p[(0, 0)] = x[0];
        }
    }
}

/// Wraps a system and returns NaN once the first parameter's real part
/// passes `cutoff`.
struct Faulty<S> {
    inner: S,
    cutoff: f64,
}

impl<S: EvaluatedSystem> EvaluatedSystem for Faulty<S> {
    fn n_equations(&self) -> usize {
        self.inner.n_equations()
    }
    fn n_variables(&self) -> usize {
        self.inner.n_variables()
    }
    fn n_params(&self) -> usize {
        self.inner.n_params()
    }
    fn evaluate(&self, x: &[C64], p: &[C64], out: &mut Evaluation, with_p: bool) {
        self.inner.evaluate(x, p, out, with_p);
        if p[0].re > self.cutoff {
            out.residual.iter_mut().for_each(|z| *z = c(f64::NAN, 0.0));
        }
    }
}

/// Three equations in two unknowns with a common solution: `x² = p₀`,
/// `y² = p₁`, `x·y = p₂`.
struct Overdetermined;

impl EvaluatedSystem for Overdetermined {
    fn n_equations(&self) -> usize {
        3
    }
    fn n_variables(&self) -> usize {
        2
    }
    fn n_params(&self) -> usize {
        3
    }
    fn evaluate(&self, x: &[C64], p: &[C64], out: &mut Evaluation, with_p: bool) {
        let z = c(0.0, 0.0);
        out.residual = vec![x[0] * x[0] - p[0], x[1] * x[1] - p[1], x[0] * x[1] - p[2]];
        out.jac_x = CMat::from_vec(3, 2, vec![x[0] * 2.0, z, z, x[1] * 2.0, x[1], x[0]]).unwrap();
        if with_p {
            out.jac_p = CMat::from_fn(3, 3, |i, j| if i == j { c(-1.0, 0.0) } else { z });
        }
    }
}

fn squares_path() -> StraightLine {
    StraightLine::new(vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(4.0, 0.0), c(0.0, 9.0)])
}

#[test]
fn tracks_square_roots_to_closed_form() {
    let r = track_path(&Squares(2), &[c(1.0, 0.0), c(-1.0, 0.0)], &squares_path(), &Default::default());
    assert_eq!(r.status, PathStatus::Success);
    // p₁ stays in the upper half plane, so x₁ = −√p₁ on the principal branch
    let expected = [c(2.0, 0.0), -c(0.0, 9.0).sqrt()];
    assert!((r.endpoint[0] - expected[0]).norm() < 1e-12);
    assert!((r.endpoint[1] - expected[1]).norm() < 1e-12);
    assert!(r.residual < 1e-13);
}

#[test]
fn reversed_path_returns_to_start() {
    let path = squares_path();
    let start = [c(1.0, 0.0), c(-1.0, 0.0)];
    let fwd = track_path(&Squares(2), &start, &path, &Default::default());
    let back = track_path(&Squares(2), &fwd.endpoint, &path.reversed(), &Default::default());
    assert!(back.is_success());
    assert!(relative_distance(&back.endpoint, &start) < 1e-12);
}

#[test]
fn escaping_solution_is_not_reported_as_success() {
    let path = StraightLine::new(vec![c(1.0, 0.0)], vec![c(0.0, 0.0)]);
    let r = track_path(&Reciprocal, &[c(1.0, 0.0)], &path, &Default::default());
    assert!(!r.is_success(), "{r:?}");
    assert!(matches!(r.status, PathStatus::Diverged | PathStatus::MinStepReached));
}

#[test]
fn evaluation_fault_is_contained() {
    let sys = Faulty {
        inner: Squares(2),
        cutoff: 2.5,
    };
    let r = track_path(&sys, &[c(1.0, 0.0), c(1.0, 0.0)], &squares_path(), &Default::default());
    assert!(!r.is_success(), "{r:?}");
    assert!(r.endpoint.iter().all(|z| z.is_finite()));
}

#[test]
fn tracking_is_deterministic_and_mode_independent() {
    let starts: Vec<CVector> = (0..4)
        .map(|k| vec![c(if k & 1 == 0 { 1.0 } else { -1.0 }, 0.0), c(if k & 2 == 0 { 1.0 } else { -1.0 }, 0.0)])
        .collect();
    let opts = TrackerOptions::default();
    let a = track_all(&Squares(2), &starts, &squares_path(), &opts, Execution::Sequential);
    let b = track_all(&Squares(2), &starts, &squares_path(), &opts, Execution::Parallel);
    assert_eq!(a, b);
    assert_eq!(distinct_successes(&a, 1e-8, relative_distance).len(), 4);
}

#[test]
fn observer_sees_monotone_progress() {
    let mut us = Vec::new();
    let r = track_path_observed(
        &Squares(2),
        &[c(1.0, 0.0), c(1.0, 0.0)],
        &squares_path(),
        &Default::default(),
        &mut |info| us.push(info.u),
    );
    assert!(r.is_success());
    assert_eq!(us.len(), r.steps_taken);
    assert!(us.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(*us.last().unwrap(), 1.0);
}

#[test]
fn overdetermined_system_tracks_with_gauss_newton_and_squaring_up() {
    let path = StraightLine::new(
        vec![c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
        vec![c(4.0, 0.0), c(9.0, 0.0), c(6.0, 0.0)],
    );
    let start = [c(1.0, 0.0), c(1.0, 0.0)];
    let r = track_path(&Overdetermined, &start, &path, &Default::default());
    assert!(r.is_success(), "{r:?}");
    assert!(relative_distance(&r.endpoint, &[c(2.0, 0.0), c(3.0, 0.0)]) < 1e-12);
    let sq = SquaredUp::new(Overdetermined, &mut random::stream(1, 0));
    let r = track_path(&sq, &start, &path, &Default::default());
    assert!(r.is_success(), "{r:?}");
    assert!(relative_distance(&r.endpoint, &[c(2.0, 0.0), c(3.0, 0.0)]) < 1e-12);
}

/// `x² + y² = 5`, `x·y = 2` has four isolated solutions.
struct Conic;

impl EvaluatedSystem for Conic {
    fn n_equations(&self) -> usize {
        2
    }
    fn n_variables(&self) -> usize {
        2
    }
    fn n_params(&self) -> usize {
        0
    }
    fn evaluate(&self, x: &[C64], _p: &[C64], out: &mut Evaluation, _with_p: bool) {
        out.residual = vec![x[0] * x[0] + x[1] * x[1] - 5.0, x[0] * x[1] - 2.0];
        out.jac_x = CMat::from_vec(2, 2, vec![x[0] * 2.0, x[1] * 2.0, x[1], x[0]]).unwrap();
    }
}

#[test]
fn gamma_homotopy_finds_all_solutions() {
    let (start, starts) = total_degree_start(&[2, 2]).unwrap();
    assert_eq!(starts.len(), 4);
    let h = GammaHomotopy {
        start: &start,
        target: &Conic,
        target_params: vec![],
        gamma: random::unit_phase(&mut random::stream(2, 0)),
    };
    let results = track_all(&h, &starts, &unit_interval(), &Default::default(), Execution::Sequential);
    let kept = distinct_successes(&results, 1e-8, relative_distance);
    assert_eq!(kept.len(), 4);
    for &k in &kept {
        let x = &results[k].endpoint;
        // {±1, ±2} with x·y = 2
        assert!((x[0] * x[1] - 2.0).norm() < 1e-12);
        assert!(x.iter().all(|z| z.im.abs() < 1e-12));
    }
}
