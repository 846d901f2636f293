//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use mukai_core::linalg::{CMat, C64};
use mukai_core::selfdual::{Config, DIM, POINTS};

/// An integer self-dual configuration of 14 points in P⁶.
pub const GAMMA: [[i64; POINTS]; DIM] = [
    [7, -2, 6, -1, -6, 1, -9, 7, 0, 6, 1, 8, -3, 7],
    [-1, 2, -5, -2, 0, -4, 3, -3, -4, -3, 4, -2, 4, -1],
    [1, 4, -1, -5, -3, 6, 8, -1, -8, -3, 5, 1, -6, -8],
    [3, -6, 4, -3, -4, 6, 0, 5, 8, 2, 3, 2, -8, 0],
    [1, -2, 1, 0, -4, 2, 2, 3, 4, -1, 2, 2, -2, -2],
    [0, -6, -5, 6, 3, 7, -3, 2, 8, -7, -6, -3, -5, 5],
    [-3, 3, -4, 1, 4, 3, 2, -3, -6, -4, -3, -4, -1, -2],
];

/// Its witness up to scale.
pub const LAMBDA: [f64; POINTS] = [-1.0, -1.0, -1.0, -1.0, -1.0, -1.0, -1.0, 1.0, 0.25, 1.0, 1.0, 1.0, 1.0, 1.0];

/// Orthogonal block of its normal form, to four decimals.
pub const P: [[f64; DIM]; DIM] = [
    [-0.3399, 0.06, -0.0924, 0.235, 0.7564, -0.3033, 0.3911],
    [-0.2052, -0.8506, 0.0197, -0.1977, 0.268, 0.1942, -0.2922],
    [0.1008, 0.2302, 0.8118, -0.2422, 0.3148, -0.1311, -0.3208],
    [0.0948, 0.319, -0.4084, -0.722, 0.3291, 0.3032, -0.0306],
    [-0.7734, 0.0615, 0.1552, -0.4091, -0.3747, -0.1609, 0.2009],
    [0.2627, -0.1669, -0.2427, -0.2875, -0.072, -0.8558, -0.1552],
    [-0.3951, 0.2942, -0.2868, 0.2752, 0.055, -0.0546, -0.7703],
];

/// Change of basis of the normal form divided by `i`, to four decimals.
pub const A_OVER_I: [[f64; DIM]; DIM] = [
    [3.6821, -1.052, 3.1561, -0.526, -3.1561, 0.526, -4.7341],
    [-0.526, 1.052, -2.63, -1.052, 0.0, -2.104, 1.578],
    [0.526, 2.104, -0.526, -2.63, -1.578, 3.1561, 4.2081],
    [1.578, -3.1561, 2.104, -1.578, -2.104, 3.1561, 0.0],
    [0.526, -1.052, 0.526, 0.0, -2.104, 1.052, 1.052],
    [0.0, -3.1561, -2.63, 3.1561, 1.578, 3.6821, -1.578],
    [-1.578, 1.578, -2.104, 0.526, 2.104, 1.578, 1.052],
];

/// The skew matrix of its skew normal form.
pub const S: [[i64; DIM]; DIM] = [
    [0, -1, 1, 0, -1, 4, 2],
    [1, 0, 3, -2, -2, 10, 12],
    [-1, -3, 0, 2, 1, -1, -2],
    [0, 2, -2, 0, -1, -10, -6],
    [1, 2, -1, 1, 0, -4, -4],
    [-4, -10, 1, 10, 4, 0, -6],
    [-2, -12, 2, 6, 4, 6, 0],
];

/// `[I₇ + S | I₇ − S]`.
pub const GAMMA_SNF: [[i64; POINTS]; DIM] = [
    [1, -1, 1, 0, -1, 4, 2, 1, 1, -1, 0, 1, -4, -2],
    [1, 1, 3, -2, -2, 10, 12, -1, 1, -3, 2, 2, -10, -12],
    [-1, -3, 1, 2, 1, -1, -2, 1, 3, 1, -2, -1, 1, 2],
    [0, 2, -2, 1, -1, -10, -6, 0, -2, 2, 1, 1, 10, 6],
    [1, 2, -1, 1, 1, -4, -4, -1, -2, 1, -1, 1, 4, 4],
    [-4, -10, 1, 10, 4, 1, -6, 4, 10, -1, -10, -4, 1, 6],
    [-2, -12, 2, 6, 4, 6, 1, 2, 12, -2, -6, -4, -6, 1],
];

pub fn gamma() -> Config {
    Config::from_integers(&GAMMA)
}

pub fn real_mat<const R: usize, const C: usize>(m: &[[f64; C]; R]) -> CMat {
    CMat::from_fn(R, C, |r, c| C64::new(m[r][c], 0.0))
}

pub fn int_mat<const R: usize, const C: usize>(m: &[[i64; C]; R]) -> CMat {
    CMat::from_fn(R, C, |r, c| C64::new(m[r][c] as f64, 0.0))
}

use mukai_core::tracker::{EvaluatedSystem, Evaluation};

/// Max entrywise error between `J` and central differences of `f`, relative
/// to `max(1, ‖J‖max)`. `f` is holomorphic, so a real step suffices.
pub fn fd_error(jac: &CMat, x: &[C64], h: f64, f: impl Fn(&[C64]) -> Vec<C64>) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..x.len() {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let (fp, fm) = (f(&xp), f(&xm));
        for i in 0..fp.len() {
            let d = (fp[i] - fm[i]) / (2.0 * h);
            worst = worst.max((d - jac[(i, j)]).norm());
        }
    }
    worst / jac.max_abs().max(1.0)
}

/// Finite-difference errors of `∂F/∂x` and `∂F/∂p`.
pub fn system_fd_errors<S: EvaluatedSystem>(sys: &S, x: &[C64], p: &[C64], h: f64) -> (f64, f64) {
    let mut ev = Evaluation::for_system(sys);
    sys.evaluate(x, p, &mut ev, true);
    let ex = fd_error(&ev.jac_x, x, h, |y| sys.residual(y, p));
    let ep = fd_error(&ev.jac_p, p, h, |q| sys.residual(x, q));
    (ex, ep)
}
