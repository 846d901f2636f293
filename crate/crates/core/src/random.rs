//! Seeded random streams and complex Gaussian sampling.
//!
//! Every random draw in the crate goes through a [`ChaCha8Rng`] obtained from
//! [`stream`]: a base seed plus a 64-bit stream id. Streams are independent,
//! so work split across threads draws the same numbers as a serial run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{CMat, CVector, C64};

pub type SeededRng = ChaCha8Rng;

/// Well-known stream ids for pipeline stages.
pub mod stage {
    pub const SLICE_START: u64 = 1;
    pub const SLICE_TARGET: u64 = 2;
    pub const SNF_RETRY: u64 = 3;
    pub const WITNESS: u64 = 4;
    pub const LIFT_DIRECTIONS: u64 = 5;
    pub const LIFT_START: u64 = 6;
    pub const CENSUS_START: u64 = 7;
    pub const SQUARED_UP: u64 = 8;
    pub const GAMMA_ARC: u64 = 9;
    /// Census sample `i` uses stream `CENSUS_SAMPLE_BASE + i`.
    pub const CENSUS_SAMPLE_BASE: u64 = 1 << 32;
}

/// Counter-based stream: same `(seed, id)` always yields the same sequence.
pub fn stream(seed: u64, id: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Derives a child seed, used to hand a stage its own seed in the manifest.
pub fn sub_seed(seed: u64, id: u64) -> u64 {
    stream(seed, id).random()
}

pub fn real_gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Standard complex Gaussian: real and imaginary parts `N(0, 1/2)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    C64::new(real_gaussian(rng) * s, real_gaussian(rng) * s)
}

pub fn complex_gaussian_vec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    (0..n).map(|_| complex_gaussian(rng)).collect()
}

pub fn complex_gaussian_mat<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn real_gaussian_mat<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| C64::new(real_gaussian(rng), 0.0))
}

/// A random point on the unit circle.
pub fn unit_phase<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    C64::from_polar(1.0, theta)
}
