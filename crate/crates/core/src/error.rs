use thiserror::Error;

use crate::linalg::LinalgError;
use crate::tracker::PathResult;

/// Errors raised by the slicing, normal-form and lifting pipelines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("configuration is not self-dual: {0}")]
    NotSelfDual(String),
    #[error("Cayley transform undefined: P has an eigenvalue at -1")]
    CayleySingular,
    #[error("degenerate configuration: columns {0} and {1} coincide")]
    DegenerateConfig(usize, usize),
    #[error("Bezout number {count} exceeds the cap {cap}")]
    BezoutOverflow { count: u128, cap: u128 },
    #[error("{stage}: expected {expected} distinct solutions, found {found}")]
    WrongCount {
        stage: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("recovery of point {index} failed: residual {residual:.3e}")]
    RecoveryFailed { index: usize, residual: f64 },
    #[error("start pair residual {0:.3e} is too large")]
    StartResidualTooLarge(f64),
    #[error("path tracking failed: {0:?}")]
    PathFailed(Box<PathResult>),
    #[error("lift verification failed: max relation residual {0:.3e}")]
    ResidualCheckFailed(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
