//! Numerical tools for self-dual configurations of 14 points in P⁶ and
//! linear sections of the Grassmannian Gr(2,6) ⊂ P¹⁴.
//!
//! * [`slicing`] intersects Gr(2,6) with a 7-dimensional linear space by a
//!   three-stage homotopy through the toric degeneration of the Plücker
//!   coordinates, and recovers the self-dual configuration the section cuts
//!   out.
//! * [`lifting`] goes the other way: given a self-dual configuration Γ it
//!   tracks a parameter homotopy in the skew normal form chart to find a
//!   linear embedding `L̂: P⁶ → P¹⁴` with `L̂(Γ) ⊂ Gr(2,6)`.
//! * [`selfdual`] holds the normal forms (orthogonal, skew, Cayley) and
//!   self-duality tests both directions rely on.

pub mod error;
pub mod grassmann;
pub mod io;
pub mod lifting;
pub mod linalg;
pub mod par;
pub mod random;
pub mod selfdual;
pub mod slicing;
pub mod tracker;

pub use error::{Error, Result};
pub use linalg::{CMat, CVector, C64};
pub use par::Execution;
