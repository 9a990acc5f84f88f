//! Clifford+V gate synthesis.
//!
//! The crate approximates target unitaries by words over a finite gate
//! alphabet (by default the V-basis, with Clifford gates free):
//!
//! * [`mitm`]: meet-in-the-middle exhaustive search with an exact kd-tree,
//!   returning a minimum-length word within a phase-invariant distance `ε`;
//! * [`ccsearch`]: subgroup-guided search for conditionally controlled gates
//!   `C(A, B)` with a prescribed `A^† B`;
//! * [`controlled`]: decomposition of generalized controlled gates
//!   `A_0 ⊕ A_1 ⊕ …` into conditionally controlled factors plus one SU(2)
//!   residual;
//! * [`counting`]: word counting and V-count lower bounds;
//! * [`bench`]: sweep drivers producing the CSV rows used for scaling fits.
//!
//! The linear algebra ([`linalg`]) and nearest-neighbour index ([`nns`]) are
//! generic over the scalar type; the aliases below fix `f64`, which is what the
//! search algorithms use.

pub mod bench;
pub mod ccsearch;
pub mod circuit;
pub mod config;
pub mod controlled;
pub mod counting;
pub mod error;
pub mod gateset;
pub mod linalg;
pub mod mitm;
pub mod nns;
pub mod scalar;
pub mod space;

pub use error::{Error, LimitReport, Result};
pub use scalar::Real;

pub type Quat64 = linalg::Quat<f64>;
pub type Quat32 = linalg::Quat<f32>;
pub type UMat64 = linalg::UMat<f64>;
pub type UMat32 = linalg::UMat<f32>;
pub type KdTree64 = nns::KdTree<f64>;
pub type Complex64 = num_complex::Complex<f64>;
