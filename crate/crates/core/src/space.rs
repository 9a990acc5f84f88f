//! Group representations the searches run in.
//!
//! [`Su2Space`] works with unit quaternions; [`SudSpace`] with dense
//! matrices for `d > 2`. Both expose the same operations so the
//! meet-in-the-middle driver is written once.

use crate::error::{Error, Result};
use crate::gateset::GateSet;
use crate::linalg::{dist_phase_invariant, embed_dim, write_embedding, Quat, UMat};
use crate::{Quat64, UMat64};

pub trait SearchSpace: Send + Sync {
    type Elem: Clone + Send + Sync;

    /// Matrix dimension `d`.
    fn dim(&self) -> usize;

    fn identity(&self) -> Self::Elem;

    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    fn adjoint(&self, a: &Self::Elem) -> Self::Elem;

    /// Phase-invariant distance.
    fn distance(&self, a: &Self::Elem, b: &Self::Elem) -> f64;

    /// Phase-normalizes a unitary into the space.
    fn from_matrix(&self, u: &UMat64) -> Result<Self::Elem>;

    fn to_matrix(&self, a: &Self::Elem) -> UMat64;

    /// Coordinates per embedded point.
    fn embed_dim(&self) -> usize {
        embed_dim(self.dim())
    }

    /// Embedded points stored per element.
    fn copies(&self) -> usize;

    fn write_copy(&self, a: &Self::Elem, copy: usize, out: &mut [f64]);

    /// Euclidean radius in the embedding that corresponds to distance `eps`.
    fn radius(&self, eps: f64) -> f64;

    /// Approximate heap bytes per stored element.
    fn elem_bytes(&self) -> usize;
}

/// SU(2) as unit quaternions; embedded points are `±q`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Su2Space;

impl SearchSpace for Su2Space {
    type Elem = Quat64;

    fn dim(&self) -> usize {
        2
    }

    fn identity(&self) -> Quat64 {
        Quat::identity()
    }

    #[inline]
    fn mul(&self, a: &Quat64, b: &Quat64) -> Quat64 {
        *a * *b
    }

    #[inline]
    fn adjoint(&self, a: &Quat64) -> Quat64 {
        a.adjoint()
    }

    #[inline]
    fn distance(&self, a: &Quat64, b: &Quat64) -> f64 {
        a.distance(b)
    }

    fn from_matrix(&self, u: &UMat64) -> Result<Quat64> {
        check_input(u, 2)?;
        Quat::from_matrix_signed(&u.to_special())
    }

    fn to_matrix(&self, a: &Quat64) -> UMat64 {
        a.to_matrix()
    }

    fn copies(&self) -> usize {
        2
    }

    #[inline]
    fn write_copy(&self, a: &Quat64, copy: usize, out: &mut [f64]) {
        let s = if copy == 0 { 1.0 } else { -1.0 };
        for (o, x) in out.iter_mut().zip(a.coords()) {
            *o = s * x;
        }
    }

    fn radius(&self, eps: f64) -> f64 {
        std::f64::consts::SQRT_2 * eps
    }

    fn elem_bytes(&self) -> usize {
        std::mem::size_of::<Quat64>()
    }
}

/// SU(d), `d > 2`, as dense matrices with `d` phase copies.
#[derive(Debug, Clone, Copy)]
pub struct SudSpace {
    dim: usize,
}

impl SudSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 3 {
            return Err(Error::Validation(format!("SudSpace needs d > 2, got {dim}")));
        }
        Ok(Self { dim })
    }
}

impl SearchSpace for SudSpace {
    type Elem = UMat64;

    fn dim(&self) -> usize {
        self.dim
    }

    fn identity(&self) -> UMat64 {
        UMat::identity(self.dim)
    }

    fn mul(&self, a: &UMat64, b: &UMat64) -> UMat64 {
        a * b
    }

    fn adjoint(&self, a: &UMat64) -> UMat64 {
        a.adjoint()
    }

    fn distance(&self, a: &UMat64, b: &UMat64) -> f64 {
        dist_phase_invariant(a, b).expect("same dimension")
    }

    fn from_matrix(&self, u: &UMat64) -> Result<UMat64> {
        check_input(u, self.dim)?;
        Ok(u.to_special())
    }

    fn to_matrix(&self, a: &UMat64) -> UMat64 {
        a.clone()
    }

    fn copies(&self) -> usize {
        self.dim
    }

    fn write_copy(&self, a: &UMat64, copy: usize, out: &mut [f64]) {
        write_embedding(a, copy, out);
    }

    fn radius(&self, eps: f64) -> f64 {
        eps
    }

    fn elem_bytes(&self) -> usize {
        std::mem::size_of::<UMat64>() + self.dim * self.dim * 16
    }
}

fn check_input(u: &UMat64, dim: usize) -> Result<()> {
    if u.dim() != dim {
        return Err(Error::DimMismatch { expected: dim, found: u.dim() });
    }
    if u.data().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Validation("matrix has non-finite entries".into()));
    }
    let r = u.unitarity_residual();
    if !(r <= crate::config::TOLERANCES.input_residual) {
        return Err(Error::Validation(format!("matrix is not unitary (residual {r:.3e})")));
    }
    Ok(())
}

/// A gate set translated into a search space.
#[derive(Debug, Clone)]
pub struct Alphabet<E> {
    pub letters: Vec<E>,
    pub inverse: Vec<usize>,
    pub suffixes: Vec<E>,
}

impl<E> Alphabet<E> {
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

pub fn alphabet<S: SearchSpace>(space: &S, gs: &GateSet) -> Result<Alphabet<S::Elem>> {
    if gs.dim() != space.dim() {
        return Err(Error::DimMismatch { expected: space.dim(), found: gs.dim() });
    }
    Ok(Alphabet {
        letters: gs.basis().iter().map(|e| space.from_matrix(&e.matrix)).collect::<Result<_>>()?,
        inverse: (0..gs.len()).map(|i| gs.inverse_of(i)).collect(),
        suffixes: gs.suffixes().iter().map(|e| space.from_matrix(&e.matrix)).collect::<Result<_>>()?,
    })
}
