//! Euclidean embeddings of SU(d) used by the nearest-neighbour index.

use num_complex::Complex;

use crate::linalg::quat::Quat;
use crate::linalg::umat::UMat;
use crate::scalar::Real;

/// A point in the embedding space together with the element it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbedPoint<T> {
    pub coords: Vec<T>,
    pub owner_id: usize,
}

/// Embedding dimension for SU(d): 4 for the quaternion chart, `2d²` otherwise.
pub fn embed_dim(d: usize) -> usize {
    if d == 2 {
        4
    } else {
        2 * d * d
    }
}

/// Number of stored phase copies per element.
pub fn phase_copies(d: usize) -> usize {
    d
}

/// Writes phase copy `copy` of `u` into `out`.
///
/// For `d = 2` the copies are `±(a, b, c, d)`; for `d > 2` copy `j` is the
/// flattened real/imaginary entries of `e^{2πij/d} U / sqrt(2d)`.
pub fn write_embedding<T: Real>(u: &UMat<T>, copy: usize, out: &mut [T]) {
    let d = u.dim();
    if d == 2 {
        let q = quat_unnormalized(u);
        let s = if copy == 0 { T::one() } else { -T::one() };
        for (o, x) in out.iter_mut().zip(q.coords()) {
            *o = s * x;
        }
        return;
    }
    let df = T::from_usize(d).unwrap();
    let angle = T::lit(2.0) * T::PI() * T::from_usize(copy).unwrap() / df;
    let w = Complex::from_polar(T::one() / (T::lit(2.0) * df).sqrt(), angle);
    for (k, z) in u.data().iter().enumerate() {
        let v = *z * w;
        out[2 * k] = v.re;
        out[2 * k + 1] = v.im;
    }
}

/// Quaternion coordinates without validation or sign canonicalization.
fn quat_unnormalized<T: Real>(u: &UMat<T>) -> Quat<T> {
    let half = T::lit(0.5);
    let (m00, m01, m10, m11) = (u.get(0, 0), u.get(0, 1), u.get(1, 0), u.get(1, 1));
    Quat::new_unchecked(
        (m00.re + m11.re) * half,
        (m01.im + m10.im) * half,
        (m01.re - m10.re) * half,
        (m00.im - m11.im) * half,
    )
}

/// All phase copies of `u` as embedding points owned by `owner_id`.
pub fn embed<T: Real>(u: &UMat<T>, owner_id: usize) -> Vec<EmbedPoint<T>> {
    let m = embed_dim(u.dim());
    (0..phase_copies(u.dim()))
        .map(|j| {
            let mut coords = vec![T::zero(); m];
            write_embedding(u, j, &mut coords);
            EmbedPoint { coords, owner_id }
        })
        .collect()
}

/// The copy used for queries (`j = 0`).
pub fn embed_query<T: Real>(u: &UMat<T>) -> EmbedPoint<T> {
    let mut coords = vec![T::zero(); embed_dim(u.dim())];
    write_embedding(u, 0, &mut coords);
    EmbedPoint { coords, owner_id: usize::MAX }
}

pub fn euclidean<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| (*x - *y) * (*x - *y)).sum::<T>().sqrt()
}
