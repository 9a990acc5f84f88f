//! Haar-random special-unitary matrices.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::umat::UMat;
use crate::scalar::Real;

/// Haar-distributed element of SU(d), deterministic in `seed`.
pub fn haar_random<T: Real>(d: usize, seed: u64) -> UMat<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_random_with(d, &mut rng)
}

/// Haar-distributed element of SU(d) drawn from `rng`.
///
/// QR of a complex Ginibre matrix with the phases of `R`'s diagonal absorbed
/// into `Q` (Mezzadri's recipe), then the determinant phase divided out.
pub fn haar_random_with<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> UMat<T> {
    assert!(d >= 2, "Haar sampling needs d >= 2");
    let mut cols: Vec<Vec<Complex<f64>>> = (0..d)
        .map(|_| {
            (0..d)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex::new(re, im)
                })
                .collect()
        })
        .collect();
    // Modified Gram-Schmidt leaves R with a positive real diagonal, which is
    // exactly the phase convention that makes Q Haar distributed.
    for c in 0..d {
        for p in 0..c {
            let proj: Complex<f64> = (0..d).map(|r| cols[p][r].conj() * cols[c][r]).sum();
            for r in 0..d {
                let v = cols[p][r];
                cols[c][r] -= proj * v;
            }
        }
        let n = cols[c].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols[c].iter_mut().for_each(|z| *z /= n);
    }
    let mut q = UMat::<f64>::zeros(d);
    for (c, col) in cols.iter().enumerate() {
        for (r, z) in col.iter().enumerate() {
            q.set(r, c, *z);
        }
    }
    q.to_special().cast()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn special_unitary_and_deterministic() {
        for d in [2, 3, 4, 8] {
            let u = haar_random::<f64>(d, 42);
            assert!(u.unitarity_residual() < 1e-10);
            assert!((u.det() - Complex::new(1.0, 0.0)).norm() < 1e-10);
            assert_eq!(u, haar_random::<f64>(d, 42));
        }
        assert_ne!(haar_random::<f64>(2, 1), haar_random::<f64>(2, 2));
    }

    #[test]
    fn f32_variant() {
        let u = haar_random::<f32>(2, 5);
        assert!(u.unitarity_residual() < 1e-5);
    }

    #[test]
    fn second_moment() {
        // E|tr U|^2 = 1 over U(d); dividing by d gives 1/d. The SU(d) phase fix
        // only changes this for d = 2 (where it stays 1 as well).
        for d in [2usize, 4] {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            let n = 100_000;
            let samples: Vec<f64> =
                (0..n).map(|_| haar_random_with::<f64, _>(d, &mut rng).trace().norm_sqr() / d as f64).collect();
            let mean = samples.iter().sum::<f64>() / n as f64;
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let sigma = (var / n as f64).sqrt();
            assert!((mean - 1.0 / d as f64).abs() <= 3.0 * sigma, "d={d} mean={mean} sigma={sigma}");
        }
    }
}
