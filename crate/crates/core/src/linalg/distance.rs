//! Distances on unitaries modulo global phase.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::umat::UMat;
use crate::scalar::Real;

fn check_dims<T: Real>(u: &UMat<T>, v: &UMat<T>) -> Result<()> {
    if u.dim() != v.dim() {
        return Err(Error::DimMismatch { expected: u.dim(), found: v.dim() });
    }
    Ok(())
}

/// `‖U - e^{iφ} V‖_F / sqrt(2d)` for a fixed phase.
fn aligned_distance<T: Real>(u: &UMat<T>, v: &UMat<T>, phase: Complex<T>) -> T {
    let d = T::from_usize(u.dim()).unwrap_or_else(T::one);
    let sq: T = u.data().iter().zip(v.data()).map(|(a, b)| (*a - phase * *b).norm_sqr()).sum();
    (sq / (T::lit(2.0) * d)).sqrt()
}

/// Phase-invariant distance `sqrt(1 - |tr(U V^†)| / d)`.
///
/// Evaluated as the Frobenius distance after aligning the global phase, which
/// equals the trace formula exactly but keeps full relative accuracy when the
/// two matrices are close.
pub fn dist_phase_invariant<T: Real>(u: &UMat<T>, v: &UMat<T>) -> Result<T> {
    check_dims(u, v)?;
    let t = u.inner(v);
    let phase =
        if t.norm() > T::zero() { t / Complex::new(t.norm(), T::zero()) } else { Complex::new(T::one(), T::zero()) };
    Ok(aligned_distance(u, v, phase))
}

/// Distance used by the SU(d) embedding: the minimum over d-th roots of unity
/// `ω^j` of `sqrt(1 - Re(ω^j tr(U V^†)) / d)`.
pub fn dist_su_d<T: Real>(u: &UMat<T>, v: &UMat<T>) -> Result<T> {
    check_dims(u, v)?;
    let d = u.dim();
    let t = u.inner(v);
    let two_pi = T::lit(2.0) * T::PI();
    let df = T::from_usize(d).unwrap_or_else(T::one);
    // ‖ω^j U - V‖² = 2d - 2 Re(ω^j t): pick the root with the largest real part.
    let best = (0..d)
        .map(|j| {
            let w = Complex::from_polar(T::one(), two_pi * T::from_usize(j).unwrap() / df);
            ((w * t).re, j)
        })
        .fold((T::neg_infinity(), 0), |acc, x| if x.0 > acc.0 { x } else { acc })
        .1;
    let w = Complex::from_polar(T::one(), two_pi * T::from_usize(best).unwrap() / df);
    // ‖ω U - V‖ = ‖U - ω̄ V‖
    Ok(aligned_distance(u, v, w.conj()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::haar::{haar_random, haar_random_with};
    use crate::linalg::umat::paulis;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn vx() -> UMat<f64> {
        let [i, x, _, _] = paulis::<f64>();
        let s = 1.0 / 5f64.sqrt();
        let data = i.data().iter().zip(x.data()).map(|(a, b)| (*a + Complex::new(0.0, 2.0) * *b) * s).collect();
        UMat::from_raw(2, data).unwrap()
    }

    #[test]
    fn phase_invariant_examples() {
        let i = UMat::<f64>::identity(2);
        assert_eq!(dist_phase_invariant(&i, &i).unwrap(), 0.0);
        // tr(V_x) = 2/sqrt(5)
        let expected = (1.0 - 1.0 / 5f64.sqrt()).sqrt();
        assert!((dist_phase_invariant(&vx(), &i).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.743_50).abs() < 5e-6);
        assert!(matches!(dist_phase_invariant(&i, &UMat::identity(4)), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn phase_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [2, 4] {
            for _ in 0..50 {
                let u = haar_random_with::<f64, _>(d, &mut rng);
                let theta: f64 = rng.random_range(0.0..6.3);
                let v = u.scale(Complex::from_polar(1.0, theta));
                assert!(dist_phase_invariant(&u, &v).unwrap() < 1e-7);
            }
        }
    }

    #[test]
    fn su_d_examples() {
        let i = UMat::<f64>::identity(4);
        assert_eq!(dist_su_d(&i, &i).unwrap(), 0.0);
        for seed in 0..20 {
            let u = haar_random::<f64>(4, seed);
            let w = Complex::from_polar(1.0, std::f64::consts::PI / 2.0);
            assert!(dist_su_d(&u, &u.scale(w)).unwrap() < 1e-7);
        }
    }

    #[test]
    fn su_d_close_to_phase_invariant_when_small() {
        // Perturb Haar SU(4) elements by small random generators and compare the two norms.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        for _ in 0..1000 {
            let u = haar_random_with::<f64, _>(4, &mut rng);
            let step = haar_random_with::<f64, _>(4, &mut rng);
            // Interpolate toward identity: V = U * exp-ish(small) via a near-identity SU(4).
            let t: f64 = rng.random_range(0.0..0.05);
            let near = near_identity(&step, t);
            let v = &u * &near;
            let a = dist_su_d(&u, &v).unwrap();
            if a > 0.05 {
                continue;
            }
            let b = dist_phase_invariant(&u, &v).unwrap();
            assert!((a - b).abs() <= 2e-3, "{a} vs {b}");
            checked += 1;
        }
        assert!(checked > 500);
    }

    /// `H` Hermitian from `(W + W^†)/2`, then a first-order unitary `(I + i t H)` re-orthonormalized.
    fn near_identity(w: &UMat<f64>, t: f64) -> UMat<f64> {
        let d = w.dim();
        let wa = w.adjoint();
        let mut m = UMat::identity(d);
        for r in 0..d {
            for c in 0..d {
                let h = (w.get(r, c) + wa.get(r, c)) * 0.5;
                let v = m.get(r, c) + Complex::new(0.0, t) * h;
                m.set(r, c, v);
            }
        }
        gram_schmidt(&m).to_special()
    }

    fn gram_schmidt(m: &UMat<f64>) -> UMat<f64> {
        let d = m.dim();
        let mut cols: Vec<Vec<Complex<f64>>> = (0..d).map(|c| (0..d).map(|r| m.get(r, c)).collect()).collect();
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
        let mut out = UMat::zeros(d);
        for c in 0..d {
            for r in 0..d {
                out.set(r, c, cols[c][r]);
            }
        }
        out
    }
}
