use std::ops::{Mul, Neg};

use num_complex::Complex;

use crate::config::TOLERANCES;
use crate::error::{Error, Result};
use crate::linalg::umat::UMat;
use crate::scalar::Real;

/// An SU(2) element `a·I + b·iX + c·iY + d·iZ` stored as a unit 4-vector.
///
/// This is the coordinate system the single-qubit searches work in:
/// composition is a handful of multiplies and the Euclidean geometry of the
/// 4-vectors encodes the phase-invariant distance.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quat<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Real> Quat<T> {
    #[inline]
    pub const fn new_unchecked(a: T, b: T, c: T, d: T) -> Self {
        Self { a, b, c, d }
    }

    /// Builds a quaternion, rescaling onto the unit sphere.
    pub fn new(a: T, b: T, c: T, d: T) -> Result<Self> {
        let q = Self { a, b, c, d };
        let n = q.norm();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::Validation("zero or non-finite quaternion".into()));
        }
        Ok(q.scaled(T::one() / n))
    }

    pub fn identity() -> Self {
        Self::new_unchecked(T::one(), T::zero(), T::zero(), T::zero())
    }

    #[inline]
    pub fn coords(&self) -> [T; 4] {
        [self.a, self.b, self.c, self.d]
    }

    #[inline]
    pub fn dot(&self, o: &Self) -> T {
        self.a * o.a + self.b * o.b + self.c * o.c + self.d * o.d
    }

    #[inline]
    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    #[inline]
    fn scaled(&self, s: T) -> Self {
        Self::new_unchecked(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    /// Renormalizes to unit length; used to stop drift in long products.
    pub fn normalized(&self) -> Self {
        self.scaled(T::one() / self.norm())
    }

    /// Matrix adjoint, i.e. the group inverse.
    #[inline]
    pub fn adjoint(&self) -> Self {
        Self::new_unchecked(self.a, -self.b, -self.c, -self.d)
    }

    /// Flips sign so the first nonzero coefficient in `(a, b, c, d)` order is positive.
    pub fn canonical(&self) -> Self {
        let first = self.coords().into_iter().find(|x| *x != T::zero()).unwrap_or_else(T::one);
        if first < T::zero() {
            -*self
        } else {
            *self
        }
    }

    /// `a I + b iX + c iY + d iZ` as a 2×2 matrix.
    pub fn to_matrix(&self) -> UMat<T> {
        let c = Complex::new;
        UMat::from_raw(2, vec![c(self.a, self.d), c(self.c, self.b), c(-self.c, self.b), c(self.a, -self.d)])
            .expect("2x2 layout")
    }

    /// Inverse of [`Quat::to_matrix`] for special-unitary input, sign-canonicalized.
    pub fn from_matrix(u: &UMat<T>) -> Result<Self> {
        Ok(Self::from_matrix_signed(u)?.canonical())
    }

    /// Like [`Quat::from_matrix`] but keeps the sign, so `to_matrix` reproduces `u`.
    pub fn from_matrix_signed(u: &UMat<T>) -> Result<Self> {
        if u.dim() != 2 {
            return Err(Error::DimMismatch { expected: 2, found: u.dim() });
        }
        let residual = u.unitarity_residual();
        if !(residual.as_f64() <= TOLERANCES.input_residual) {
            return Err(Error::Validation(format!("matrix is not unitary (residual {:.3e})", residual.as_f64())));
        }
        let det = u.det();
        if (det - Complex::new(T::one(), T::zero())).norm().as_f64() > TOLERANCES.input_residual {
            return Err(Error::Validation(format!(
                "matrix is not special unitary (det = {:.6}{:+.6}i)",
                det.re.as_f64(),
                det.im.as_f64()
            )));
        }
        let half = T::lit(0.5);
        let (m00, m01, m10, m11) = (u.get(0, 0), u.get(0, 1), u.get(1, 0), u.get(1, 1));
        let q = Self::new_unchecked(
            (m00.re + m11.re) * half,
            (m01.im + m10.im) * half,
            (m01.re - m10.re) * half,
            (m00.im - m11.im) * half,
        );
        Ok(q.normalized())
    }

    /// Phase-invariant distance `sqrt(1 - |<p, q>|)`, evaluated as `‖p ∓ q‖/√2`
    /// so it stays accurate near zero.
    pub fn distance(&self, o: &Self) -> T {
        let s = if self.dot(o) < T::zero() { -T::one() } else { T::one() };
        let diff = [self.a - s * o.a, self.b - s * o.b, self.c - s * o.c, self.d - s * o.d];
        (diff.iter().map(|x| *x * *x).sum::<T>() * T::lit(0.5)).sqrt()
    }

    /// Principal square root (nonnegative scalar part).
    pub fn sqrt(&self) -> Result<Self> {
        let one_plus = T::one() + self.a;
        // |q + 1|^2 = 2 (1 + a); near zero the rotation axis is undefined.
        if (T::lit(2.0) * one_plus).sqrt().as_f64() <= TOLERANCES.sqrt_branch {
            return Err(Error::BranchAmbiguity("square root of -I has no distinguished branch".into()));
        }
        let s = T::one() / (T::lit(2.0) * one_plus).sqrt();
        Ok(Self::new_unchecked(one_plus * s, self.b * s, self.c * s, self.d * s))
    }

    pub fn cast<U: Real>(&self) -> Quat<U> {
        Quat::new_unchecked(
            U::lit(self.a.as_f64()),
            U::lit(self.b.as_f64()),
            U::lit(self.c.as_f64()),
            U::lit(self.d.as_f64()),
        )
    }
}

impl<T: Real> Mul for Quat<T> {
    type Output = Quat<T>;

    /// Matrix product in the `I, iX, iY, iZ` basis:
    /// `(a1 + i u·σ)(a2 + i v·σ) = a1 a2 - u·v + i (a1 v + a2 u - u × v)·σ`.
    #[inline]
    fn mul(self, o: Quat<T>) -> Quat<T> {
        let (a1, b1, c1, d1) = (self.a, self.b, self.c, self.d);
        let (a2, b2, c2, d2) = (o.a, o.b, o.c, o.d);
        Quat::new_unchecked(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + a2 * b1 - (c1 * d2 - d1 * c2),
            a1 * c2 + a2 * c1 - (d1 * b2 - b1 * d2),
            a1 * d2 + a2 * d1 - (b1 * c2 - c1 * b2),
        )
    }
}

impl<T: Real> Neg for Quat<T> {
    type Output = Quat<T>;

    fn neg(self) -> Quat<T> {
        Quat::new_unchecked(-self.a, -self.b, -self.c, -self.d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::haar::haar_random;
    use crate::linalg::umat::paulis;

    const S5: f64 = 0.447_213_595_499_957_9; // 1/sqrt(5)

    fn vx() -> UMat<f64> {
        let [i, x, _, _] = paulis::<f64>();
        let two_i = Complex::new(0.0, 2.0);
        let data = i.data().iter().zip(x.data()).map(|(a, b)| (*a + two_i * *b) * S5).collect();
        UMat::from_raw(2, data).unwrap()
    }

    #[test]
    fn vx_coordinates() {
        let q = Quat::from_matrix(&vx()).unwrap();
        assert!((q.a - S5).abs() < 1e-15 && (q.b - 2.0 * S5).abs() < 1e-15);
        assert!(q.c.abs() < 1e-15 && q.d.abs() < 1e-15);
    }

    #[test]
    fn identity_and_minus_identity() {
        let i = UMat::<f64>::identity(2);
        assert_eq!(Quat::from_matrix(&i).unwrap(), Quat::identity());
        let mi = i.scale(Complex::new(-1.0, 0.0));
        assert_eq!(Quat::from_matrix(&mi).unwrap(), Quat::identity());
    }

    #[test]
    fn matrix_from_quat_examples() {
        assert_eq!(Quat::<f64>::identity().to_matrix(), UMat::identity(2));
        let vz = Quat::new_unchecked(S5, 0.0, 0.0, 2.0 * S5).to_matrix();
        assert!((vz.get(0, 0) - Complex::new(S5, 2.0 * S5)).norm() < 1e-15);
        assert!((vz.get(1, 1) - Complex::new(S5, -2.0 * S5)).norm() < 1e-15);
        let ix = Quat::new_unchecked(0.0, 1.0, 0.0, 0.0).to_matrix();
        let [_, x, _, _] = paulis::<f64>();
        assert!(ix.max_abs_diff(&x.scale(Complex::new(0.0, 1.0))) < 1e-15);
    }

    #[test]
    fn rejects_non_unitary_and_non_special() {
        let bad = UMat::from_raw(
            2,
            vec![Complex::new(1.0, 0.0), Complex::new(1.0, 0.0), Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)],
        )
        .unwrap();
        assert!(matches!(Quat::from_matrix(&bad), Err(Error::Validation(_))));
        let [_, x, _, _] = paulis::<f64>();
        assert!(Quat::from_matrix(&x).is_err());
    }

    #[test]
    fn product_matches_matrices() {
        for seed in 0..50 {
            let u = haar_random::<f64>(2, seed);
            let v = haar_random::<f64>(2, seed + 1000);
            let (p, q) = (Quat::from_matrix(&u).unwrap(), Quat::from_matrix(&v).unwrap());
            let via_quat = (p * q).to_matrix();
            let direct = &p.to_matrix() * &q.to_matrix();
            assert!(via_quat.max_abs_diff(&direct) < 1e-14);
            let from_prod = Quat::from_matrix(&(&u * &v)).unwrap();
            assert!((p * q).distance(&from_prod) < 1e-7);
        }
    }

    #[test]
    fn round_trip() {
        for seed in 0..50 {
            let u = haar_random::<f64>(2, seed);
            let q = Quat::from_matrix(&u).unwrap();
            assert!((q.norm() - 1.0).abs() < 1e-12);
            let back = Quat::from_matrix(&q.to_matrix()).unwrap();
            for (x, y) in q.coords().iter().zip(back.coords()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sqrt_examples() {
        assert_eq!(Quat::<f64>::identity().sqrt().unwrap(), Quat::identity());
        let ix = Quat::new_unchecked(0.0, 1.0, 0.0, 0.0);
        let w = ix.sqrt().unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((w.a - h).abs() < 1e-15 && (w.b - h).abs() < 1e-15);
        assert!((w * w).distance(&ix) < 1e-12);
        let minus = Quat::new_unchecked(-1.0, 0.0, 0.0, 0.0);
        assert!(matches!(minus.sqrt(), Err(Error::BranchAmbiguity(_))));
    }
}
