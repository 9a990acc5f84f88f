use std::fmt;
use std::ops::Mul;

use num_complex::Complex;

use crate::config::TOLERANCES;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense square complex matrix, row-major.
///
/// Constructors that take external data validate unitarity; arithmetic
/// results are trusted to stay unitary up to rounding.
#[derive(Clone, PartialEq)]
pub struct UMat<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> UMat<T> {
    /// Wraps raw entries after checking the unitarity residual.
    pub fn new(dim: usize, data: Vec<Complex<T>>) -> Result<Self> {
        let m = Self::from_raw(dim, data)?;
        let residual = m.unitarity_residual().as_f64();
        if !(residual <= TOLERANCES.input_residual) {
            return Err(Error::Validation(format!("matrix is not unitary (residual {residual:.3e})")));
        }
        Ok(m)
    }

    /// Wraps raw entries without any unitarity check.
    pub fn from_raw(dim: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::Validation(format!(
                "expected {} entries for dimension {dim}, found {}",
                dim * dim,
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![Complex::new(T::zero(), T::zero()); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex::new(T::one(), T::zero());
        }
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Complex::new(T::zero(), T::zero()); dim * dim] }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex<T>) {
        self.data[row * self.dim + col] = value;
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for r in 0..d {
            for c in 0..d {
                out.data[c * d + r] = self.data[r * d + c].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| *z * factor).collect() }
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimMismatch { expected: self.dim, found: rhs.dim });
        }
        Ok(self.mul_unchecked(rhs))
    }

    fn mul_unchecked(&self, rhs: &Self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for r in 0..d {
            for k in 0..d {
                let a = self.data[r * d + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for c in 0..d {
                    out.data[r * d + c] += a * rhs.data[k * d + c];
                }
            }
        }
        out
    }

    /// `tr(self · other^†)` without forming the product.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.data.iter().zip(&other.data).map(|(a, b)| *a * b.conj()).sum()
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let (a, b) = (self.dim, rhs.dim);
        let d = a * b;
        let mut out = Self::zeros(d);
        for r1 in 0..a {
            for c1 in 0..a {
                let x = self.data[r1 * a + c1];
                for r2 in 0..b {
                    for c2 in 0..b {
                        out.data[(r1 * b + r2) * d + c1 * b + c2] = x * rhs.data[r2 * b + c2];
                    }
                }
            }
        }
        out
    }

    /// Block-diagonal matrix `blocks[0] ⊕ blocks[1] ⊕ …`.
    pub fn direct_sum(blocks: &[Self]) -> Self {
        let d: usize = blocks.iter().map(|b| b.dim).sum();
        let mut out = Self::zeros(d);
        let mut offset = 0;
        for b in blocks {
            for r in 0..b.dim {
                for c in 0..b.dim {
                    out.data[(offset + r) * d + offset + c] = b.data[r * b.dim + c];
                }
            }
            offset += b.dim;
        }
        out
    }

    /// Square diagonal block `index` of size `size`.
    pub fn block(&self, index: usize, size: usize) -> Self {
        let mut out = Self::zeros(size);
        let o = index * size;
        for r in 0..size {
            for c in 0..size {
                out.data[r * size + c] = self.data[(o + r) * self.dim + o + c];
            }
        }
        out
    }

    /// Largest absolute entry outside the diagonal `size`-blocks.
    pub fn off_block_norm(&self, size: usize) -> T {
        let mut worst = T::zero();
        for r in 0..self.dim {
            for c in 0..self.dim {
                if r / size != c / size {
                    worst = worst.max(self.data[r * self.dim + c].norm());
                }
            }
        }
        worst
    }

    /// Largest entrywise deviation of `U U^†` from the identity.
    pub fn unitarity_residual(&self) -> T {
        let d = self.dim;
        let mut worst = T::zero();
        for r in 0..d {
            for c in 0..d {
                let mut acc = Complex::new(T::zero(), T::zero());
                for k in 0..d {
                    acc += self.data[r * d + k] * self.data[c * d + k].conj();
                }
                if r == c {
                    acc -= Complex::new(T::one(), T::zero());
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    /// Determinant via LU decomposition with partial pivoting.
    pub fn det(&self) -> Complex<T> {
        let d = self.dim;
        let mut a = self.data.clone();
        let mut det = Complex::new(T::one(), T::zero());
        for col in 0..d {
            let pivot = (col..d)
                .max_by(|&i, &j| {
                    a[i * d + col].norm().partial_cmp(&a[j * d + col].norm()).unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(col);
            if a[pivot * d + col].norm() == T::zero() {
                return Complex::new(T::zero(), T::zero());
            }
            if pivot != col {
                for k in 0..d {
                    a.swap(pivot * d + k, col * d + k);
                }
                det = -det;
            }
            let p = a[col * d + col];
            det *= p;
            for r in col + 1..d {
                let f = a[r * d + col] / p;
                for k in col..d {
                    let v = a[col * d + k];
                    a[r * d + k] -= f * v;
                }
            }
        }
        det
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_residual().as_f64() <= TOLERANCES.unitarity
    }

    pub fn is_special_unitary(&self) -> bool {
        self.is_unitary() && (self.det() - Complex::new(T::one(), T::zero())).norm().as_f64() <= TOLERANCES.determinant
    }

    /// Multiplies by the phase `det^{-1/d}` (principal root) so the result has unit determinant.
    pub fn to_special(&self) -> Self {
        let det = self.det();
        let d = T::from_usize(self.dim).unwrap_or_else(T::one);
        let phase = Complex::from_polar(T::one(), -det.arg() / d);
        self.scale(phase)
    }

    /// Frobenius norm of `self - other`.
    pub fn frobenius_distance(&self, other: &Self) -> T {
        self.data.iter().zip(&other.data).map(|(a, b)| (*a - *b).norm_sqr()).sum::<T>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data.iter().zip(&other.data).map(|(a, b)| (*a - *b).norm()).fold(T::zero(), T::max)
    }

    /// Converts the scalar type, e.g. `UMat<f64>` to `UMat<f32>`.
    pub fn cast<U: Real>(&self) -> UMat<U> {
        UMat {
            dim: self.dim,
            data: self.data.iter().map(|z| Complex::new(U::lit(z.re.as_f64()), U::lit(z.im.as_f64()))).collect(),
        }
    }
}

impl<T: Real> Mul for &UMat<T> {
    type Output = UMat<T>;

    /// Panics on dimension mismatch; use [`UMat::try_mul`] for a fallible product.
    fn mul(self, rhs: &UMat<T>) -> UMat<T> {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        self.mul_unchecked(rhs)
    }
}

impl<T: Real> Mul for UMat<T> {
    type Output = UMat<T>;

    fn mul(self, rhs: UMat<T>) -> UMat<T> {
        &self * &rhs
    }
}

impl<T: Real> fmt::Debug for UMat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "UMat({}x{})", self.dim, self.dim)?;
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|c| {
                    let z = self.get(r, c);
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Single-qubit Pauli matrices `[I, X, Y, Z]`.
pub fn paulis<T: Real>() -> [UMat<T>; 4] {
    let o = T::zero();
    let l = T::one();
    let c = |re, im| Complex::new(re, im);
    [
        UMat::identity(2),
        UMat { dim: 2, data: vec![c(o, o), c(l, o), c(l, o), c(o, o)] },
        UMat { dim: 2, data: vec![c(o, o), c(o, -l), c(o, l), c(o, o)] },
        UMat { dim: 2, data: vec![c(l, o), c(o, o), c(o, o), c(-l, o)] },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_algebra() {
        let [_, x, y, z] = paulis::<f64>();
        let xy = &x * &y;
        let iz = z.scale(Complex::new(0.0, 1.0));
        assert!(xy.max_abs_diff(&iz) < 1e-15);
        assert!((x.det() + Complex::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn det_of_kron_and_sum() {
        let [_, x, y, _] = paulis::<f64>();
        let k = x.kron(&y);
        assert!((k.det() - Complex::new(1.0, 0.0)).norm() < 1e-14);
        let s = UMat::direct_sum(&[x.clone(), y.clone()]);
        assert!((s.det() - x.det() * y.det()).norm() < 1e-14);
        assert_eq!(s.block(1, 2), y);
        assert_eq!(s.off_block_norm(2), 0.0);
    }

    #[test]
    fn rejects_non_unitary() {
        let data = vec![Complex::new(2.0, 0.0), Complex::new(0.0, 0.0), Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)];
        assert!(matches!(UMat::new(2, data), Err(Error::Validation(_))));
        assert!(UMat::<f64>::from_raw(2, vec![]).is_err());
    }

    #[test]
    fn to_special_fixes_phase() {
        let [_, x, _, _] = paulis::<f64>();
        let s = x.to_special();
        assert!(s.is_special_unitary());
    }
}
