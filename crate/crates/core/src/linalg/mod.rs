//! Small dense complex linear algebra, the SU(2) quaternion chart, distances
//! and Euclidean embeddings.

pub mod distance;
pub mod embed;
pub mod haar;
pub mod quat;
pub mod umat;

pub use distance::{dist_phase_invariant, dist_su_d};
pub use embed::{embed, embed_dim, embed_query, phase_copies, write_embedding, EmbedPoint};
pub use haar::{haar_random, haar_random_with};
pub use quat::Quat;
pub use umat::{paulis, UMat};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Quaternion coordinates of a special-unitary 2×2 matrix, sign-canonicalized.
pub fn quat_from_matrix<T: Real>(u: &UMat<T>) -> Result<Quat<T>> {
    Quat::from_matrix(u)
}

pub fn matrix_from_quat<T: Real>(q: &Quat<T>) -> Result<UMat<T>> {
    let n = q.norm();
    if (n - T::one()).abs().as_f64() > crate::config::TOLERANCES.input_residual {
        return Err(Error::Validation(format!("quaternion norm {} is not 1", n.as_f64())));
    }
    Ok(q.to_matrix())
}

/// Principal square root in SU(2): the root whose quaternion has a
/// nonnegative scalar part. Fails for inputs at `-I`.
pub fn sqrt_su2<T: Real>(u: &UMat<T>) -> Result<UMat<T>> {
    if u.dim() != 2 {
        return Err(Error::DimMismatch { expected: 2, found: u.dim() });
    }
    Ok(Quat::from_matrix_signed(u)?.sqrt()?.to_matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;

    #[test]
    fn sqrt_su2_properties() {
        let i = UMat::<f64>::identity(2);
        assert!(sqrt_su2(&i).unwrap().max_abs_diff(&i) < 1e-15);
        let ix = Quat::new_unchecked(0.0, 1.0, 0.0, 0.0).to_matrix();
        let w = sqrt_su2(&ix).unwrap();
        assert!((&w * &w).max_abs_diff(&ix) < 1e-12);
        for seed in 0..100 {
            let u = haar_random::<f64>(2, seed);
            let w = sqrt_su2(&u).unwrap();
            assert!((&w * &w).max_abs_diff(&u) < 1e-10);
            assert!(w.trace().re >= 0.0);
        }
        let minus = i.scale(Complex::new(-1.0, 0.0));
        assert!(matches!(sqrt_su2(&minus), Err(Error::BranchAmbiguity(_))));
        assert!(matrix_from_quat(&Quat::new_unchecked(2.0, 0.0, 0.0, 0.0)).is_err());
    }
}
