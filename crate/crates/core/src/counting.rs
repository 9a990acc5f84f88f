//! Word counts and V-count lower bounds.

use std::collections::HashSet;
use std::str::FromStr;

use num_bigint::BigUint;
use rayon::prelude::*;

use crate::ccsearch::{assemble_cc, step_allowed};
use crate::error::{Error, Result};
use crate::gateset::CcStep;
use crate::UMat64;

/// Reduced words of length `n` over the single-qubit V basis: `6 · 5^(n-1)`.
pub fn su2_word_count(n: usize) -> BigUint {
    if n == 0 {
        return BigUint::from(1u32);
    }
    BigUint::from(6u32) * BigUint::from(5u32).pow(n as u32 - 1)
}

/// Transfer matrix over the class of the last step (`i1 = i2` or not).
pub const TRANSFER_MATRIX: [[u32; 2]; 2] = [[5, 4], [6, 5]];

/// Class counts for sequences of length one.
pub const TRANSFER_V0: [u32; 2] = [6, 6];

/// Longest length accepted by [`count_adopted`].
pub const MAX_COUNT_LEN: usize = 40;

/// Longest length accepted by [`enumerate_adopted`].
pub const MAX_ENUMERATE_LEN: usize = 5;

pub(crate) fn transfer_count(n: usize) -> BigUint {
    if n == 0 {
        return BigUint::from(1u32);
    }
    let [a, b] = TRANSFER_V0.map(BigUint::from);
    let (mut same, mut mixed) = (a, b);
    let m = TRANSFER_MATRIX;
    for _ in 1..n {
        let s = &same * m[0][0] + &mixed * m[0][1];
        let x = &same * m[1][0] + &mixed * m[1][1];
        (same, mixed) = (s, x);
    }
    same + mixed
}

/// Number of adopted (canonical) controlled-V step sequences of length `n`.
pub fn count_adopted(n: usize) -> Result<BigUint> {
    if !(1..=MAX_COUNT_LEN).contains(&n) {
        return Err(Error::Validation(format!("length must be in 1..={MAX_COUNT_LEN}, got {n}")));
    }
    Ok(transfer_count(n))
}

/// Growth rate `φ = 5 + 2√6` of [`count_adopted`].
pub fn cc_growth_rate() -> f64 {
    5.0 + 2.0 * 6f64.sqrt()
}

/// `√1.5 (φⁿ − ψⁿ)` with `φ, ψ = 5 ± 2√6`.
pub fn closed_form_bound(n: usize) -> f64 {
    let phi = cc_growth_rate();
    let psi = 5.0 - 2.0 * 6f64.sqrt();
    1.5f64.sqrt() * (phi.powi(n as i32) - psi.powi(n as i32))
}

/// Enumerates all `12ⁿ` step sequences and keeps the adopted ones.
///
/// A sequence is dropped if it has an adjacent inverse pair, or an adjacent
/// commuting pair whose first step has `i1 ≠ i2` and second `i1 = i2`.
/// Both relations are decided on the 4×4 matrices. Returns the adopted
/// count and the number of distinct products up to global phase.
pub fn enumerate_adopted(n: usize) -> Result<(u64, usize)> {
    if n > MAX_ENUMERATE_LEN {
        return Err(Error::Validation(format!("enumeration supports n <= {MAX_ENUMERATE_LEN}, got {n}")));
    }
    if n == 0 {
        return Ok((1, 1));
    }
    let mats: Vec<UMat64> = CcStep::all().map(|s| assemble_cc(&[s])).collect();
    let id = UMat64::identity(4);
    let mut table = [[false; CcStep::COUNT]; CcStep::COUNT];
    for (p, a) in CcStep::all().zip(&mats) {
        for (q, b) in CcStep::all().zip(&mats) {
            let ab = a * b;
            let inverse = ab.max_abs_diff(&id) < 1e-12;
            let commute = ab.max_abs_diff(&(b * a)) < crate::config::TOLERANCES.commutator;
            table[p.index()][q.index()] = !inverse && !(commute && p.i1 != p.i2 && q.i1 == q.i2);
        }
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        n: usize,
        last: usize,
        acc: &UMat64,
        mats: &[UMat64],
        table: &[[bool; CcStep::COUNT]; CcStep::COUNT],
        count: &mut u64,
        seen: &mut HashSet<Vec<i64>>,
    ) {
        if n == 0 {
            *count += 1;
            seen.insert(phase_key(acc));
            return;
        }
        for q in (0..CcStep::COUNT).filter(|&q| table[last][q]) {
            rec(n - 1, q, &(acc * &mats[q]), mats, table, count, seen);
        }
    }
    let parts: Vec<(u64, HashSet<Vec<i64>>)> = (0..CcStep::COUNT)
        .into_par_iter()
        .map(|first| {
            let (mut count, mut seen) = (0, HashSet::new());
            rec(n - 1, first, &mats[first], &mats, &table, &mut count, &mut seen);
            (count, seen)
        })
        .collect();
    let count = parts.iter().map(|p| p.0).sum();
    let distinct: HashSet<Vec<i64>> = parts.into_iter().flat_map(|p| p.1).collect();
    Ok((count, distinct.len()))
}

/// Number of distinct products `C(s_1) ⋯ C(s_n)` up to global phase over
/// sequences without adjacent inverses; `canonical_only` additionally
/// applies [`step_allowed`].
pub fn distinct_cc_products(n: usize, canonical_only: bool) -> usize {
    let mut seen = HashSet::new();
    let mut path = Vec::with_capacity(n);
    fn rec(n: usize, canonical_only: bool, path: &mut Vec<CcStep>, seen: &mut HashSet<Vec<i64>>) {
        if path.len() == n {
            seen.insert(phase_key(&assemble_cc(path)));
            return;
        }
        for s in CcStep::all() {
            if path.last().is_some_and(|&p| if canonical_only { !step_allowed(p, s) } else { p.inverse() == s }) {
                continue;
            }
            path.push(s);
            rec(n, canonical_only, path, seen);
            path.pop();
        }
    }
    rec(n, canonical_only, &mut path, &mut seen);
    seen.len()
}

/// Rounded entries after rotating the largest entry onto the positive real axis.
fn phase_key(m: &UMat64) -> Vec<i64> {
    let pivot = m.data().iter().copied().fold(num_complex::Complex::new(0.0, 0.0), |a, z| {
        if z.norm() > a.norm() + 1e-9 {
            z
        } else {
            a
        }
    });
    let rot = pivot.conj() / pivot.norm();
    m.data()
        .iter()
        .flat_map(|z| {
            let w = *z * rot;
            [(w.re * 1e8).round() as i64, (w.im * 1e8).round() as i64]
        })
        .collect()
}

/// Lower-bound models for the average V-count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// `3 log_5(1/ε)`, single qubit.
    Su2V,
    /// `(4ⁿ − 1) log_{2·4ⁿ − 3}(1/ε)` on `n` qubits.
    SunV(u32),
    /// `3 log_φ(1/ε)` for conditionally controlled gates.
    CcPhi,
}

impl FromStr for Model {
    type Err = Error;

    /// Accepts `su2_v`, `cc_phi`, and `sun_v(n)` or `sun_v:n`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t {
            "su2_v" => return Ok(Model::Su2V),
            "cc_phi" => return Ok(Model::CcPhi),
            _ => {}
        }
        let arg = t
            .strip_prefix("sun_v(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| t.strip_prefix("sun_v:"))
            .ok_or_else(|| Error::Parse(format!("unknown model {s:?}")))?;
        let n: u32 = arg.parse().map_err(|_| Error::Parse(format!("bad qubit count in {s:?}")))?;
        if !(1..=15).contains(&n) {
            return Err(Error::Validation(format!("qubit count must be in 1..=15, got {n}")));
        }
        Ok(Model::SunV(n))
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Model::Su2V => f.write_str("su2_v"),
            Model::SunV(n) => write!(f, "sun_v({n})"),
            Model::CcPhi => f.write_str("cc_phi"),
        }
    }
}

/// Volume lower bound on the V-count for `model` at accuracy `eps ∈ (0, 1]`.
pub fn vcount_lower_bound(model: Model, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Validation(format!("epsilon must be in (0, 1], got {eps}")));
    }
    let l = (1.0 / eps).ln();
    Ok(match model {
        Model::Su2V => 3.0 * l / 5f64.ln(),
        Model::SunV(n) => {
            let q = 4f64.powi(n as i32);
            (q - 1.0) * l / (2.0 * q - 3.0).ln()
        }
        Model::CcPhi => 3.0 * l / cc_growth_rate().ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        let got: Vec<u64> = (1..5).map(|n| count_adopted(n).unwrap().try_into().unwrap()).collect();
        assert_eq!(got, [12, 120, 1188, 11760]);
        assert_eq!(su2_word_count(3), BigUint::from(150u32));
        assert!(count_adopted(0).is_err() && count_adopted(41).is_err());
    }

    #[test]
    fn recurrence_and_closed_form() {
        for n in 2..30 {
            assert_eq!(transfer_count(n + 1) + transfer_count(n - 1), transfer_count(n) * 10u32);
        }
        for n in 1..15 {
            let exact: f64 = transfer_count(n).to_string().parse().unwrap();
            assert!((closed_form_bound(n) - exact).abs() / exact < 1e-12);
        }
        assert!(count_adopted(40).unwrap().bits() > 128);
    }

    #[test]
    fn enumeration_matches_transfer_matrix() {
        for n in 1..=4 {
            let (count, distinct) = enumerate_adopted(n).unwrap();
            assert_eq!(BigUint::from(count), transfer_count(n), "n = {n}");
            assert!(distinct as u64 <= count);
        }
        assert!(enumerate_adopted(6).is_err());
    }

    #[test]
    fn bounds() {
        let su2 = vcount_lower_bound(Model::Su2V, 1e-3).unwrap();
        assert!((su2 - 9.0 / 5f64.log10()).abs() < 1e-9);
        let one = vcount_lower_bound(Model::SunV(1), 0.01).unwrap();
        assert!((one - vcount_lower_bound(Model::Su2V, 0.01).unwrap()).abs() < 1e-12);
        assert_eq!(vcount_lower_bound(Model::CcPhi, 1.0).unwrap(), 0.0);
        assert!(vcount_lower_bound(Model::CcPhi, 0.0).is_err());
    }

    #[test]
    fn model_parsing() {
        for m in [Model::Su2V, Model::SunV(2), Model::CcPhi] {
            assert_eq!(m.to_string().parse::<Model>().unwrap(), m);
        }
        assert_eq!("sun_v:3".parse::<Model>().unwrap(), Model::SunV(3));
        assert!("foo".parse::<Model>().is_err());
    }
}
