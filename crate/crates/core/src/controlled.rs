//! Controlled and generalized controlled gates.
//!
//! A generalized controlled gate on `n` qubits is `A_0 ⊕ A_1 ⊕ … ⊕ A_{N-1}`
//! with `N = 2^{n-1}` SU(2) blocks: the first `n - 1` qubits select the
//! block applied to the last one. It is written as
//!
//! ```text
//! G = (I ⊗ R) · F_K ⋯ F_1,     F_k = C(P_k, Q_k, i_k)
//! ```
//!
//! where `C(P, Q, i)` applies `P` to the target when the parity
//! `c ⋆ i` of the control value `c` is 0 and `Q` otherwise. Every nonzero
//! index `i` appears once. Each factor is fixed only through `P^† Q`; `P` is
//! whatever the factor synthesis returns, and later targets are computed
//! from it. The residual `R` absorbs the rest.
//!
//! The plan peels off one control bit at a time. With `c = (t, r)` split at
//! the top bit, factors whose index has the top bit set must satisfy
//! `H_{0,r}^† H_{1,r} = G_{0,r}^† G_{1,r}` for every `r`. That problem splits
//! in halves again: if `β_0, β_1` are the conditions of a pair `r = (0, r')`,
//! `(1, r')`, then `ã = √(β_0 β_1^†)` and the lower half must satisfy
//! `γ = ã^† β_0` while the upper half must satisfy `B_0 ã B_0^†`, where
//! `B_0` is the lower half's block. Any square root works.

use std::time::{Duration, Instant};

use crate::ccsearch::{CcSearcher, CcWord};
use crate::circuit::{CircuitTemplate, Gate};
use crate::config::TOLERANCES;
use crate::error::{Error, Result};
use crate::gateset::{vbasis, GateSet};
use crate::linalg::{dist_phase_invariant, Quat, UMat};
use crate::mitm::{check_epsilon, Limits, MitmSearcher, Word};
use crate::{Quat64, UMat64};

/// Largest qubit count without opting in.
pub const MAX_QUBITS: usize = 3;

/// Largest qubit count with [`GeneralizedControlled::new_with`].
pub const MAX_QUBITS_LARGE: usize = 4;

/// Parity of `popcount(i & j)`.
pub fn star(i: u64, j: u64) -> u8 {
    ((i & j).count_ones() & 1) as u8
}

/// `{y : 2^{n-1} ≤ y < 2^n, y ⋆ j = x}`, in increasing order.
pub fn controlled_index_set(n: u32, j: u64, x: u8) -> Result<Vec<u64>> {
    if n == 0 || n > 63 {
        return Err(Error::Validation(format!("n must be in 1..=63, got {n}")));
    }
    if j >= 1 << n || x > 1 {
        return Err(Error::Validation(format!("need j < 2^{n} and x in {{0, 1}}, got j = {j}, x = {x}")));
    }
    Ok(((1u64 << (n - 1))..(1u64 << n)).filter(|&y| star(y, j) == x).collect())
}

/// Direct sum of SU(2) blocks on `n` qubits.
#[derive(Debug, Clone)]
pub struct GeneralizedControlled {
    n: usize,
    blocks: Vec<UMat64>,
    normalized: bool,
}

impl GeneralizedControlled {
    /// Accepts 2 or 4 blocks (`n = 2, 3`).
    pub fn new(blocks: Vec<UMat64>) -> Result<Self> {
        Self::new_with(blocks, false)
    }

    /// As [`new`](Self::new); `allow_large` also admits 8 blocks (`n = 4`).
    pub fn new_with(blocks: Vec<UMat64>, allow_large: bool) -> Result<Self> {
        let k = blocks.len();
        if k < 2 || !k.is_power_of_two() {
            return Err(Error::Validation(format!("need a power of two (at least 2) of blocks, got {k}")));
        }
        let n = k.trailing_zeros() as usize + 1;
        let cap = if allow_large { MAX_QUBITS_LARGE } else { MAX_QUBITS };
        if n > MAX_QUBITS_LARGE {
            return Err(Error::Unsupported(format!("{n}-qubit generalized controlled gates")));
        }
        if n > cap {
            return Err(Error::Unsupported(format!("{n} qubits needs the large-size opt-in")));
        }
        let mut normalized = false;
        let mut out = Vec::with_capacity(k);
        for (idx, b) in blocks.into_iter().enumerate() {
            if b.dim() != 2 {
                return Err(Error::DimMismatch { expected: 2, found: b.dim() });
            }
            let r = b.unitarity_residual();
            if !(r <= TOLERANCES.input_residual) {
                return Err(Error::Validation(format!("block {idx} is not unitary (residual {r:.3e})")));
            }
            if b.is_special_unitary() {
                out.push(b);
            } else {
                normalized = true;
                out.push(b.to_special());
            }
        }
        Ok(Self { n, blocks: out, normalized })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[UMat64] {
        &self.blocks
    }

    /// Whether some block was rescaled to unit determinant.
    pub fn normalized(&self) -> bool {
        self.normalized
    }

    pub fn matrix(&self) -> UMat64 {
        UMat::direct_sum(&self.blocks)
    }
}

/// One conditionally controlled factor `C(P, Q, index)` with `P^† Q = target`.
#[derive(Debug, Clone)]
pub struct PlanFactor {
    pub index: usize,
    pub target: UMat64,
    pub pair: (UMat64, UMat64),
}

/// Exact factorization `G = (I ⊗ residual) · F_K ⋯ F_1`.
#[derive(Debug, Clone)]
pub struct DecompositionPlan {
    pub n: usize,
    /// Factors in application order (`F_1` first).
    pub factors: Vec<PlanFactor>,
    pub residual: UMat64,
}

impl DecompositionPlan {
    /// `C(P, Q, index)` on all `n` qubits.
    pub fn factor_matrix(&self, f: &PlanFactor) -> UMat64 {
        parity_controlled(self.n, f.index, &f.pair.0, &f.pair.1)
    }

    pub fn residual_matrix(&self) -> UMat64 {
        parity_controlled(self.n, 0, &self.residual, &self.residual)
    }

    pub fn reassemble(&self) -> UMat64 {
        let m = self.factors.iter().fold(UMat::identity(1 << self.n), |acc, f| &self.factor_matrix(f) * &acc);
        &self.residual_matrix() * &m
    }

    /// Largest entrywise deviation of the reassembled product from `g`.
    pub fn reassembly_error(&self, g: &GeneralizedControlled) -> f64 {
        self.reassemble().max_abs_diff(&g.matrix())
    }
}

/// Block-diagonal gate applying `p` where `c ⋆ index = 0` and `q` elsewhere.
pub fn parity_controlled(n: usize, index: usize, p: &UMat64, q: &UMat64) -> UMat64 {
    let blocks: Vec<UMat64> =
        (0..1usize << (n - 1)).map(|c| if star(c as u64, index as u64) == 0 { p.clone() } else { q.clone() }).collect();
    UMat::direct_sum(&blocks)
}

/// Exact plan with `P = I` for every factor.
pub fn decompose_generalized(g: &GeneralizedControlled) -> Result<DecompositionPlan> {
    let plan = plan_with(g, |_, _| Ok(Quat::identity()))?;
    check_reassembly(&plan, g)?;
    Ok(plan)
}

fn check_reassembly(plan: &DecompositionPlan, g: &GeneralizedControlled) -> Result<()> {
    let e = plan.reassembly_error(g);
    if !(e <= TOLERANCES.reassembly) {
        return Err(Error::Integrity(format!("plan reassembles with error {e:.3e}")));
    }
    Ok(())
}

/// Builds the plan, asking `choose(index, target)` for each factor's `P` in
/// application order.
fn plan_with(
    g: &GeneralizedControlled,
    mut choose: impl FnMut(usize, &Quat64) -> Result<Quat64>,
) -> Result<DecompositionPlan> {
    let mut cur: Vec<Quat64> = g.blocks.iter().map(Quat::from_matrix_signed).collect::<Result<_>>()?;
    let mut factors = Vec::new();
    while cur.len() > 1 {
        let half = cur.len() / 2;
        let beta: Vec<Quat64> = (0..half).map(|r| cur[r].adjoint() * cur[half + r]).collect();
        let (h0, _) = solve_pairs(&beta, half, &mut choose, &mut factors)?;
        cur = (0..half).map(|r| cur[r] * h0[r].adjoint()).collect();
    }
    Ok(DecompositionPlan {
        n: g.n,
        factors: factors
            .into_iter()
            .map(|(index, t, p, q)| PlanFactor { index, target: t.to_matrix(), pair: (p.to_matrix(), q.to_matrix()) })
            .collect(),
        residual: cur[0].to_matrix(),
    })
}

type RawFactor = (usize, Quat64, Quat64, Quat64);

/// Factors with indices `offset + j`, `j < beta.len()`, whose blocks satisfy
/// `H_{0,r}^† H_{1,r} = beta[r]`; returns `(H_{0,·}, H_{1,·})`.
fn solve_pairs(
    beta: &[Quat64],
    offset: usize,
    choose: &mut impl FnMut(usize, &Quat64) -> Result<Quat64>,
    factors: &mut Vec<RawFactor>,
) -> Result<(Vec<Quat64>, Vec<Quat64>)> {
    if beta.len() == 1 {
        let p = choose(offset, &beta[0])?;
        let q = p * beta[0];
        factors.push((offset, beta[0], p, q));
        return Ok((vec![p], vec![q]));
    }
    let half = beta.len() / 2;
    let roots: Vec<Quat64> = (0..half)
        .map(|r| {
            (beta[r] * beta[half + r].adjoint()).sqrt().map_err(|_| {
                Error::BranchAmbiguity(format!(
                    "conditions {r} and {} of factors {offset}..{} multiply to -I",
                    half + r,
                    offset + beta.len()
                ))
            })
        })
        .collect::<Result<_>>()?;
    let gamma: Vec<Quat64> = (0..half).map(|r| roots[r].adjoint() * beta[r]).collect();
    let (b0, b1) = solve_pairs(&gamma, offset, choose, factors)?;
    let alpha: Vec<Quat64> = (0..half).map(|r| b0[r] * roots[r] * b0[r].adjoint()).collect();
    let (a0, a1) = solve_pairs(&alpha, offset + half, choose, factors)?;
    let mut h0 = Vec::with_capacity(beta.len());
    let mut h1 = Vec::with_capacity(beta.len());
    for rt in 0..2 {
        for r in 0..half {
            let (x, y) = if rt == 0 { (a0[r], a1[r]) } else { (a1[r], a0[r]) };
            h0.push(x * b0[r]);
            h1.push(y * b1[r]);
        }
    }
    Ok((h0, h1))
}

/// How the accuracy budget is shared between segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EpsSplit {
    #[default]
    Equal,
    /// Proportional to the number of qubits each segment touches.
    ByQubits,
}

#[derive(Debug, Clone, Copy)]
pub struct ControlledOptions {
    pub split: EpsSplit,
    /// Two-qubit gates with `A = I`: take the residual as the inverted
    /// left letters of the controlled word. Fails if `A ≠ I`.
    pub narrow: bool,
    /// Canonical-order filter for the controlled-word search.
    pub canonical: bool,
    pub limits: Limits,
}

impl Default for ControlledOptions {
    fn default() -> Self {
        Self { split: EpsSplit::Equal, narrow: false, canonical: false, limits: Limits::default() }
    }
}

#[derive(Debug, Clone)]
pub enum SegmentKind {
    Factor {
        word: CcWord,
        flip: bool,
    },
    Residual {
        word: Word,
        text: String,
    },
    /// Residual read off a factor's letters; no search.
    ExactResidual,
}

/// One synthesized piece of the circuit.
#[derive(Debug, Clone)]
pub struct Segment {
    /// Factor index; 0 for the residual.
    pub index: usize,
    pub kind: SegmentKind,
    pub circuit: CircuitTemplate,
    pub vcount: usize,
    /// Accuracy requested for this segment.
    pub epsilon: f64,
    /// Distance between the segment and its exact planned counterpart.
    pub error: f64,
}

#[derive(Debug, Clone)]
pub struct ControlledCircuit {
    pub n: usize,
    /// In application order; the residual comes last.
    pub segments: Vec<Segment>,
    pub circuit: CircuitTemplate,
    pub vcount: usize,
    /// Sum of segment errors.
    pub error_bound: f64,
    /// Distance between the assembled circuit and the target.
    pub error: f64,
    pub epsilon: f64,
    pub plan: DecompositionPlan,
    /// Summed over all searches.
    pub nodes_expanded: u64,
    pub elapsed: Duration,
}

/// Synthesizes `A ⊕ B`: a controlled word for `A^† B`, then the residual.
pub fn synth_controlled_2q(a: &UMat64, b: &UMat64, eps: f64, opts: &ControlledOptions) -> Result<ControlledCircuit> {
    synth_generalized(&GeneralizedControlled::new(vec![a.clone(), b.clone()])?, eps, opts)
}

/// Synthesizes every factor with the controlled-word search and the residual
/// with the single-qubit meet-in-the-middle search.
pub fn synth_generalized(g: &GeneralizedControlled, eps: f64, opts: &ControlledOptions) -> Result<ControlledCircuit> {
    check_epsilon(eps)?;
    let start = Instant::now();
    let n = g.n;
    let narrow = opts.narrow;
    if narrow {
        if n != 2 {
            return Err(Error::Validation("the narrow shortcut needs a two-qubit gate".into()));
        }
        if g.blocks[0].max_abs_diff(&UMat::identity(2)) > 1e-12 {
            return Err(Error::Validation("the narrow shortcut needs A = I".into()));
        }
    }
    let k = (1usize << (n - 1)) - 1;
    let weight = |i: usize| match opts.split {
        EpsSplit::Equal => 1.0,
        EpsSplit::ByQubits => i.count_ones() as f64 + 1.0,
    };
    let total: f64 = (1..=k).map(weight).sum::<f64>() + if narrow { 0.0 } else { weight(0) };
    let budget = |i: usize| eps * weight(i) / total;

    let mut searcher = CcSearcher::with_canonical(opts.canonical);
    let mut found = Vec::with_capacity(k);
    let mut nodes = 0u64;
    let plan = plan_with(g, |i, t| {
        let r = searcher
            .search(&t.to_matrix(), budget(i), &opts.limits)
            .map_err(|e| Error::Factor { index: i, source: Box::new(e) })?;
        let p = Quat::from_matrix_signed(&r.controlled.block(0, 2))?;
        nodes += r.nodes_expanded;
        found.push(r);
        Ok(p)
    })?;
    check_reassembly(&plan, g)?;

    let mut segments = Vec::with_capacity(k + 1);
    for (f, r) in plan.factors.iter().zip(found) {
        let circuit = factor_circuit(n, f.index, &r.circuit);
        let error = dist_phase_invariant(&circuit.product(), &plan.factor_matrix(f))?;
        segments.push(Segment {
            index: f.index,
            vcount: circuit.vcount(),
            kind: SegmentKind::Factor { word: r.word, flip: r.flip },
            circuit,
            epsilon: budget(f.index),
            error,
        });
    }

    let residual = if narrow {
        let SegmentKind::Factor { word, .. } = &segments[0].kind else { unreachable!() };
        let gates = word.steps.iter().map(|s| Gate::V { axis: s.axis, dagger: s.i1 > 0, qubit: n - 1 }).collect();
        let circuit = CircuitTemplate::new("residual", n, gates);
        let error = dist_phase_invariant(&circuit.product(), &plan.residual_matrix())?;
        if circuit.product().max_abs_diff(&plan.residual_matrix()) > 1e-12 {
            return Err(Error::Integrity(format!("narrow residual deviates by {error:.3e}")));
        }
        Segment { index: 0, vcount: circuit.vcount(), kind: SegmentKind::ExactResidual, circuit, epsilon: 0.0, error }
    } else {
        let gs = vbasis(1)?;
        let r = MitmSearcher::new(&gs)?
            .search(&plan.residual, budget(0), &opts.limits)
            .map_err(|e| Error::Factor { index: 0, source: Box::new(e) })?;
        nodes += r.nodes_expanded;
        let circuit = CircuitTemplate::new("residual", n, word_gates(&gs, &r.word, n - 1)?);
        let error = dist_phase_invariant(&circuit.product(), &plan.residual_matrix())?;
        Segment {
            index: 0,
            vcount: circuit.vcount(),
            kind: SegmentKind::Residual { text: r.text, word: r.word },
            circuit,
            epsilon: budget(0),
            error,
        }
    };
    segments.push(residual);

    let gates = segments.iter().flat_map(|s| s.circuit.gates.iter().copied()).collect();
    let circuit = CircuitTemplate::new(format!("controlled-{n}q"), n, gates);
    let error = dist_phase_invariant(&circuit.product(), &g.matrix())?;
    let error_bound: f64 = segments.iter().map(|s| s.error).sum();
    if error > error_bound + 1e-12 {
        return Err(Error::Integrity(format!("assembled error {error:.3e} exceeds segment sum {error_bound:.3e}")));
    }
    Ok(ControlledCircuit {
        n,
        vcount: circuit.vcount(),
        segments,
        circuit,
        error_bound,
        error,
        epsilon: eps,
        plan,
        nodes_expanded: nodes,
        elapsed: start.elapsed(),
    })
}

/// Places a two-qubit `C(P, Q)` circuit as the factor with parity index
/// `index`: CNOTs gather the parity onto one control, which then drives the
/// target.
pub fn factor_circuit(n: usize, index: usize, cc: &CircuitTemplate) -> CircuitTemplate {
    let m = n - 1;
    let controls: Vec<usize> = (0..m).filter(|&q| index >> (m - 1 - q) & 1 == 1).collect();
    let acc = *controls.last().expect("nonzero index");
    let ladder: Vec<Gate> = controls[..controls.len() - 1].iter().map(|&q| Gate::Cnot(q, acc)).collect();
    let mut gates = ladder.clone();
    gates.extend(cc.remapped(n, &[acc, m]).gates);
    gates.extend(ladder.into_iter().rev());
    CircuitTemplate::new(format!("factor-{index}"), n, gates)
}

/// Gates of a single-qubit word on `qubit`, in application order.
pub fn word_gates(gs: &GateSet, word: &Word, qubit: usize) -> Result<Vec<Gate>> {
    let parse = |label: &str| -> Result<Option<Gate>> {
        if label == "I" {
            return Ok(None);
        }
        format!("{label}(0)")
            .parse::<Gate>()
            .ok()
            .filter(|g| g.qubits() == [0])
            .map(|g| Some(g.remap(&[qubit])))
            .ok_or(())
            .map_err(|_| Error::Unsupported(format!("no gate for label {label:?}")))
    };
    let mut out = Vec::with_capacity(word.len() + 1);
    for &l in word.letters.iter().rev() {
        out.extend(parse(&gs.basis()[l].label)?);
    }
    out.extend(parse(&gs.suffixes()[word.suffix].label)?);
    Ok(out)
}

/// Synthesizes `L · G · L^†` for a layer `L` of CNOT gates by conjugating
/// the circuit for `G`.
pub fn synth_conjugated(
    g: &GeneralizedControlled,
    layer: &[Gate],
    eps: f64,
    opts: &ControlledOptions,
) -> Result<ControlledCircuit> {
    if let Some(bad) = layer.iter().find(|x| !matches!(x, Gate::Cnot(..))) {
        return Err(Error::Validation(format!("conjugating layer may only hold CNOTs, found {bad}")));
    }
    if let Some(bad) = layer.iter().find(|x| x.qubits().iter().any(|&q| q >= g.n)) {
        return Err(Error::Validation(format!("gate {bad} is outside a {}-qubit register", g.n)));
    }
    let mut out = synth_generalized(g, eps, opts)?;
    let mut gates: Vec<Gate> = layer.iter().rev().copied().collect();
    gates.extend(out.circuit.gates.iter().copied());
    gates.extend(layer.iter().copied());
    out.circuit = CircuitTemplate::new(format!("{}-conjugated", out.circuit.name), g.n, gates);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::haar_random;

    fn su2(seed: u64) -> UMat64 {
        haar_random::<f64>(2, seed).to_special()
    }

    #[test]
    fn star_examples() {
        assert_eq!(star(23, 30), 1);
        for j in 0..64 {
            assert_eq!(star(0, j), 0);
            assert_eq!(star(j, 5), star(5, j));
        }
    }

    #[test]
    fn index_sets() {
        assert_eq!(controlled_index_set(2, 1, 1).unwrap(), vec![3]);
        assert_eq!(controlled_index_set(2, 0, 0).unwrap(), vec![2, 3]);
        for j in 0..16 {
            let a = controlled_index_set(4, j, 0).unwrap().len();
            let b = controlled_index_set(4, j, 1).unwrap().len();
            assert_eq!(a + b, 8);
        }
        assert!(controlled_index_set(2, 4, 0).is_err());
    }

    #[test]
    fn two_qubit_plan_targets_product() {
        let (a, b) = (su2(1), su2(2));
        let g = GeneralizedControlled::new(vec![a.clone(), b.clone()]).unwrap();
        let plan = decompose_generalized(&g).unwrap();
        assert_eq!(plan.factors.len(), 1);
        assert!(plan.factors[0].target.max_abs_diff(&(&a.adjoint() * &b)) < 1e-12);
        assert!(plan.residual.max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn plans_reassemble() {
        for n_blocks in [2, 4, 8] {
            for seed in 0..10 {
                let blocks = (0..n_blocks).map(|k| su2(100 * seed + k)).collect();
                let g = GeneralizedControlled::new_with(blocks, true).unwrap();
                let plan = decompose_generalized(&g).unwrap();
                assert_eq!(plan.factors.len(), n_blocks as usize - 1);
                assert!(plan.reassembly_error(&g) < 1e-12);
            }
        }
    }

    #[test]
    fn size_limits() {
        let blocks = |k: usize| (0..k).map(|s| su2(s as u64)).collect::<Vec<_>>();
        assert!(matches!(GeneralizedControlled::new(blocks(8)), Err(Error::Unsupported(_))));
        assert!(matches!(GeneralizedControlled::new_with(blocks(16), true), Err(Error::Unsupported(_))));
        assert!(GeneralizedControlled::new(blocks(3)).is_err());
    }

    #[test]
    fn ambiguous_root_is_reported() {
        let z = UMat::from_raw(
            2,
            vec![
                crate::Complex64::new(0.0, 1.0),
                crate::Complex64::new(0.0, 0.0),
                crate::Complex64::new(0.0, 0.0),
                crate::Complex64::new(0.0, -1.0),
            ],
        )
        .unwrap();
        let id = UMat::identity(2);
        let g = GeneralizedControlled::new(vec![id.clone(), z.clone(), id, z.adjoint()]).unwrap();
        assert!(matches!(decompose_generalized(&g), Err(Error::BranchAmbiguity(_))));
    }

    #[test]
    fn factor_circuit_realizes_parity_control() {
        let cc = crate::ccsearch::emit_circuit(&CcWord { steps: vec![crate::gateset::CcStep::from_index(5)] }, true);
        let p = cc.product().block(0, 2);
        let q = cc.product().block(1, 2);
        for n in 2..=4 {
            for index in 1..1 << (n - 1) {
                let c = factor_circuit(n, index, &cc);
                assert!(c.product().max_abs_diff(&parity_controlled(n, index, &p, &q)) < 1e-12);
                assert_eq!(c.vcount(), cc.vcount());
            }
        }
    }

    #[test]
    fn narrow_vz_squared() {
        let vz = crate::gateset::Axis::Z.v_matrix(false);
        let b = &vz * &vz;
        let opts = ControlledOptions { narrow: true, ..ControlledOptions::default() };
        let r = synth_controlled_2q(&UMat::identity(2), &b, 1e-6, &opts).unwrap();
        let SegmentKind::Factor { word, .. } = &r.segments[0].kind else { panic!() };
        assert_eq!(word.text(), "V(ZZ)'");
        assert_eq!(r.vcount, 2);
        assert!(r.error < 1e-12);
        assert!(r.segments[1].error < 1e-12);
    }

    #[test]
    fn generalized_within_budget() {
        for seed in 0..3 {
            let g = GeneralizedControlled::new((0..4).map(|k| su2(40 + 4 * seed + k)).collect()).unwrap();
            let r = synth_generalized(&g, 0.2, &ControlledOptions::default()).unwrap();
            assert!(r.error <= r.error_bound + 1e-12);
            assert!(r.error_bound <= 0.2);
            assert_eq!(r.segments.len(), 4);
            assert_eq!(r.vcount, r.segments.iter().map(|s| s.vcount).sum::<usize>());
        }
    }

    #[test]
    fn conjugated_layer() {
        let g = GeneralizedControlled::new(vec![su2(3), su2(4)]).unwrap();
        let layer = [Gate::Cnot(1, 0)];
        let r = synth_conjugated(&g, &layer, 0.1, &ControlledOptions::default()).unwrap();
        let c = layer[0].matrix(2);
        let want = &(&c * &g.matrix()) * &c;
        assert!(dist_phase_invariant(&r.circuit.product(), &want).unwrap() <= r.error_bound + 1e-12);
        assert!(synth_conjugated(&g, &[Gate::H(0)], 0.1, &ControlledOptions::default()).is_err());
    }
}
