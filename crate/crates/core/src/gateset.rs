//! Gate sets: the V basis, the controlled-V step set, suffix sets and the
//! JSON file format.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::circuit::{CircuitTemplate, Gate};
use crate::config::TOLERANCES;
use crate::error::{Error, Result};
use crate::linalg::{dist_phase_invariant, paulis, UMat};
use crate::{Quat64, UMat64};

const INV_SQRT5: f64 = 0.447_213_595_499_957_9;
const TWO_INV_SQRT5: f64 = 0.894_427_190_999_915_9;

/// Bundled single-qubit V basis in the gate-set file format.
pub const VBASIS_1Q_JSON: &str = include_str!("../data/vbasis-1q.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn letter(self) -> char {
        ['x', 'y', 'z'][self.index()]
    }

    /// `V_a` (or its adjoint) as a quaternion.
    pub fn v_quat(self, dagger: bool) -> Quat64 {
        let s = if dagger { -TWO_INV_SQRT5 } else { TWO_INV_SQRT5 };
        match self {
            Axis::X => Quat64::new_unchecked(INV_SQRT5, s, 0.0, 0.0),
            Axis::Y => Quat64::new_unchecked(INV_SQRT5, 0.0, s, 0.0),
            Axis::Z => Quat64::new_unchecked(INV_SQRT5, 0.0, 0.0, s),
        }
    }

    pub fn v_matrix(self, dagger: bool) -> UMat64 {
        self.v_quat(dagger).to_matrix()
    }
}

/// A tensor product of Paulis; entry `k` acts on qubit `k` (0 = most significant).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString(Vec<u8>);

impl PauliString {
    /// Entries are 0..=3 for `I, X, Y, Z`.
    pub fn new(ops: Vec<u8>) -> Result<Self> {
        if ops.is_empty() || ops.iter().any(|&p| p > 3) {
            return Err(Error::Validation("Pauli string entries must be in 0..=3".into()));
        }
        Ok(Self(ops))
    }

    /// The `index`-th string on `n` qubits in base-4 order, qubit 0 most significant.
    pub fn from_index(n: usize, index: usize) -> Self {
        let ops = (0..n).map(|k| ((index >> (2 * (n - 1 - k))) & 3) as u8).collect();
        Self(ops)
    }

    pub fn ops(&self) -> &[u8] {
        &self.0
    }

    pub fn n_qubits(&self) -> usize {
        self.0.len()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == 0)
    }

    pub fn matrix(&self) -> UMat64 {
        let ps = paulis::<f64>();
        self.0.iter().fold(UMat::identity(1), |acc, &p| acc.kron(&ps[p as usize]))
    }

    /// `(I + 2iP)/√5`, or its adjoint.
    pub fn v_matrix(&self, dagger: bool) -> UMat64 {
        let p = self.matrix();
        let coef = Complex::new(0.0, if dagger { -TWO_INV_SQRT5 } else { TWO_INV_SQRT5 });
        let data =
            UMat64::identity(p.dim()).data().iter().zip(p.data()).map(|(i, x)| *i * INV_SQRT5 + *x * coef).collect();
        UMat::from_raw(p.dim(), data).expect("square")
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &p in &self.0 {
            write!(f, "{}", ['I', 'X', 'Y', 'Z'][p as usize])?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let ops = s
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(0),
                'X' => Ok(1),
                'Y' => Ok(2),
                'Z' => Ok(3),
                _ => Err(Error::Parse(format!("bad Pauli string `{s}`"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(ops)
    }
}

/// One step of the controlled-V search: the block-diagonal `diag(V_a^{i1}, V_a^{i2})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CcStep {
    pub axis: Axis,
    pub i1: i8,
    pub i2: i8,
}

impl CcStep {
    pub const COUNT: usize = 12;

    pub fn new(axis: Axis, i1: i8, i2: i8) -> Result<Self> {
        if i1.abs() != 1 || i2.abs() != 1 {
            return Err(Error::Validation("step exponents must be ±1".into()));
        }
        Ok(Self { axis, i1, i2 })
    }

    /// Steps are numbered `axis*4 + (i1<0)*2 + (i2<0)`.
    pub fn index(&self) -> usize {
        self.axis.index() * 4 + usize::from(self.i1 < 0) * 2 + usize::from(self.i2 < 0)
    }

    pub fn from_index(index: usize) -> Self {
        assert!(index < Self::COUNT, "step index out of range");
        let sign = |neg: bool| if neg { -1 } else { 1 };
        Self { axis: Axis::ALL[index / 4], i1: sign(index & 2 != 0), i2: sign(index & 1 != 0) }
    }

    pub fn all() -> impl Iterator<Item = CcStep> {
        (0..Self::COUNT).map(Self::from_index)
    }

    pub fn inverse(&self) -> Self {
        Self { axis: self.axis, i1: -self.i1, i2: -self.i2 }
    }

    /// Top block `V_a^{i1}`.
    pub fn top(&self) -> Quat64 {
        self.axis.v_quat(self.i1 < 0)
    }

    /// Bottom block `V_a^{i2}`.
    pub fn bottom(&self) -> Quat64 {
        self.axis.v_quat(self.i2 < 0)
    }

    /// The two-qubit V-basis label of `diag(V_a^{i1}, V_a^{i2})`.
    pub fn label(&self) -> String {
        let a = self.axis.letter().to_ascii_uppercase();
        match (self.i1 > 0, self.i2 > 0) {
            (true, true) => format!("V(I{a})"),
            (false, false) => format!("V(I{a})'"),
            (true, false) => format!("V(Z{a})"),
            (false, true) => format!("V(Z{a})'"),
        }
    }

    pub fn matrix(&self) -> UMat64 {
        UMat::direct_sum(&[self.top().to_matrix(), self.bottom().to_matrix()])
    }

    /// Gate-level circuit for this step with control qubit 0 and target qubit 1.
    pub fn template(&self) -> CircuitTemplate {
        emit_cc_template(self.axis, self.i1, self.i2)
    }
}

impl fmt::Display for CcStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Gates realizing `diag(V_a^{i1}, V_a^{i2})` on two qubits (qubit 0 controls).
///
/// Equal exponents need a single V on the target. Otherwise the z case is
/// `CNOT Vz CNOT`; x conjugates it by `H`, y by `S·H` on the target.
pub fn emit_cc_template(axis: Axis, i1: i8, i2: i8) -> CircuitTemplate {
    let v = |a: Axis| Gate::V { axis: a, dagger: i1 < 0, qubit: 1 };
    let name = CcStep { axis, i1, i2 }.label();
    if i1 == i2 {
        return CircuitTemplate::new(name, 2, vec![v(axis)]);
    }
    let core = [Gate::Cnot(0, 1), v(Axis::Z), Gate::Cnot(0, 1)];
    let gates = match axis {
        Axis::Z => core.to_vec(),
        Axis::X => [&[Gate::H(1)][..], &core, &[Gate::H(1)]].concat(),
        Axis::Y => [&[Gate::Sdg(1), Gate::H(1)][..], &core, &[Gate::H(1), Gate::S(1)]].concat(),
    };
    CircuitTemplate::new(name, 2, gates)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisElement {
    pub label: String,
    pub matrix: UMat64,
    pub inverse_label: String,
    pub weight: u32,
}

impl BasisElement {
    pub fn new(label: impl Into<String>, matrix: UMat64, inverse_label: impl Into<String>) -> Self {
        Self { label: label.into(), matrix, inverse_label: inverse_label.into(), weight: 1 }
    }
}

/// A validated, inverse-closed gate set with a suffix set.
#[derive(Debug, Clone)]
pub struct GateSet {
    dim: usize,
    basis: Vec<BasisElement>,
    suffixes: Vec<BasisElement>,
    inverse: Vec<usize>,
}

impl GateSet {
    /// Validates unitarity, label uniqueness and inverse closure.
    /// An empty suffix list means the identity alone.
    pub fn new(dim: usize, basis: Vec<BasisElement>, suffixes: Vec<BasisElement>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::GateSet(format!("dimension must be at least 2, got {dim}")));
        }
        if basis.is_empty() {
            return Err(Error::GateSet("basis is empty".into()));
        }
        let suffixes =
            if suffixes.is_empty() { vec![BasisElement::new("I", UMat::identity(dim), "I")] } else { suffixes };
        for e in basis.iter().chain(&suffixes) {
            if e.matrix.dim() != dim {
                return Err(Error::GateSet(format!(
                    "element {} has dimension {}, expected {dim}",
                    e.label,
                    e.matrix.dim()
                )));
            }
            let r = e.matrix.unitarity_residual();
            if r > TOLERANCES.unitarity {
                return Err(Error::GateSet(format!("element {} is not unitary (residual {r:.3e})", e.label)));
            }
        }
        let mut index = HashMap::new();
        for (i, e) in basis.iter().enumerate() {
            if index.insert(e.label.as_str(), i).is_some() {
                return Err(Error::GateSet(format!("duplicate label {}", e.label)));
            }
        }
        let mut inverse = Vec::with_capacity(basis.len());
        for e in &basis {
            let j = *index.get(e.inverse_label.as_str()).ok_or_else(|| {
                Error::GateSet(format!("inverse {} of {} is not in the basis", e.inverse_label, e.label))
            })?;
            if basis[j].matrix.max_abs_diff(&e.matrix.adjoint()) > TOLERANCES.unitarity {
                return Err(Error::GateSet(format!("{} is not the inverse of {}", e.inverse_label, e.label)));
            }
            inverse.push(j);
        }
        Ok(Self { dim, basis, suffixes, inverse })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[BasisElement] {
        &self.basis
    }

    pub fn suffixes(&self) -> &[BasisElement] {
        &self.suffixes
    }

    pub fn inverse_of(&self, i: usize) -> usize {
        self.inverse[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.basis.iter().position(|e| e.label == label)
    }

    /// Same basis, different suffix set.
    pub fn with_suffixes(mut self, suffixes: Vec<BasisElement>) -> Result<Self> {
        let basis = std::mem::take(&mut self.basis);
        Self::new(self.dim, basis, suffixes)
    }

    /// Matrix product `B[w0] · B[w1] · …`.
    pub fn word_matrix(&self, word: &[usize]) -> UMat64 {
        word.iter().fold(UMat::identity(self.dim), |acc, &i| &acc * &self.basis[i].matrix)
    }

    pub fn to_json(&self) -> String {
        let file = GateSetFile {
            dim: self.dim,
            elements: self
                .basis
                .iter()
                .map(|e| ElementFile {
                    label: e.label.clone(),
                    inverse: Some(e.inverse_label.clone()),
                    matrix: flatten(&e.matrix),
                    weight: (e.weight != 1).then_some(e.weight),
                })
                .collect(),
            suffixes: self
                .suffixes
                .iter()
                .map(|e| ElementFile {
                    label: e.label.clone(),
                    inverse: None,
                    matrix: flatten(&e.matrix),
                    weight: None,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let (dim, basis, suffixes) = parse_file(text)?;
        Self::new(dim, basis, suffixes)
    }
}

/// Dimension, basis and suffixes of a gate-set file.
fn parse_file(text: &str) -> Result<(usize, Vec<BasisElement>, Vec<BasisElement>)> {
    {
        let file: GateSetFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let to_elem = |e: ElementFile, need_inverse: bool| -> Result<BasisElement> {
            if e.matrix.len() != file.dim * file.dim {
                return Err(Error::GateSet(format!(
                    "element {} has {} entries, expected {}",
                    e.label,
                    e.matrix.len(),
                    file.dim * file.dim
                )));
            }
            let inverse_label = match e.inverse {
                Some(l) => l,
                None if need_inverse => return Err(Error::GateSet(format!("element {} names no inverse", e.label))),
                None => e.label.clone(),
            };
            let data = e.matrix.iter().map(|[re, im]| Complex::new(*re, *im)).collect();
            Ok(BasisElement {
                label: e.label,
                matrix: UMat::from_raw(file.dim, data)?,
                inverse_label,
                weight: e.weight.unwrap_or(1),
            })
        };
        let basis = file.elements.into_iter().map(|e| to_elem(e, true)).collect::<Result<Vec<_>>>()?;
        let suffixes = file.suffixes.into_iter().map(|e| to_elem(e, false)).collect::<Result<Vec<_>>>()?;
        Ok((file.dim, basis, suffixes))
    }
}

fn flatten(m: &UMat64) -> Vec<[f64; 2]> {
    m.data().iter().map(|z| [z.re, z.im]).collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateSetFile {
    dim: usize,
    #[serde(default)]
    elements: Vec<ElementFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    suffixes: Vec<ElementFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementFile {
    label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    inverse: Option<String>,
    matrix: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight: Option<u32>,
}

pub fn load_gateset(path: impl AsRef<Path>) -> Result<GateSet> {
    GateSet::from_json(&std::fs::read_to_string(path)?)
}

/// Suffix list from a gate-set file; the `elements` field may be omitted.
/// Returns the dimension with the suffixes.
pub fn load_suffixes(path: impl AsRef<Path>) -> Result<(usize, Vec<BasisElement>)> {
    let (dim, _, suffixes) = parse_file(&std::fs::read_to_string(path)?)?;
    if suffixes.is_empty() {
        return Err(Error::GateSet("suffix file lists no suffixes".into()));
    }
    Ok((dim, suffixes))
}

/// Largest qubit count `vbasis` builds without an explicit override.
pub const VBASIS_MAX_QUBITS: usize = 3;

/// The n-qubit V basis with Pauli suffixes.
pub fn vbasis(n: usize) -> Result<GateSet> {
    vbasis_with(n, false)
}

pub fn vbasis_with(n: usize, allow_large: bool) -> Result<GateSet> {
    if n == 0 {
        return Err(Error::Validation("need at least one qubit".into()));
    }
    if n > VBASIS_MAX_QUBITS && !allow_large {
        return Err(Error::Validation(format!(
            "{n}-qubit V basis has {} elements; pass the override to build it",
            2 * (4usize.pow(n as u32) - 1)
        )));
    }
    let mut basis = Vec::with_capacity(2 * (4usize.pow(n as u32) - 1));
    for index in 1..4usize.pow(n as u32) {
        let p = PauliString::from_index(n, index);
        let label = v_label(&p);
        let dag = format!("{label}'");
        basis.push(BasisElement::new(label.clone(), p.v_matrix(false), dag.clone()));
        basis.push(BasisElement::new(dag, p.v_matrix(true), label));
    }
    GateSet::new(1 << n, basis, suffix_set(SuffixSet::Pauli(n))?)
}

fn v_label(p: &PauliString) -> String {
    if p.n_qubits() == 1 {
        format!("V{}", p.to_string().to_ascii_lowercase())
    } else {
        format!("V({p})")
    }
}

/// The 12 controlled-V steps as a two-qubit gate set, identity suffix.
pub fn cc_basis() -> GateSet {
    let basis = CcStep::all().map(|s| BasisElement::new(s.label(), s.matrix(), s.inverse().label())).collect();
    GateSet::new(4, basis, Vec::new()).expect("valid by construction")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuffixSet {
    Identity(usize),
    /// All `4^n` Pauli strings on `n` qubits.
    Pauli(usize),
    /// The 24 single-qubit Cliffords modulo global phase.
    Clifford1q,
}

pub fn suffix_set(kind: SuffixSet) -> Result<Vec<BasisElement>> {
    Ok(match kind {
        SuffixSet::Identity(n) => vec![BasisElement::new("I", UMat::identity(1 << n), "I")],
        SuffixSet::Pauli(n) => {
            if n == 0 || n > 6 {
                return Err(Error::Validation(format!("Pauli suffixes on {n} qubits are not supported")));
            }
            (0..4usize.pow(n as u32))
                .map(|i| {
                    let p = PauliString::from_index(n, i);
                    BasisElement::new(p.to_string(), p.matrix(), p.to_string())
                })
                .collect()
        }
        SuffixSet::Clifford1q => {
            clifford_1q().into_iter().map(|(label, m)| BasisElement::new(label.clone(), m, label)).collect()
        }
    })
}

/// Breadth-first closure of `{H, S}` modulo phase; labels list gates first-applied-first.
fn clifford_1q() -> Vec<(String, UMat64)> {
    let gens = [("H", Gate::H(0).matrix(1)), ("S", Gate::S(0).matrix(1))];
    let mut found: Vec<(String, UMat64)> = vec![("I".into(), UMat::identity(2))];
    let mut frontier = 0;
    while frontier < found.len() {
        let (label, m) = found[frontier].clone();
        frontier += 1;
        for (g, gm) in &gens {
            let next = gm * &m;
            if found.iter().all(|(_, f)| dist_phase_invariant(f, &next).expect("2x2") > 1e-9) {
                let name = if label == "I" { g.to_string() } else { format!("{label} {g}") };
                found.push((name, next));
            }
        }
    }
    found
}
