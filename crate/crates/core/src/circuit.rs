//! Gate-level circuits and their text format.
//!
//! Grammar: a circuit is a whitespace-separated list of gates, applied left to
//! right (first token acts first). A gate is `NAME(q)` or `CNOT(c,t)`, where
//! `NAME` is one of `H S S' X Y Z Vx Vy Vz Vx' Vy' Vz'` and a trailing
//! apostrophe means dagger. Qubit 0 is the most significant tensor factor.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gateset::Axis;
use crate::linalg::{paulis, UMat};
use crate::UMat64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cnot(usize, usize),
    V { axis: Axis, dagger: bool, qubit: usize },
}

impl Gate {
    pub fn is_v(&self) -> bool {
        matches!(self, Gate::V { .. })
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::S(q) | Gate::Sdg(q) | Gate::X(q) | Gate::Y(q) | Gate::Z(q) => vec![q],
            Gate::V { qubit, .. } => vec![qubit],
            Gate::Cnot(c, t) => vec![c, t],
        }
    }

    /// Relabels qubits through `map`.
    pub fn remap(&self, map: &[usize]) -> Gate {
        match *self {
            Gate::H(q) => Gate::H(map[q]),
            Gate::S(q) => Gate::S(map[q]),
            Gate::Sdg(q) => Gate::Sdg(map[q]),
            Gate::X(q) => Gate::X(map[q]),
            Gate::Y(q) => Gate::Y(map[q]),
            Gate::Z(q) => Gate::Z(map[q]),
            Gate::Cnot(c, t) => Gate::Cnot(map[c], map[t]),
            Gate::V { axis, dagger, qubit } => Gate::V { axis, dagger, qubit: map[qubit] },
        }
    }

    fn single_qubit_matrix(&self) -> Option<(usize, UMat64)> {
        let [_, x, y, z] = paulis::<f64>();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let c = Complex::new;
        Some(match *self {
            Gate::H(q) => (q, UMat::from_raw(2, vec![c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]).unwrap()),
            Gate::S(q) => (q, UMat::from_raw(2, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]).unwrap()),
            Gate::Sdg(q) => (q, UMat::from_raw(2, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0)]).unwrap()),
            Gate::X(q) => (q, x),
            Gate::Y(q) => (q, y),
            Gate::Z(q) => (q, z),
            Gate::V { axis, dagger, qubit } => (qubit, axis.v_matrix(dagger)),
            Gate::Cnot(..) => return None,
        })
    }

    /// Full `2^n × 2^n` matrix of this gate on `n_qubits` qubits.
    pub fn matrix(&self, n_qubits: usize) -> UMat64 {
        let dim = 1 << n_qubits;
        match *self {
            Gate::Cnot(c, t) => {
                let (cb, tb) = (1 << (n_qubits - 1 - c), 1 << (n_qubits - 1 - t));
                let mut m = UMat::zeros(dim);
                for col in 0..dim {
                    let row = if col & cb != 0 { col ^ tb } else { col };
                    m.set(row, col, Complex::new(1.0, 0.0));
                }
                m
            }
            _ => {
                let (q, g) = self.single_qubit_matrix().expect("single-qubit gate");
                let mut m = UMat::identity(1);
                for k in 0..n_qubits {
                    m = if k == q { m.kron(&g) } else { m.kron(&UMat::identity(2)) };
                }
                m
            }
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::H(q) => write!(f, "H({q})"),
            Gate::S(q) => write!(f, "S({q})"),
            Gate::Sdg(q) => write!(f, "S'({q})"),
            Gate::X(q) => write!(f, "X({q})"),
            Gate::Y(q) => write!(f, "Y({q})"),
            Gate::Z(q) => write!(f, "Z({q})"),
            Gate::Cnot(c, t) => write!(f, "CNOT({c},{t})"),
            Gate::V { axis, dagger, qubit } => {
                write!(f, "V{}{}({qubit})", axis.letter(), if dagger { "'" } else { "" })
            }
        }
    }
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad gate token `{s}`"));
        let open = s.find('(').ok_or_else(bad)?;
        if !s.ends_with(')') {
            return Err(bad());
        }
        let name = &s[..open];
        let args: Vec<usize> = s[open + 1..s.len() - 1]
            .split(',')
            .map(|a| a.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let one = |g: fn(usize) -> Gate| if args.len() == 1 { Ok(g(args[0])) } else { Err(bad()) };
        match name {
            "H" => one(Gate::H),
            "S" => one(Gate::S),
            "S'" => one(Gate::Sdg),
            "X" => one(Gate::X),
            "Y" => one(Gate::Y),
            "Z" => one(Gate::Z),
            "CNOT" if args.len() == 2 && args[0] != args[1] => Ok(Gate::Cnot(args[0], args[1])),
            _ => {
                let rest = name.strip_prefix('V').ok_or_else(bad)?;
                let (axis, dagger) = match rest {
                    "x" => (Axis::X, false),
                    "y" => (Axis::Y, false),
                    "z" => (Axis::Z, false),
                    "x'" => (Axis::X, true),
                    "y'" => (Axis::Y, true),
                    "z'" => (Axis::Z, true),
                    _ => return Err(bad()),
                };
                if args.len() != 1 {
                    return Err(bad());
                }
                Ok(Gate::V { axis, dagger, qubit: args[0] })
            }
        }
    }
}

/// A named gate list over a fixed number of qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitTemplate {
    pub name: String,
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

impl CircuitTemplate {
    pub fn new(name: impl Into<String>, n_qubits: usize, gates: Vec<Gate>) -> Self {
        Self { name: name.into(), n_qubits, gates }
    }

    /// Matrix of the whole circuit: the last gate multiplies from the left.
    pub fn product(&self) -> UMat64 {
        self.gates.iter().fold(UMat::identity(1 << self.n_qubits), |acc, g| &g.matrix(self.n_qubits) * &acc)
    }

    pub fn vcount(&self) -> usize {
        self.gates.iter().filter(|g| g.is_v()).count()
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Places this circuit on a larger register; `map[q]` is the new index of qubit `q`.
    pub fn remapped(&self, n_qubits: usize, map: &[usize]) -> Self {
        Self { name: self.name.clone(), n_qubits, gates: self.gates.iter().map(|g| g.remap(map)).collect() }
    }

    pub fn to_text(&self) -> String {
        self.gates.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(" ")
    }

    pub fn parse(name: &str, n_qubits: usize, text: &str) -> Result<Self> {
        let gates = text.split_whitespace().map(Gate::from_str).collect::<Result<Vec<_>>>()?;
        if let Some(g) = gates.iter().find(|g| g.qubits().iter().any(|&q| q >= n_qubits)) {
            return Err(Error::Parse(format!("gate {g} is outside a {n_qubits}-qubit register")));
        }
        Ok(Self::new(name, n_qubits, gates))
    }
}

impl fmt::Display for CircuitTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
