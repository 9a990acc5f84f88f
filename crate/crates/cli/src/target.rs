//! Target specifications: `haar:<d>:<seed>`, `file:<path>`, or a gate name.

use std::f64::consts::FRAC_PI_4;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use vsynth::circuit::Gate;
use vsynth::gateset::vbasis;
use vsynth::linalg::{haar_random, UMat};
use vsynth::{Complex64, UMat64};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    dim: usize,
    /// Row-major `[re, im]` pairs.
    matrix: Vec<[f64; 2]>,
}

pub fn parse_target(spec: &str) -> Result<UMat64> {
    let spec = spec.trim();
    if let Some(rest) = spec.strip_prefix("haar:") {
        let (d, seed) = rest.split_once(':').ok_or_else(|| anyhow!("expected haar:<d>:<seed>, got {spec:?}"))?;
        let d: usize = d.parse().with_context(|| format!("bad dimension in {spec:?}"))?;
        let seed: u64 = seed.parse().with_context(|| format!("bad seed in {spec:?}"))?;
        if !(2..=64).contains(&d) {
            bail!("dimension must be in 2..=64, got {d}");
        }
        return Ok(haar_random(d, seed));
    }
    if let Some(path) = spec.strip_prefix("file:") {
        return read_matrix(Path::new(path));
    }
    named(spec).ok_or_else(|| anyhow!("unknown target {spec:?}"))
}

/// Comma-separated target specifications.
pub fn parse_blocks(spec: &str) -> Result<Vec<UMat64>> {
    spec.split(',').map(parse_target).collect()
}

pub fn read_matrix(path: &Path) -> Result<UMat64> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: MatrixFile =
        serde_json::from_str(&text).with_context(|| format!("parsing matrix file {}", path.display()))?;
    if file.matrix.len() != file.dim * file.dim {
        bail!("matrix file has {} entries, expected {}", file.matrix.len(), file.dim * file.dim);
    }
    let data = file.matrix.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
    Ok(UMat::from_raw(file.dim, data)?)
}

fn named(name: &str) -> Option<UMat64> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let lower = name.to_ascii_lowercase();
    let one_qubit = |g: Gate| Some(g.matrix(1));
    match lower.as_str() {
        "i" | "id" => return Some(UMat::identity(2)),
        "x" => return one_qubit(Gate::X(0)),
        "y" => return one_qubit(Gate::Y(0)),
        "z" => return one_qubit(Gate::Z(0)),
        "h" => return one_qubit(Gate::H(0)),
        "s" => return one_qubit(Gate::S(0)),
        "t" => {
            let (s, co) = FRAC_PI_4.sin_cos();
            return UMat::from_raw(2, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(co, s)]).ok();
        }
        "cnot" | "cx" => return Some(Gate::Cnot(0, 1).matrix(2)),
        "cz" => {
            let mut m = UMat::identity(4);
            m.set(3, 3, c(-1.0, 0.0));
            return Some(m);
        }
        "swap" => {
            let a = Gate::Cnot(0, 1).matrix(2);
            let b = Gate::Cnot(1, 0).matrix(2);
            return Some(&(&a * &b) * &a);
        }
        _ => {}
    }
    for n in 1..=2 {
        let gs = vbasis(n).ok()?;
        if let Some(e) = gs.basis().iter().find(|e| e.label.eq_ignore_ascii_case(name)) {
            return Some(e.matrix.clone());
        }
    }
    None
}
