//! Accuracy sweeps over random targets and least-squares scaling fits.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ccsearch::CcSearcher;
use crate::controlled::{synth_generalized, ControlledOptions, GeneralizedControlled};
use crate::counting::cc_growth_rate;
use crate::error::{Error, Result};
use crate::gateset::vbasis;
use crate::linalg::{haar_random, haar_random_with, UMat};
use crate::mitm::{Limits, MitmSearcher};
use crate::UMat64;

/// CSV header, in column order.
pub const CSV_COLUMNS: [&str; 8] =
    ["method", "target_class", "seed", "epsilon", "vcount", "achieved_error", "elapsed_s", "nodes_expanded"];

/// Largest number of rows one sweep may produce.
pub const MAX_ROWS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Single-qubit meet-in-the-middle over the V basis.
    MitmSu2,
    /// Two-qubit meet-in-the-middle over the 30-element V basis.
    MitmSu4,
    /// Conditionally controlled words for a Haar product `A^† B`.
    Cc,
    /// `I ⊕ B` with the exact residual.
    ControlledNarrow,
    /// `A ⊕ B`.
    ControlledGeneralized,
    /// `A_0 ⊕ A_1 ⊕ A_2 ⊕ A_3` on three qubits.
    Controlled3q,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::MitmSu2,
        Method::MitmSu4,
        Method::Cc,
        Method::ControlledNarrow,
        Method::ControlledGeneralized,
        Method::Controlled3q,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::MitmSu2 => "mitm-su2",
            Method::MitmSu4 => "mitm-su4",
            Method::Cc => "cc",
            Method::ControlledNarrow => "controlled-narrow",
            Method::ControlledGeneralized => "controlled-generalized",
            Method::Controlled3q => "controlled-3q",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| Error::Parse(format!("unknown method {s:?}")))
    }
}

/// What is held fixed across a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    /// Minimum V-count at each accuracy.
    Epsilon(Vec<f64>),
    /// Minimum error at each word length.
    VCount(Vec<usize>),
}

impl Grid {
    fn len(&self) -> usize {
        match self {
            Grid::Epsilon(v) => v.len(),
            Grid::VCount(v) => v.len(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub method: Method,
    pub grid: Grid,
    pub num_targets: usize,
    /// Target `k` uses seed `seed + k`.
    pub seed: u64,
    pub limits: Limits,
    /// Canonical-order filter for controlled-word searches.
    pub canonical: bool,
    /// Write `elapsed_s` as 0 so repeated runs give identical output.
    pub zero_timing: bool,
}

impl BenchConfig {
    pub fn new(method: Method, grid: Grid, num_targets: usize, seed: u64) -> Self {
        Self { method, grid, num_targets, seed, limits: Limits::default(), canonical: false, zero_timing: false }
    }
}

/// One (target, grid point) measurement. `vcount` is empty for failed runs,
/// whose `achieved_error` is the best error seen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: String,
    pub target_class: String,
    pub seed: u64,
    pub epsilon: f64,
    pub vcount: Option<usize>,
    pub achieved_error: f64,
    pub elapsed_s: f64,
    pub nodes_expanded: u64,
}

impl BenchRow {
    pub fn succeeded(&self) -> bool {
        self.vcount.is_some()
    }
}

/// Targets for `method` drawn from `seed`.
pub fn bench_target(method: Method, seed: u64) -> Vec<UMat64> {
    match method {
        Method::MitmSu2 | Method::Cc => vec![haar_random(2, seed)],
        Method::MitmSu4 => vec![haar_random(4, seed)],
        Method::ControlledNarrow => vec![UMat::identity(2), haar_random(2, seed)],
        Method::ControlledGeneralized | Method::Controlled3q => {
            let k = if method == Method::Controlled3q { 4 } else { 2 };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..k).map(|_| haar_random_with(2, &mut rng)).collect()
        }
    }
}

fn target_class(method: Method) -> &'static str {
    match method {
        Method::MitmSu2 | Method::Cc => "haar-su2",
        Method::MitmSu4 => "haar-su4",
        Method::ControlledNarrow => "haar-narrow-2q",
        Method::ControlledGeneralized => "haar-blocks-2q",
        Method::Controlled3q => "haar-blocks-3q",
    }
}

enum Runner {
    Mitm(MitmSearcher),
    Cc(CcSearcher),
    Controlled,
}

struct Outcome {
    vcount: Option<usize>,
    error: f64,
    nodes: u64,
    elapsed: f64,
}

/// Runs the sweep in (target, grid) order, passing each row to `sink`.
pub fn run_bench(cfg: &BenchConfig, mut sink: impl FnMut(&BenchRow) -> Result<()>) -> Result<Vec<BenchRow>> {
    let rows = cfg.num_targets.saturating_mul(cfg.grid.len());
    if rows == 0 {
        return Err(Error::Validation("sweep has no targets or no grid points".into()));
    }
    if rows > MAX_ROWS {
        return Err(Error::Validation(format!("sweep would produce {rows} rows (limit {MAX_ROWS})")));
    }
    match &cfg.grid {
        Grid::Epsilon(e) => {
            if let Some(bad) = e.iter().find(|x| !(x.is_finite() && **x > 0.0 && **x <= 1.0)) {
                return Err(Error::Validation(format!("grid accuracy {bad} is outside (0, 1]")));
            }
        }
        Grid::VCount(_) => {
            if !matches!(cfg.method, Method::MitmSu2 | Method::MitmSu4 | Method::Cc) {
                return Err(Error::Unsupported(format!("fixed-length sweeps for {}", cfg.method)));
            }
        }
    }
    let mut runner = match cfg.method {
        Method::MitmSu2 => Runner::Mitm(MitmSearcher::new(&vbasis(1)?)?),
        Method::MitmSu4 => Runner::Mitm(MitmSearcher::new(&vbasis(2)?)?),
        Method::Cc => Runner::Cc(CcSearcher::with_canonical(cfg.canonical)),
        _ => Runner::Controlled,
    };
    let mut out = Vec::with_capacity(rows);
    for k in 0..cfg.num_targets {
        let seed = cfg.seed + k as u64;
        let target = bench_target(cfg.method, seed);
        let points: Vec<(f64, Option<usize>)> = match &cfg.grid {
            Grid::Epsilon(e) => e.iter().map(|&x| (x, None)).collect(),
            Grid::VCount(v) => v.iter().map(|&n| (f64::NAN, Some(n))).collect(),
        };
        for (eps, len) in points {
            let o = run_one(cfg, &mut runner, &target, eps, len)?;
            let row = BenchRow {
                method: cfg.method.name().into(),
                target_class: target_class(cfg.method).into(),
                seed,
                epsilon: eps,
                vcount: o.vcount,
                achieved_error: o.error,
                elapsed_s: if cfg.zero_timing { 0.0 } else { o.elapsed },
                nodes_expanded: o.nodes,
            };
            sink(&row)?;
            out.push(row);
        }
    }
    Ok(out)
}

fn run_one(cfg: &BenchConfig, runner: &mut Runner, target: &[UMat64], eps: f64, len: Option<usize>) -> Result<Outcome> {
    let start = std::time::Instant::now();
    let result = match (runner, len) {
        (Runner::Mitm(s), None) => {
            s.search(&target[0], eps, &cfg.limits).map(|r| (r.vcount, r.error, r.nodes_expanded))
        }
        (Runner::Mitm(s), Some(n)) => {
            s.min_error(&target[0], n, &cfg.limits).map(|r| (r.vcount, r.error, r.nodes_expanded))
        }
        (Runner::Cc(s), None) => s.search(&target[0], eps, &cfg.limits).map(|r| (r.vcount, r.error, r.nodes_expanded)),
        (Runner::Cc(s), Some(n)) => {
            s.min_error(&target[0], n, &cfg.limits).map(|r| (r.vcount, r.error, r.nodes_expanded))
        }
        (Runner::Controlled, _) => {
            let g = GeneralizedControlled::new(target.to_vec())?;
            let opts = ControlledOptions {
                narrow: cfg.method == Method::ControlledNarrow,
                canonical: cfg.canonical,
                limits: cfg.limits,
                ..ControlledOptions::default()
            };
            synth_generalized(&g, eps, &opts).map(|r| (r.vcount, r.error, r.nodes_expanded))
        }
    };
    let elapsed = start.elapsed().as_secs_f64();
    match result {
        Ok((vcount, error, nodes)) => Ok(Outcome { vcount: Some(vcount), error, nodes, elapsed }),
        Err(e) => match failure_report(&e) {
            Some((best, nodes)) => Ok(Outcome { vcount: None, error: best, nodes, elapsed }),
            None => Err(e),
        },
    }
}

/// Best error and work for failures that still produce a row.
fn failure_report(e: &Error) -> Option<(f64, u64)> {
    match e {
        Error::LimitExceeded(r) => Some((r.best_error, r.nodes_expanded)),
        Error::NotFound { best_error, .. } => Some((*best_error, 0)),
        Error::Factor { source, .. } => failure_report(source),
        _ => None,
    }
}

/// Writes rows as CSV with the fixed header.
pub struct CsvSink<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> CsvSink<W> {
    pub fn new(writer: W) -> Result<Self> {
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
        inner.write_record(CSV_COLUMNS).map_err(csv_error)?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, row: &BenchRow) -> Result<()> {
        self.inner.serialize(row).map_err(csv_error)?;
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> Result<W> {
        self.inner.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

pub fn read_csv(reader: impl std::io::Read) -> Result<Vec<BenchRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers().map_err(csv_error)?.iter().map(String::from).collect();
    if header != CSV_COLUMNS {
        return Err(Error::Parse(format!("unexpected CSV header {header:?}")));
    }
    r.deserialize().map(|x| x.map_err(csv_error)).collect()
}

/// Ordinary least squares line through `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub n_points: usize,
}

pub fn ols(points: &[(f64, f64)]) -> Result<LineFit> {
    let n = points.len();
    if n < 2 {
        return Err(Error::Validation(format!("a fit needs at least two points, got {n}")));
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Validation("fit abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LineFit { slope, intercept: my - slope * mx, r2, n_points: n })
}

/// Logarithm bases in which slopes are reported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogBase {
    Five,
    Phi,
    Ten,
}

impl LogBase {
    pub const ALL: [LogBase; 3] = [LogBase::Five, LogBase::Phi, LogBase::Ten];

    pub fn value(self) -> f64 {
        match self {
            LogBase::Five => 5.0,
            LogBase::Phi => cc_growth_rate(),
            LogBase::Ten => 10.0,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            LogBase::Five => "log5",
            LogBase::Phi => "log_phi",
            LogBase::Ten => "log10",
        }
    }
}

/// Mean V-count against `log_base(1/ε)` over successful rows of one method.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub method: String,
    pub base: LogBase,
    pub fit: LineFit,
}

/// Fits each method's mean V-count per accuracy; rows from fixed-length
/// sweeps and failed rows are skipped.
pub fn fit_scaling(rows: &[BenchRow], base: LogBase) -> Result<Vec<ScalingFit>> {
    let mut methods: Vec<&str> = rows.iter().map(|r| r.method.as_str()).collect();
    methods.sort_unstable();
    methods.dedup();
    let mut out = Vec::new();
    for m in methods {
        let mut eps: Vec<f64> = rows
            .iter()
            .filter(|r| r.method == m && r.succeeded() && r.epsilon.is_finite())
            .map(|r| r.epsilon)
            .collect();
        eps.sort_by(f64::total_cmp);
        eps.dedup();
        let points: Vec<(f64, f64)> = eps
            .iter()
            .map(|&e| {
                let v: Vec<f64> = rows
                    .iter()
                    .filter(|r| r.method == m && r.epsilon == e)
                    .filter_map(|r| r.vcount)
                    .map(|x| x as f64)
                    .collect();
                ((1.0 / e).ln() / base.value().ln(), v.iter().sum::<f64>() / v.len() as f64)
            })
            .collect();
        if points.len() >= 2 {
            out.push(ScalingFit { method: m.into(), base, fit: ols(&points)? });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ols_recovers_exact_line() {
        let pts: Vec<(f64, f64)> = (0..6).map(|i| (i as f64 * 0.7, 3.0 * i as f64 * 0.7 - 1.25)).collect();
        let f = ols(&pts).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-12 && (f.intercept + 1.25).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert!(ols(&pts[..1]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![
            BenchRow {
                method: "cc".into(),
                target_class: "haar-su2".into(),
                seed: 3,
                epsilon: 0.01,
                vcount: Some(7),
                achieved_error: 0.0042,
                elapsed_s: 0.5,
                nodes_expanded: 99,
            },
            BenchRow {
                method: "cc".into(),
                target_class: "haar-su2".into(),
                seed: 4,
                epsilon: 1e-5,
                vcount: None,
                achieved_error: 2e-4,
                elapsed_s: 1.0,
                nodes_expanded: 5,
            },
        ];
        let mut sink = CsvSink::new(Vec::new()).unwrap();
        for r in &rows {
            sink.write(r).unwrap();
        }
        let bytes = sink.into_inner().unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("method,target_class,seed,epsilon,vcount,achieved_error,elapsed_s,nodes_expanded\n"));
        assert_eq!(read_csv(&bytes[..]).unwrap(), rows);
    }

    #[test]
    fn small_sweep_is_deterministic() {
        let mut cfg = BenchConfig::new(Method::MitmSu2, Grid::Epsilon(vec![0.2, 0.1]), 3, 7);
        cfg.zero_timing = true;
        let a = run_bench(&cfg, |_| Ok(())).unwrap();
        let b = run_bench(&cfg, |_| Ok(())).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|r| r.succeeded() && r.achieved_error < r.epsilon));
        let fits = fit_scaling(&a, LogBase::Five).unwrap();
        assert_eq!(fits.len(), 1);
    }

    #[test]
    fn failures_become_rows() {
        let mut cfg = BenchConfig::new(Method::MitmSu2, Grid::Epsilon(vec![1e-6]), 1, 1);
        cfg.limits = Limits::with_max_len(3);
        let rows = run_bench(&cfg, |_| Ok(())).unwrap();
        assert!(!rows[0].succeeded() && rows[0].achieved_error.is_finite());
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
    }
}
