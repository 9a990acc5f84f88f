mod target;

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use vsynth::bench::{fit_scaling, run_bench, BenchConfig, CsvSink, Grid, LogBase, Method};
use vsynth::ccsearch::{constraint_of, CcSearcher};
use vsynth::controlled::{synth_generalized, ControlledOptions, EpsSplit, GeneralizedControlled, SegmentKind};
use vsynth::counting::{closed_form_bound, count_adopted, enumerate_adopted, vcount_lower_bound, Model};
use vsynth::gateset::{cc_basis, load_gateset, load_suffixes, suffix_set, vbasis, GateSet, SuffixSet};
use vsynth::linalg::UMat;
use vsynth::mitm::{Limits, MitmSearcher};
use vsynth::Error;

/// Report schema tag for `--json` output.
const SCHEMA: &str = "vsynth.report/1";

/// Worker-count override for the thread pool.
const WORKERS_ENV: &str = "VSYNTH_WORKERS";

#[derive(Parser)]
#[command(name = "vsynth", version, about = "Clifford+V gate synthesis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Shortest word approximating a target unitary.
    Synth(SynthArgs),
    /// Controlled-V word for a two-qubit gate `diag(A', B')` with `A'^† B'` near a target.
    SynthCc(SynthCcArgs),
    /// Circuit for a (generalized) controlled gate `A_0 ⊕ A_1 ⊕ …`.
    SynthControlled(SynthControlledArgs),
    /// Sweep random targets and write CSV rows.
    Bench(BenchArgs),
    /// Adopted controlled-V word counts.
    Count(CountArgs),
    /// V-count lower bounds.
    Bounds(BoundsArgs),
    /// Print a gate set.
    Gateset(GatesetArgs),
}

#[derive(Args, Clone)]
struct LimitArgs {
    /// Longest word to consider.
    #[arg(long)]
    max_len: Option<usize>,
    /// Memory budget for cached frontiers, in MiB.
    #[arg(long)]
    max_memory_mib: Option<usize>,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    timeout_s: Option<f64>,
}

impl LimitArgs {
    fn limits(&self) -> Result<Limits> {
        let mut l = Limits { max_len: self.max_len, ..Limits::default() };
        if let Some(m) = self.max_memory_mib {
            l.max_memory_bytes = m.saturating_mul(1 << 20);
        }
        if let Some(t) = self.timeout_s {
            if !(t.is_finite() && t > 0.0) {
                bail!("timeout must be positive, got {t}");
            }
            l.deadline = Some(Instant::now() + Duration::from_secs_f64(t));
        }
        Ok(l)
    }
}

#[derive(Args)]
struct SynthArgs {
    /// `haar:<d>:<seed>`, `file:<path>`, or a gate name such as `vx` or `cz`.
    #[arg(long)]
    target: String,
    #[arg(long)]
    eps: f64,
    /// `v1q`, `v2q`, `v3q`, or `file:<path>`; defaults to the V basis matching the target.
    #[arg(long)]
    gateset: Option<String>,
    /// `pauli`, `identity`, `clifford`, or `file:<path>`; replaces the gate set's suffixes.
    #[arg(long)]
    suffixes: Option<String>,
    #[command(flatten)]
    limits: LimitArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SynthCcArgs {
    /// Single-qubit product `A^† B` to realize.
    #[arg(long, conflicts_with = "blocks")]
    target: Option<String>,
    /// `A,B`; the product is `A^† B`.
    #[arg(long)]
    blocks: Option<String>,
    #[arg(long)]
    eps: f64,
    /// Skip step orders that differ only by commuting neighbours.
    #[arg(long)]
    canonical: bool,
    #[command(flatten)]
    limits: LimitArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Equal,
    ByQubits,
}

#[derive(Args)]
struct SynthControlledArgs {
    /// Comma-separated block targets `A_0,A_1,…` (2, 4, or with `--allow-large` 8 blocks).
    #[arg(long, required_unless_present = "blocks_file")]
    blocks: Option<String>,
    /// JSON file with a list of matrix objects.
    #[arg(long, conflicts_with = "blocks")]
    blocks_file: Option<PathBuf>,
    #[arg(long)]
    eps: f64,
    /// `A = I`: reuse the controlled word's letters as the exact residual.
    #[arg(long)]
    narrow: bool,
    #[arg(long, value_enum, default_value = "equal")]
    split: SplitArg,
    #[arg(long)]
    canonical: bool,
    /// Admit four-qubit gates.
    #[arg(long)]
    allow_large: bool,
    #[command(flatten)]
    limits: LimitArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// mitm-su2, mitm-su4, cc, controlled-narrow, controlled-generalized, controlled-3q.
    #[arg(long)]
    method: String,
    /// Comma-separated accuracies.
    #[arg(long, conflicts_with = "vcount_grid", required_unless_present = "vcount_grid")]
    eps_grid: Option<String>,
    /// Comma-separated word lengths (minimum error at each).
    #[arg(long)]
    vcount_grid: Option<String>,
    #[arg(long, default_value_t = 10)]
    num_targets: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    canonical: bool,
    /// Write elapsed_s as 0 for byte-identical reruns.
    #[arg(long)]
    zero_timing: bool,
    #[command(flatten)]
    limits: LimitArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CountArgs {
    /// Word length.
    #[arg(long)]
    n: usize,
    /// Also enumerate sequences directly (n ≤ 5).
    #[arg(long)]
    enumerate: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BoundsArgs {
    /// su2_v, sun_v(n), or cc_phi.
    #[arg(long)]
    model: String,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GatesetArgs {
    /// `v1q`, `v2q`, `v3q`, `cc`, or `file:<path>`.
    #[arg(long, default_value = "v1q")]
    name: String,
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_workers() {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    let json = match &cli.command {
        Command::Synth(a) => a.json,
        Command::SynthCc(a) => a.json,
        Command::SynthControlled(a) => a.json,
        Command::Bench(a) => a.json,
        Command::Count(a) => a.json,
        Command::Bounds(a) => a.json,
        Command::Gateset(a) => a.json,
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit_code(&e);
            if json {
                println!("{}", json!({ "schema": SCHEMA, "ok": false, "error": error_json(&e) }));
            }
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

fn configure_workers() -> Result<()> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v.parse().with_context(|| format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))?;
        if n == 0 {
            bail!("{WORKERS_ENV} must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn search_error(e: &anyhow::Error) -> Option<&Error> {
    e.chain().find_map(|c| c.downcast_ref::<Error>())
}

/// 2 when a search ran out of length, memory, or time; 1 otherwise.
fn exit_code(e: &anyhow::Error) -> u8 {
    fn limited(e: &Error) -> bool {
        match e {
            Error::LimitExceeded(_) | Error::NotFound { .. } => true,
            Error::Factor { source, .. } => limited(source),
            _ => false,
        }
    }
    if search_error(e).is_some_and(limited) {
        2
    } else {
        1
    }
}

fn error_json(e: &anyhow::Error) -> Value {
    let mut v = json!({ "message": format!("{e:#}") });
    let mut inner = search_error(e);
    while let Some(Error::Factor { index, source }) = inner {
        v["factor"] = json!(index);
        inner = Some(source);
    }
    match inner {
        Some(Error::LimitExceeded(r)) => {
            v["kind"] = json!("limit_exceeded");
            v["reason"] = json!(r.reason);
            v["best_error"] = json!(r.best_error);
            v["depth_reached"] = json!(r.depth_reached);
            v["nodes_expanded"] = json!(r.nodes_expanded);
        }
        Some(Error::NotFound { max_len, best_error }) => {
            v["kind"] = json!("not_found");
            v["max_len"] = json!(max_len);
            v["best_error"] = json!(best_error);
        }
        _ => v["kind"] = json!("error"),
    }
    v
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Synth(a) => synth(a),
        Command::SynthCc(a) => synth_cc(a),
        Command::SynthControlled(a) => synth_controlled(a),
        Command::Bench(a) => bench(a),
        Command::Count(a) => count(a),
        Command::Bounds(a) => bounds(a),
        Command::Gateset(a) => gateset(a),
    }
}

fn emit(json: bool, value: Value, text: impl FnOnce() -> String) {
    if json {
        println!("{value}");
    } else {
        print!("{}", text());
    }
}

fn named_gateset(name: &str) -> Result<GateSet> {
    Ok(match name {
        "v1q" => vbasis(1)?,
        "v2q" => vbasis(2)?,
        "v3q" => vbasis(3)?,
        "cc" => cc_basis(),
        _ => match name.strip_prefix("file:") {
            Some(p) => load_gateset(p).with_context(|| format!("loading gate set {p}"))?,
            None => bail!("unknown gate set {name:?}"),
        },
    })
}

fn suffixes_for(kind: &str, dim: usize) -> Result<Vec<vsynth::gateset::BasisElement>> {
    let n = dim.trailing_zeros() as usize;
    Ok(match kind {
        "pauli" => suffix_set(SuffixSet::Pauli(n))?,
        "identity" => suffix_set(SuffixSet::Identity(n))?,
        "clifford" if dim == 2 => suffix_set(SuffixSet::Clifford1q)?,
        "clifford" => bail!("clifford suffixes exist for one qubit only"),
        _ => match kind.strip_prefix("file:") {
            Some(p) => {
                let (d, s) = load_suffixes(p).with_context(|| format!("loading suffixes {p}"))?;
                if d != dim {
                    bail!("suffix file has dimension {d}, gate set has {dim}");
                }
                s
            }
            None => bail!("unknown suffix kind {kind:?}"),
        },
    })
}

fn synth(a: SynthArgs) -> Result<()> {
    let target = target::parse_target(&a.target)?;
    let name = a.gateset.clone().unwrap_or_else(|| match target.dim() {
        4 => "v2q".into(),
        8 => "v3q".into(),
        _ => "v1q".into(),
    });
    let mut gs = named_gateset(&name)?;
    if let Some(kind) = &a.suffixes {
        let s = suffixes_for(kind, gs.dim())?;
        gs = gs.with_suffixes(s)?;
    }
    let r = MitmSearcher::new(&gs)?.search(&target, a.eps, &a.limits.limits()?)?;
    let letters: Vec<&str> = r.word.letters.iter().rev().map(|&l| gs.basis()[l].label.as_str()).collect();
    let suffix = &gs.suffixes()[r.word.suffix].label;
    let value = json!({
        "schema": SCHEMA,
        "ok": true,
        "command": "synth",
        "target": a.target,
        "gateset": name,
        "epsilon": a.eps,
        "word": letters.join(" "),
        "letters": letters,
        "suffix": suffix,
        "circuit": r.text,
        "vcount": r.vcount,
        "error": r.error,
        "nodes_expanded": r.nodes_expanded,
        "elapsed_s": r.elapsed.as_secs_f64(),
    });
    emit(a.json, value, || {
        format!(
            "circuit: {}\nvcount: {}\nerror: {:.6e}\nnodes_expanded: {}\nelapsed_s: {:.3}\n",
            r.text,
            r.vcount,
            r.error,
            r.nodes_expanded,
            r.elapsed.as_secs_f64()
        )
    });
    Ok(())
}

fn synth_cc(a: SynthCcArgs) -> Result<()> {
    let (product, spec) = match (&a.target, &a.blocks) {
        (Some(t), None) => (target::parse_target(t)?, t.clone()),
        (None, Some(b)) => {
            let blocks = target::parse_blocks(b)?;
            if blocks.len() != 2 {
                bail!("--blocks takes exactly two matrices, got {}", blocks.len());
            }
            (constraint_of(&blocks[0], &blocks[1])?, b.clone())
        }
        _ => bail!("give --target or --blocks"),
    };
    let r = CcSearcher::with_canonical(a.canonical).search(&product, a.eps, &a.limits.limits()?)?;
    let value = json!({
        "schema": SCHEMA,
        "ok": true,
        "command": "synth-cc",
        "target": spec,
        "epsilon": a.eps,
        "cc_word": r.word.text(),
        "steps": r.word.steps.iter().map(|s| json!({"axis": s.axis.letter().to_string(), "i1": s.i1, "i2": s.i2})).collect::<Vec<_>>(),
        "flip": r.flip,
        "circuit": r.circuit.to_text(),
        "vcount": r.vcount,
        "error": r.error,
        "nodes_expanded": r.nodes_expanded,
        "elapsed_s": r.elapsed.as_secs_f64(),
    });
    emit(a.json, value, || {
        format!(
            "cc_word: {}\nflip: {}\ncircuit: {}\nvcount: {}\nerror: {:.6e}\nnodes_expanded: {}\nelapsed_s: {:.3}\n",
            r.word.text(),
            r.flip,
            r.circuit.to_text(),
            r.vcount,
            r.error,
            r.nodes_expanded,
            r.elapsed.as_secs_f64()
        )
    });
    Ok(())
}

fn synth_controlled(a: SynthControlledArgs) -> Result<()> {
    let (blocks, spec) = match (&a.blocks, &a.blocks_file) {
        (Some(b), None) => (target::parse_blocks(b)?, b.clone()),
        (None, Some(p)) => (read_blocks(p)?, format!("file:{}", p.display())),
        _ => bail!("give --blocks or --blocks-file"),
    };
    let g = GeneralizedControlled::new_with(blocks, a.allow_large)?;
    let opts = ControlledOptions {
        split: match a.split {
            SplitArg::Equal => EpsSplit::Equal,
            SplitArg::ByQubits => EpsSplit::ByQubits,
        },
        narrow: a.narrow,
        canonical: a.canonical,
        limits: a.limits.limits()?,
    };
    let r = synth_generalized(&g, a.eps, &opts)?;
    let reassembly = r.plan.reassembly_error(&g);
    let segments: Vec<Value> = r
        .segments
        .iter()
        .map(|s| {
            let (kind, word) = match &s.kind {
                SegmentKind::Factor { word, flip } => ("factor", json!({"cc_word": word.text(), "flip": flip})),
                SegmentKind::Residual { text, .. } => ("residual", json!({"word": text})),
                SegmentKind::ExactResidual => ("exact_residual", Value::Null),
            };
            json!({
                "index": s.index,
                "kind": kind,
                "detail": word,
                "circuit": s.circuit.to_text(),
                "vcount": s.vcount,
                "epsilon": s.epsilon,
                "error": s.error,
            })
        })
        .collect();
    let value = json!({
        "schema": SCHEMA,
        "ok": true,
        "command": "synth-controlled",
        "blocks": spec,
        "n_qubits": r.n,
        "epsilon": a.eps,
        "narrow": a.narrow,
        "phase_normalized": g.normalized(),
        "reassembly_error": reassembly,
        "segments": segments,
        "circuit": r.circuit.to_text(),
        "vcount": r.vcount,
        "error": r.error,
        "error_bound": r.error_bound,
        "nodes_expanded": r.nodes_expanded,
        "elapsed_s": r.elapsed.as_secs_f64(),
    });
    emit(a.json, value, || {
        let mut s = String::new();
        for seg in &r.segments {
            let what = match &seg.kind {
                SegmentKind::Factor { word, .. } => format!("factor {} [{}]", seg.index, word.text()),
                SegmentKind::Residual { text, .. } => format!("residual [{text}]"),
                SegmentKind::ExactResidual => "residual (exact)".into(),
            };
            s += &format!("{what}: vcount {} error {:.3e}\n", seg.vcount, seg.error);
        }
        s += &format!(
            "circuit: {}\nvcount: {}\nerror: {:.6e}\nerror_bound: {:.6e}\nreassembly_error: {:.3e}\nelapsed_s: {:.3}\n",
            r.circuit.to_text(),
            r.vcount,
            r.error,
            r.error_bound,
            reassembly,
            r.elapsed.as_secs_f64()
        );
        s
    });
    Ok(())
}

fn read_blocks(path: &std::path::Path) -> Result<Vec<vsynth::UMat64>> {
    #[derive(serde::Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Block {
        dim: usize,
        matrix: Vec<[f64; 2]>,
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let blocks: Vec<Block> = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    blocks
        .into_iter()
        .map(|b| {
            if b.matrix.len() != b.dim * b.dim {
                bail!("block has {} entries, expected {}", b.matrix.len(), b.dim * b.dim);
            }
            let data = b.matrix.iter().map(|[re, im]| vsynth::Complex64::new(*re, *im)).collect();
            Ok(UMat::from_raw(b.dim, data)?)
        })
        .collect()
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',').map(|x| x.trim().parse::<T>().map_err(|_| anyhow!("bad {what} {x:?}"))).collect()
}

fn bench(a: BenchArgs) -> Result<()> {
    let method: Method = a.method.parse()?;
    let grid = match (&a.eps_grid, &a.vcount_grid) {
        (Some(e), None) => Grid::Epsilon(parse_list(e, "accuracy")?),
        (None, Some(v)) => Grid::VCount(parse_list(v, "word length")?),
        _ => bail!("give exactly one of --eps-grid and --vcount-grid"),
    };
    let mut cfg = BenchConfig::new(method, grid, a.num_targets, a.seed);
    cfg.limits = a.limits.limits()?;
    cfg.canonical = a.canonical;
    cfg.zero_timing = a.zero_timing;
    let file = File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut sink = CsvSink::new(BufWriter::new(file))?;
    let rows = run_bench(&cfg, |r| sink.write(r))?;
    sink.into_inner()?;
    let failures = rows.iter().filter(|r| !r.succeeded()).count();
    let mut fits = Vec::new();
    for base in LogBase::ALL {
        fits.extend(fit_scaling(&rows, base)?);
    }
    let value = json!({
        "schema": SCHEMA,
        "ok": true,
        "command": "bench",
        "method": method.name(),
        "rows": rows.len(),
        "failures": failures,
        "out": a.out.display().to_string(),
        "fits": fits.iter().map(|f| json!({
            "method": f.method,
            "units": f.base.tag(),
            "slope": f.fit.slope,
            "intercept": f.fit.intercept,
            "r2": f.fit.r2,
            "n_points": f.fit.n_points,
        })).collect::<Vec<_>>(),
    });
    emit(a.json, value, || {
        let mut s = format!("wrote {} rows ({failures} failed) to {}\n", rows.len(), a.out.display());
        for f in &fits {
            s += &format!(
                "{} slope {:.3} vs {}(1/eps), intercept {:.3}, r2 {:.3}\n",
                f.method,
                f.fit.slope,
                f.base.tag(),
                f.fit.intercept,
                f.fit.r2
            );
        }
        s
    });
    Ok(())
}

fn count(a: CountArgs) -> Result<()> {
    let c = count_adopted(a.n)?;
    let bound = closed_form_bound(a.n);
    let enumerated = if a.enumerate { Some(enumerate_adopted(a.n)?) } else { None };
    let mut value = json!({
        "schema": SCHEMA,
        "ok": true,
        "command": "count",
        "n": a.n,
        "count_adopted": c.to_string(),
        "closed_form_bound": bound,
    });
    if let Some((count, distinct)) = enumerated {
        value["enumerated_count"] = json!(count);
        value["distinct_products"] = json!(distinct);
    }
    emit(a.json, value, || {
        let mut s = format!("n: {}\ncount_adopted: {c}\nclosed_form_bound: {bound:.6}\n", a.n);
        if let Some((count, distinct)) = enumerated {
            s += &format!("enumerated_count: {count}\ndistinct_products: {distinct}\n");
        }
        s
    });
    Ok(())
}

fn bounds(a: BoundsArgs) -> Result<()> {
    let model: Model = a.model.parse()?;
    let b = vcount_lower_bound(model, a.eps)?;
    let value = json!({
        "schema": SCHEMA,
        "ok": true,
        "command": "bounds",
        "model": model.to_string(),
        "epsilon": a.eps,
        "vcount_lower_bound": b,
    });
    emit(a.json, value, || format!("model: {model}\nepsilon: {}\nvcount_lower_bound: {b:.4}\n", a.eps));
    Ok(())
}

fn gateset(a: GatesetArgs) -> Result<()> {
    let gs = named_gateset(&a.name)?;
    if a.json {
        println!("{}", gs.to_json());
        return Ok(());
    }
    println!("dimension: {}", gs.dim());
    println!("basis ({}):", gs.len());
    for (i, e) in gs.basis().iter().enumerate() {
        println!("  {} (inverse {}, weight {})", e.label, gs.basis()[gs.inverse_of(i)].label, e.weight);
    }
    println!(
        "suffixes ({}): {}",
        gs.suffixes().len(),
        gs.suffixes().iter().map(|s| s.label.as_str()).collect::<Vec<_>>().join(" ")
    );
    Ok(())
}
