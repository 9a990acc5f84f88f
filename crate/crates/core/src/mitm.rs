//! Meet-in-the-middle search for minimum-length words.
//!
//! Level `i` of a [`Frontier`] holds every freely reduced word of length `i`,
//! built by prepending letters to level `i-1`. Round `i` indexes level `i`
//! in a kd-tree and, for every prefix `L` of length `i-1` and then `i`, and
//! every suffix `s`, looks up the element nearest to `L^† s^† T`. The first
//! prefix (in level order) whose best candidate is within `ε` gives a word
//! `s · L · R` of minimum length.
//!
//! Levels and trees do not depend on the target, so a [`MitmSearcher`]
//! keeps them between calls.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::config::TOLERANCES;
use crate::error::{Error, LimitReport, Result};
use crate::gateset::GateSet;
use crate::linalg::dist_phase_invariant;
use crate::nns::{KdTree, NearestNeighbor};
use crate::space::{alphabet, Alphabet, SearchSpace, Su2Space, SudSpace};
use crate::UMat64;

/// Queries evaluated together before looking for the first hit.
pub(crate) const CHUNK: usize = 8192;

/// Resource limits for one search.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    /// Longest word considered; `None` picks [`default_max_len`].
    pub max_len: Option<usize>,
    /// Budget for cached levels and trees, in bytes.
    pub max_memory_bytes: usize,
    pub deadline: Option<Instant>,
}

impl Default for Limits {
    fn default() -> Self {
        Self { max_len: None, max_memory_bytes: default_memory_budget(), deadline: None }
    }
}

/// 8 GiB, capped at three quarters of physical memory when that is known.
pub fn default_memory_budget() -> usize {
    const NOMINAL: usize = 8 << 30;
    let total = std::fs::read_to_string("/proc/meminfo").ok().and_then(|s| {
        let line = s.lines().find(|l| l.starts_with("MemTotal:"))?;
        let kib: usize = line.split_whitespace().nth(1)?.parse().ok()?;
        Some(kib.saturating_mul(1024))
    });
    match total {
        Some(t) => NOMINAL.min(t / 4 * 3),
        None => NOMINAL,
    }
}

impl Limits {
    pub fn with_max_len(max_len: usize) -> Self {
        Self { max_len: Some(max_len), ..Self::default() }
    }
}

pub fn default_max_len(dim: usize) -> usize {
    match dim {
        2 => 28,
        4 => 10,
        _ => 6,
    }
}

/// Letters (indices into the gate-set basis, in matrix-product order) and a
/// suffix index. The suffix is applied last: the word's matrix is `s · L_1 ⋯ L_k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    pub letters: Vec<usize>,
    pub suffix: usize,
}

impl Word {
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Sum of letter weights.
    pub fn vcount(&self, gs: &GateSet) -> usize {
        self.letters.iter().map(|&l| gs.basis()[l].weight as usize).sum()
    }

    pub fn matrix(&self, gs: &GateSet) -> UMat64 {
        &gs.suffixes()[self.suffix].matrix * &gs.word_matrix(&self.letters)
    }

    /// Gates in application order, e.g. `Vz' Vx | suffix=X` for `X · Vx · Vz'`;
    /// the empty word prints as `I`.
    pub fn text(&self, gs: &GateSet) -> String {
        let body = if self.letters.is_empty() {
            "I".to_string()
        } else {
            self.letters.iter().rev().map(|&l| gs.basis()[l].label.as_str()).collect::<Vec<_>>().join(" ")
        };
        format!("{body} | suffix={}", gs.suffixes()[self.suffix].label)
    }
}

/// Cancels adjacent inverse pairs.
pub fn reduce_word(letters: &[usize], inverse: impl Fn(usize) -> usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(letters.len());
    for &l in letters {
        if out.last().is_some_and(|&p| inverse(p) == l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct SynthResult {
    pub word: Word,
    pub text: String,
    /// Approximation `suffix · word` as recomputed from the gate-set matrices.
    pub matrix: UMat64,
    /// Phase-invariant distance to the target.
    pub error: f64,
    pub vcount: usize,
    /// Requested tolerance; `None` in fixed-length mode.
    pub epsilon: Option<f64>,
    /// Frontier elements in the levels used plus queries issued up to the hit.
    pub nodes_expanded: u64,
    pub elapsed: Duration,
}

impl SynthResult {
    /// Result for `word`, with the error recomputed from the gate-set matrices.
    pub fn from_word(gs: &GateSet, target: &UMat64, word: Word, epsilon: Option<f64>, nodes: u64) -> Result<Self> {
        let matrix = word.matrix(gs);
        let error = dist_phase_invariant(&matrix, target)?;
        Ok(Self {
            text: word.text(gs),
            vcount: word.vcount(gs),
            word,
            matrix,
            error,
            epsilon,
            nodes_expanded: nodes,
            elapsed: Duration::ZERO,
        })
    }
}

/// Checks a result against its target by recomputing the word from the gate set.
pub fn verify(gs: &GateSet, result: &SynthResult, target: &UMat64) -> Result<()> {
    if result.word.suffix >= gs.suffixes().len() || result.word.letters.iter().any(|&l| l >= gs.len()) {
        return Err(Error::Integrity("word refers to letters outside the gate set".into()));
    }
    let m = result.word.matrix(gs);
    let d = dist_phase_invariant(&m, target)?;
    if (d - result.error).abs() > 1e-12 {
        return Err(Error::Integrity(format!(
            "recomputed distance {d:.3e} differs from reported {:.3e}",
            result.error
        )));
    }
    if let Some(eps) = result.epsilon {
        if d >= eps {
            return Err(Error::Integrity(format!("distance {d:.3e} is not below ε = {eps:.3e}")));
        }
    }
    Ok(())
}

pub(crate) fn check_epsilon(eps: f64) -> Result<()> {
    if !(eps.is_finite() && eps > TOLERANCES.epsilon_floor && eps <= 1.0) {
        return Err(Error::Validation(format!("ε must lie in ({:e}, 1], got {eps}", TOLERANCES.epsilon_floor)));
    }
    Ok(())
}

struct Level<E> {
    elems: Vec<E>,
    parent: Vec<u32>,
    letter: Vec<u16>,
}

/// Cached levels of reduced words and their kd-trees.
pub struct Frontier<S: SearchSpace> {
    space: S,
    alphabet: Alphabet<S::Elem>,
    levels: Vec<Level<S::Elem>>,
    trees: Vec<Option<KdTree<f64>>>,
}

struct Hit {
    query: usize,
    owner: usize,
    suffix: usize,
    distance: f64,
}

struct PassOutcome {
    hit: Option<Hit>,
    queries: u64,
    best: f64,
}

impl<S: SearchSpace> Frontier<S> {
    pub fn new(space: S, gs: &GateSet) -> Result<Self> {
        let alphabet = alphabet(&space, gs)?;
        if alphabet.len() > u16::MAX as usize {
            return Err(Error::GateSet("too many letters".into()));
        }
        let root = Level { elems: vec![space.identity()], parent: vec![u32::MAX], letter: vec![u16::MAX] };
        Ok(Self { space, alphabet, levels: vec![root], trees: vec![None] })
    }

    pub fn space(&self) -> &S {
        &self.space
    }

    pub fn alphabet(&self) -> &Alphabet<S::Elem> {
        &self.alphabet
    }

    /// Number of reduced words of length `i`.
    pub fn level_len(&self, i: usize) -> usize {
        let b = self.alphabet.len();
        if i == 0 {
            1
        } else {
            (b as u128 * (b as u128 - 1).pow(i as u32 - 1)).min(usize::MAX as u128) as usize
        }
    }

    fn level_bytes(&self, i: usize) -> usize {
        self.level_len(i).saturating_mul(self.space.elem_bytes() + 6)
    }

    fn tree_bytes(&self, i: usize) -> usize {
        let points = self.level_len(i).saturating_mul(self.space.copies());
        // The index build holds a u32 permutation next to the points.
        KdTree::<f64>::estimated_bytes(points, self.space.embed_dim()).saturating_add(points * 4)
    }

    pub fn resident_bytes(&self) -> usize {
        let levels: usize = (0..self.levels.len()).map(|i| self.level_bytes(i)).sum();
        let trees: usize = (0..self.trees.len()).filter(|&i| self.trees[i].is_some()).map(|i| self.tree_bytes(i)).sum();
        levels + trees
    }

    /// Levels `0..=i` and the tree over level `i` fit the budget.
    pub fn fits(&self, i: usize, budget: usize) -> bool {
        let mut need = self.resident_bytes();
        for j in self.levels.len()..=i {
            need = need.saturating_add(self.level_bytes(j));
        }
        if self.trees.get(i).is_none_or(|t| t.is_none()) {
            need = need.saturating_add(self.tree_bytes(i));
        }
        need <= budget
    }

    pub fn ensure_level(&mut self, i: usize) {
        while self.levels.len() <= i {
            let next = self.expand(self.levels.len() - 1);
            self.levels.push(next);
            self.trees.push(None);
        }
    }

    fn expand(&self, i: usize) -> Level<S::Elem> {
        let prev = &self.levels[i];
        let b = self.alphabet.len();
        let per = if i == 0 { b } else { b - 1 };
        let n = prev.elems.len() * per;
        let mut elems = vec![self.space.identity(); n];
        let mut parent = vec![0u32; n];
        let mut letter = vec![0u16; n];
        elems.par_chunks_mut(per).zip(parent.par_chunks_mut(per)).zip(letter.par_chunks_mut(per)).enumerate().for_each(
            |(p, ((e, par), let_))| {
                let banned = (i > 0).then(|| self.alphabet.inverse[prev.letter[p] as usize]);
                let mut k = 0;
                for l in 0..b {
                    if Some(l) == banned {
                        continue;
                    }
                    e[k] = self.space.mul(&self.alphabet.letters[l], &prev.elems[p]);
                    par[k] = p as u32;
                    let_[k] = l as u16;
                    k += 1;
                }
                debug_assert_eq!(k, per);
            },
        );
        Level { elems, parent, letter }
    }

    pub fn ensure_tree(&mut self, i: usize) -> Result<()> {
        self.ensure_level(i);
        if self.trees[i].is_some() {
            return Ok(());
        }
        let level = &self.levels[i];
        let (copies, m) = (self.space.copies(), self.space.embed_dim());
        let mut coords = vec![0.0; level.elems.len() * copies * m];
        coords.par_chunks_mut(copies * m).zip(&level.elems).for_each(|(out, e)| {
            for c in 0..copies {
                self.space.write_copy(e, c, &mut out[c * m..(c + 1) * m]);
            }
        });
        let owners = (0..level.elems.len() as u32).flat_map(|o| std::iter::repeat_n(o, copies)).collect();
        self.trees[i] = Some(KdTree::build_flat(m, coords, owners)?);
        Ok(())
    }

    pub fn elem(&self, level: usize, idx: usize) -> &S::Elem {
        &self.levels[level].elems[idx]
    }

    /// Letters of element `idx` at `level`, in matrix-product order.
    pub fn word(&self, level: usize, mut idx: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(level);
        for l in (1..=level).rev() {
            let lv = &self.levels[l];
            out.push(lv.letter[idx] as usize);
            idx = lv.parent[idx] as usize;
        }
        out
    }

    fn radius(&self, eps: f64) -> f64 {
        self.space.radius(eps) * (1.0 + 1e-9) + 1e-15
    }

    /// Scans prefixes of `qlevel` against the tree over `tlevel`, stopping at
    /// the first chunk with a hit below `eps`.
    fn pass(
        &self,
        qlevel: usize,
        tlevel: usize,
        ts: &[S::Elem],
        eps: f64,
        deadline: Option<Instant>,
    ) -> Result<PassOutcome> {
        let tree = self.trees[tlevel].as_ref().expect("tree built");
        let prefixes = &self.levels[qlevel].elems;
        let radius = self.radius(eps);
        let m = self.space.embed_dim();
        let mut out = PassOutcome { hit: None, queries: 0, best: f64::INFINITY };
        for start in (0..prefixes.len()).step_by(CHUNK) {
            if deadline.is_some_and(|d| Instant::now() > d) {
                return Err(limit("deadline", out.best, 0, out.queries));
            }
            let end = (start + CHUNK).min(prefixes.len());
            let found: Vec<(Option<(usize, usize, f64)>, f64)> = (start..end)
                .into_par_iter()
                .map_init(
                    || vec![0.0; m],
                    |buf, q| {
                        let inv = self.space.adjoint(&prefixes[q]);
                        let mut best: Option<(usize, usize, f64)> = None;
                        for (s, t) in ts.iter().enumerate() {
                            let x = self.space.mul(&inv, t);
                            self.space.write_copy(&x, 0, buf);
                            if let Some(h) = tree.nearest_within(buf, radius) {
                                let r = &self.levels[tlevel].elems[h.owner_id];
                                let d = self.space.distance(&self.space.mul(&prefixes[q], r), t);
                                if best.is_none_or(|b| d < b.2) {
                                    best = Some((h.owner_id, s, d));
                                }
                            }
                        }
                        let seen = best.map_or(f64::INFINITY, |b| b.2);
                        (best.filter(|b| b.2 < eps), seen)
                    },
                )
                .collect();
            for (k, (hit, seen)) in found.into_iter().enumerate() {
                out.best = out.best.min(seen);
                if let Some((owner, suffix, distance)) = hit {
                    out.queries += (k + 1) as u64 * ts.len() as u64;
                    out.hit = Some(Hit { query: start + k, owner, suffix, distance });
                    return Ok(out);
                }
            }
            out.queries += ((end - start) * ts.len()) as u64;
        }
        Ok(out)
    }

    /// Best candidate for prefix identity across suffixes, without a radius.
    fn seed_best(&self, tlevel: usize, ts: &[S::Elem]) -> f64 {
        let tree = self.trees[tlevel].as_ref().expect("tree built");
        let mut buf = vec![0.0; self.space.embed_dim()];
        ts.iter()
            .map(|t| {
                self.space.write_copy(t, 0, &mut buf);
                let h = tree.nearest(&buf);
                self.space.distance(&self.levels[tlevel].elems[h.owner_id], t)
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn targets(&self, target: &UMat64) -> Result<Vec<S::Elem>> {
        let t = self.space.from_matrix(target)?;
        Ok(self.alphabet.suffixes.iter().map(|s| self.space.mul(&self.space.adjoint(s), &t)).collect())
    }

    /// Minimum-length word within `eps` of `target`.
    pub fn search(&mut self, gs: &GateSet, target: &UMat64, eps: f64, limits: &Limits) -> Result<SynthResult> {
        let start = Instant::now();
        let mut r = self.search_inner(gs, target, eps, limits)?;
        r.elapsed = start.elapsed();
        Ok(r)
    }

    fn search_inner(&mut self, gs: &GateSet, target: &UMat64, eps: f64, limits: &Limits) -> Result<SynthResult> {
        check_epsilon(eps)?;
        let ts = self.targets(target)?;
        let max_len = limits.max_len.unwrap_or_else(|| default_max_len(self.space.dim()));
        let mut nodes = 1 + ts.len() as u64;
        let mut best = f64::INFINITY;
        let id = self.space.identity();
        let (s0, d0) = ts
            .iter()
            .map(|t| self.space.distance(&id, t))
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (s, d)| if d < acc.1 { (s, d) } else { acc });
        best = best.min(d0);
        if d0 < eps {
            return self.finish(gs, target, Vec::new(), s0, Some(eps), nodes);
        }
        let mut reached = 0;
        for i in 1.. {
            if 2 * i - 1 > max_len {
                return Err(Error::NotFound { max_len, best_error: best });
            }
            if !self.fits(i, limits.max_memory_bytes) {
                return Err(limit("memory", best, reached, nodes));
            }
            self.ensure_tree(i)?;
            nodes += self.level_len(i) as u64;
            best = best.min(self.seed_best(i, &ts));
            for qlevel in [i - 1, i] {
                let len = qlevel + i;
                if len > max_len {
                    break;
                }
                let out = self
                    .pass(qlevel, i, &ts, eps, limits.deadline)
                    .map_err(|e| with_progress(e, best, reached, nodes))?;
                nodes += out.queries;
                best = best.min(out.best);
                if let Some(h) = out.hit {
                    debug_assert!(h.distance < eps);
                    let mut letters = self.word(qlevel, h.query);
                    letters.extend(self.word(i, h.owner));
                    return self.finish(gs, target, letters, h.suffix, Some(eps), nodes);
                }
                reached = len;
            }
        }
        unreachable!()
    }

    /// Best word `L · R · s` with `|L| = ⌊k/2⌋`, `|R| = ⌈k/2⌉`, reported after free reduction.
    pub fn min_error(&mut self, gs: &GateSet, target: &UMat64, k: usize, limits: &Limits) -> Result<SynthResult> {
        let start = Instant::now();
        let mut r = self.min_error_inner(gs, target, k, limits)?;
        r.elapsed = start.elapsed();
        Ok(r)
    }

    fn min_error_inner(&mut self, gs: &GateSet, target: &UMat64, k: usize, limits: &Limits) -> Result<SynthResult> {
        let ts = self.targets(target)?;
        let (a, b) = (k / 2, k - k / 2);
        if !self.fits(b, limits.max_memory_bytes) {
            return Err(limit("memory", f64::INFINITY, 0, 0));
        }
        self.ensure_tree(b)?;
        self.ensure_level(a);
        let tree = self.trees[b].as_ref().expect("tree built");
        let m = self.space.embed_dim();
        let prefixes = &self.levels[a].elems;
        let best = (0..prefixes.len())
            .into_par_iter()
            .map_init(
                || vec![0.0; m],
                |buf, q| {
                    let inv = self.space.adjoint(&prefixes[q]);
                    let mut best = (f64::INFINITY, q, 0, 0);
                    for (s, t) in ts.iter().enumerate() {
                        self.space.write_copy(&self.space.mul(&inv, t), 0, buf);
                        let h = tree.nearest(buf);
                        let r = &self.levels[b].elems[h.owner_id];
                        let d = self.space.distance(&self.space.mul(&prefixes[q], r), t);
                        if d < best.0 {
                            best = (d, q, h.owner_id, s);
                        }
                    }
                    best
                },
            )
            .reduce(
                || (f64::INFINITY, usize::MAX, 0, 0),
                |x, y| if y.0 < x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x },
            );
        let (_, q, owner, suffix) = best;
        let mut letters = self.word(a, q);
        letters.extend(self.word(b, owner));
        let letters = reduce_word(&letters, |l| self.alphabet.inverse[l]);
        let nodes = (0..=b).map(|i| self.level_len(i) as u64).sum::<u64>() + (prefixes.len() * ts.len()) as u64;
        self.finish(gs, target, letters, suffix, None, nodes)
    }

    fn finish(
        &self,
        gs: &GateSet,
        target: &UMat64,
        letters: Vec<usize>,
        suffix: usize,
        epsilon: Option<f64>,
        nodes: u64,
    ) -> Result<SynthResult> {
        SynthResult::from_word(gs, target, Word { letters, suffix }, epsilon, nodes)
    }
}

fn limit(reason: &str, best: f64, depth: usize, nodes: u64) -> Error {
    Error::LimitExceeded(Box::new(LimitReport {
        reason: reason.into(),
        best_error: best,
        depth_reached: depth,
        nodes_expanded: nodes,
    }))
}

fn with_progress(e: Error, best: f64, depth: usize, nodes: u64) -> Error {
    match e {
        Error::LimitExceeded(r) => limit(&r.reason, best.min(r.best_error), depth, nodes + r.nodes_expanded),
        other => other,
    }
}

/// Target-independent search state for one gate set.
pub struct MitmSearcher {
    gs: GateSet,
    inner: Inner,
}

enum Inner {
    Su2(Frontier<Su2Space>),
    Sud(Frontier<SudSpace>),
}

impl MitmSearcher {
    pub fn new(gs: &GateSet) -> Result<Self> {
        let inner = if gs.dim() == 2 {
            Inner::Su2(Frontier::new(Su2Space, gs)?)
        } else {
            Inner::Sud(Frontier::new(SudSpace::new(gs.dim())?, gs)?)
        };
        Ok(Self { gs: gs.clone(), inner })
    }

    pub fn gateset(&self) -> &GateSet {
        &self.gs
    }

    pub fn search(&mut self, target: &UMat64, eps: f64, limits: &Limits) -> Result<SynthResult> {
        match &mut self.inner {
            Inner::Su2(f) => f.search(&self.gs, target, eps, limits),
            Inner::Sud(f) => f.search(&self.gs, target, eps, limits),
        }
    }

    pub fn min_error(&mut self, target: &UMat64, k: usize, limits: &Limits) -> Result<SynthResult> {
        match &mut self.inner {
            Inner::Su2(f) => f.min_error(&self.gs, target, k, limits),
            Inner::Sud(f) => f.min_error(&self.gs, target, k, limits),
        }
    }

    /// Sizes of the cached levels.
    pub fn level_sizes(&self) -> Vec<usize> {
        match &self.inner {
            Inner::Su2(f) => f.levels.iter().map(|l| l.elems.len()).collect(),
            Inner::Sud(f) => f.levels.iter().map(|l| l.elems.len()).collect(),
        }
    }
}

/// One-shot meet-in-the-middle search.
pub fn mitm_search(gs: &GateSet, target: &UMat64, eps: f64, limits: &Limits) -> Result<SynthResult> {
    MitmSearcher::new(gs)?.search(target, eps, limits)
}

/// Reference search: depth-first over reduced words of each length with
/// plain matrix products. Returns the first word (lexicographic in letter
/// index) of minimum length within `eps`.
pub fn brute_force_search(gs: &GateSet, target: &UMat64, eps: f64, max_len: usize) -> Result<SynthResult> {
    let start = Instant::now();
    check_epsilon(eps)?;
    if target.dim() != gs.dim() {
        return Err(Error::DimMismatch { expected: gs.dim(), found: target.dim() });
    }
    let suffixes: Vec<UMat64> = gs.suffixes().iter().map(|s| s.matrix.clone()).collect();
    let mut best = f64::INFINITY;
    let mut nodes = 0u64;
    for len in 0..=max_len {
        let mut letters = Vec::with_capacity(len);
        let found =
            dfs(gs, target, &suffixes, eps, len, &mut letters, &UMat64::identity(gs.dim()), &mut best, &mut nodes)?;
        if let Some((letters, suffix, _)) = found {
            let mut r = SynthResult::from_word(gs, target, Word { letters, suffix }, Some(eps), nodes)?;
            r.elapsed = start.elapsed();
            return Ok(r);
        }
    }
    Err(Error::NotFound { max_len, best_error: best })
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    gs: &GateSet,
    target: &UMat64,
    suffixes: &[UMat64],
    eps: f64,
    remaining: usize,
    letters: &mut Vec<usize>,
    acc: &UMat64,
    best: &mut f64,
    nodes: &mut u64,
) -> Result<Option<(Vec<usize>, usize, f64)>> {
    *nodes += 1;
    if remaining == 0 {
        let mut pick: Option<(usize, f64)> = None;
        for (s, m) in suffixes.iter().enumerate() {
            let d = dist_phase_invariant(&(m * acc), target)?;
            *best = best.min(d);
            if d < eps && pick.is_none_or(|p| d < p.1) {
                pick = Some((s, d));
            }
        }
        return Ok(pick.map(|(s, d)| (letters.clone(), s, d)));
    }
    for l in 0..gs.len() {
        if letters.last().is_some_and(|&p| gs.inverse_of(p) == l) {
            continue;
        }
        letters.push(l);
        let next = acc * &gs.basis()[l].matrix;
        let found = dfs(gs, target, suffixes, eps, remaining - 1, letters, &next, best, nodes)?;
        letters.pop();
        if found.is_some() {
            return Ok(found);
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateset::vbasis;
    use crate::linalg::haar_random;

    #[test]
    fn level_sizes_follow_branching() {
        let gs = vbasis(1).unwrap();
        let mut f = Frontier::new(Su2Space, &gs).unwrap();
        f.ensure_level(4);
        for i in 0..=4 {
            assert_eq!(f.levels[i].elems.len(), f.level_len(i));
        }
        assert_eq!(f.level_len(3), 6 * 25);
    }

    #[test]
    fn words_reproduce_elements() {
        let gs = vbasis(1).unwrap();
        let mut f = Frontier::new(Su2Space, &gs).unwrap();
        f.ensure_level(3);
        for idx in [0, 17, 149] {
            let w = f.word(3, idx);
            let m = gs.word_matrix(&w);
            let e = f.elem(3, idx).to_matrix();
            assert!(dist_phase_invariant(&m, &e).unwrap() < 1e-12);
            assert_eq!(reduce_word(&w, |l| gs.inverse_of(l)), w);
        }
    }

    #[test]
    fn finds_basis_elements_exactly() {
        let gs = vbasis(1).unwrap();
        let mut s = MitmSearcher::new(&gs).unwrap();
        let target = gs.word_matrix(&[0, 2, 4, 3]);
        let r = s.search(&target, 1e-6, &Limits::default()).unwrap();
        assert_eq!(r.word.len(), 4);
        verify(&gs, &r, &target).unwrap();
    }

    #[test]
    fn agrees_with_brute_force() {
        let gs = vbasis(1).unwrap();
        let mut s = MitmSearcher::new(&gs).unwrap();
        for seed in 0..20 {
            let t = haar_random::<f64>(2, seed);
            let fast = s.search(&t, 0.2, &Limits::default()).unwrap();
            let slow = brute_force_search(&gs, &t, 0.2, 12).unwrap();
            assert_eq!(fast.word.len(), slow.word.len(), "seed {seed}");
            verify(&gs, &fast, &t).unwrap();
        }
    }

    #[test]
    fn limits_are_reported() {
        let gs = vbasis(1).unwrap();
        let t = haar_random::<f64>(2, 5);
        let err = mitm_search(&gs, &t, 1e-6, &Limits::with_max_len(4)).unwrap_err();
        assert!(matches!(err, Error::NotFound { max_len: 4, .. }));
        let tiny = Limits { max_memory_bytes: 1000, ..Limits::default() };
        let err = mitm_search(&gs, &t, 1e-6, &tiny).unwrap_err();
        match err {
            Error::LimitExceeded(r) => assert!(r.best_error.is_finite()),
            other => panic!("{other}"),
        }
        assert!(matches!(mitm_search(&gs, &t, 0.0, &Limits::default()), Err(Error::Validation(_))));
    }

    #[test]
    fn min_error_shrinks_with_length() {
        let gs = vbasis(1).unwrap();
        let mut s = MitmSearcher::new(&gs).unwrap();
        let t = haar_random::<f64>(2, 9);
        let e4 = s.min_error(&t, 4, &Limits::default()).unwrap().error;
        let e8 = s.min_error(&t, 8, &Limits::default()).unwrap().error;
        assert!(e8 <= e4);
    }

    #[test]
    fn verify_detects_corruption() {
        let gs = vbasis(1).unwrap();
        let t = haar_random::<f64>(2, 11);
        let mut r = mitm_search(&gs, &t, 0.05, &Limits::default()).unwrap();
        verify(&gs, &r, &t).unwrap();
        let l = r.word.letters[0];
        r.word.letters[0] = (l + 1) % gs.len();
        assert!(matches!(verify(&gs, &r, &t), Err(Error::Integrity(_))));
        r.word.letters[0] = gs.len();
        assert!(matches!(verify(&gs, &r, &t), Err(Error::Integrity(_))));
    }

    #[test]
    fn memory_budget_is_capped() {
        let b = default_memory_budget();
        assert!(b > 0 && b <= 8 << 30);
    }
}
