//! Search for conditionally controlled gates `C(A, B) = diag(A, B)`.
//!
//! A word is a sequence of steps `s_1 … s_n` (see [`CcStep`]) realizing
//! `C(A', B') = C(s_1) · … · C(s_n)`. Only `A'^† B'` matters for the
//! search: it equals `L(s_n) ⋯ L(s_1) · R(s_1) ⋯ R(s_n)` with
//! `L(s) = V_a^{-i1}` and `R(s) = V_a^{i2}`, so the group element grows
//! two-sided from the middle. Inner parts (the center, steps `1..=k`) are
//! cached in levels and kd-trees; outer parts are enumerated depth-first as
//! pairs `(Ll, Lr)` and matched through the query `Ll^† T Lr^†`.
//!
//! Adjacent inverse pairs are always skipped. Same-axis steps commute, so
//! with the canonical filter enabled, sequences where a step with `i1 ≠ i2`
//! is directly followed by an `i1 = i2` step on the same axis are skipped too.

use std::time::{Duration, Instant};

use num_complex::Complex;
use rayon::prelude::*;

use crate::circuit::{CircuitTemplate, Gate};
use crate::error::{Error, LimitReport, Result};
use crate::gateset::CcStep;
use crate::linalg::{dist_phase_invariant, UMat};
use crate::mitm::{check_epsilon, Limits};
use crate::nns::{KdTree, NearestNeighbor};
use crate::space::{SearchSpace, Su2Space};
use crate::{Quat64, UMat64};

/// Default longest step sequence.
pub const DEFAULT_MAX_STEPS: usize = 20;

/// Outer prefixes handled as one parallel batch.
const GROUP: usize = 64;

/// Depth of the outer prefixes that split the depth-first enumeration.
const SPLIT_DEPTH: usize = 3;

/// Whether step `next` may directly follow `prev` (outward) in a canonical word.
pub fn step_allowed(prev: CcStep, next: CcStep) -> bool {
    if next == prev.inverse() {
        return false;
    }
    !(prev.axis == next.axis && prev.i1 != prev.i2 && next.i1 == next.i2)
}

fn allowed(canonical: bool, prev: CcStep, next: CcStep) -> bool {
    if canonical {
        step_allowed(prev, next)
    } else {
        next != prev.inverse()
    }
}

/// A step sequence; `steps[0]` is the innermost step `s_1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CcWord {
    pub steps: Vec<CcStep>,
}

impl CcWord {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `A'^† B'` as a quaternion.
    pub fn constraint(&self) -> Quat64 {
        let mut w = Quat64::identity();
        for s in &self.steps {
            w = s.top().adjoint() * w * s.bottom();
        }
        w
    }

    pub fn text(&self) -> String {
        if self.steps.is_empty() {
            return "I".into();
        }
        self.steps.iter().map(|s| s.label()).collect::<Vec<_>>().join(" ")
    }
}

/// `C(s_1) · … · C(s_n)` as a 4×4 matrix.
pub fn assemble_cc(steps: &[CcStep]) -> UMat64 {
    let (mut a, mut b) = (Quat64::identity(), Quat64::identity());
    for s in steps {
        a = a * s.top();
        b = b * s.bottom();
    }
    UMat::direct_sum(&[a.to_matrix(), b.to_matrix()])
}

/// Gate list for `C(s_1) ⋯ C(s_n)`, optionally times `Z ⊗ I`; step `s_n` acts first.
pub fn emit_circuit(word: &CcWord, flip: bool) -> CircuitTemplate {
    let mut gates = Vec::new();
    if flip {
        gates.push(Gate::Z(0));
    }
    for s in word.steps.iter().rev() {
        gates.extend(s.template().gates);
    }
    CircuitTemplate::new("cc", 2, gates)
}

#[derive(Debug, Clone)]
pub struct CcResult {
    pub word: CcWord,
    /// Whether the bottom block is negated (a `Z` on the control).
    pub flip: bool,
    /// Realized gate `diag(A', ±B')`.
    pub controlled: UMat64,
    pub circuit: CircuitTemplate,
    /// Phase-invariant distance between `A'^† (±B')` and the requested product.
    pub error: f64,
    pub vcount: usize,
    pub epsilon: Option<f64>,
    pub nodes_expanded: u64,
    pub elapsed: Duration,
}

impl CcResult {
    fn new(word: CcWord, target: &Quat64, epsilon: Option<f64>, nodes: u64) -> Result<Self> {
        let w = word.constraint();
        let flip = w.dot(target) < 0.0;
        let mut controlled = assemble_cc(&word.steps);
        if flip {
            for r in 2..4 {
                for c in 2..4 {
                    controlled.set(r, c, -controlled.get(r, c));
                }
            }
        }
        let product = &controlled.block(0, 2).adjoint() * &controlled.block(1, 2);
        let error = dist_phase_invariant(&product, &target.to_matrix())?;
        Ok(Self {
            circuit: emit_circuit(&word, flip),
            vcount: word.len(),
            word,
            flip,
            controlled,
            error,
            epsilon,
            nodes_expanded: nodes,
            elapsed: Duration::ZERO,
        })
    }
}

/// The SU(2) element `A^† B` a controlled gate must realize, phase-normalized.
pub fn constraint_of(a: &UMat64, b: &UMat64) -> Result<UMat64> {
    if a.dim() != 2 || b.dim() != 2 {
        return Err(Error::DimMismatch { expected: 2, found: a.dim().max(b.dim()) });
    }
    Ok(&a.adjoint() * b)
}

struct CenterLevel {
    elems: Vec<Quat64>,
    parent: Vec<u32>,
    step: Vec<u8>,
}

/// Cached center levels and trees; independent of the target.
pub struct CcSearcher {
    levels: Vec<CenterLevel>,
    trees: Vec<Option<KdTree<f64>>>,
    canonical: bool,
}

impl Default for CcSearcher {
    fn default() -> Self {
        Self::new()
    }
}

struct Hit {
    outer: Vec<CcStep>,
    center: usize,
}

impl CcSearcher {
    /// Searcher without the canonical-order filter.
    pub fn new() -> Self {
        Self::with_canonical(false)
    }

    pub fn with_canonical(canonical: bool) -> Self {
        let root = CenterLevel { elems: vec![Quat64::identity()], parent: vec![u32::MAX], step: vec![u8::MAX] };
        Self { levels: vec![root], trees: vec![None], canonical }
    }

    pub fn canonical(&self) -> bool {
        self.canonical
    }

    /// Number of center words with `n` steps.
    pub fn level_len(&self, n: usize) -> usize {
        if self.canonical {
            crate::counting::transfer_count(n).try_into().unwrap_or(usize::MAX)
        } else if n == 0 {
            1
        } else {
            11usize.checked_pow(n as u32 - 1).and_then(|x| x.checked_mul(12)).unwrap_or(usize::MAX)
        }
    }

    fn bytes_for(n: usize) -> usize {
        let elems = n.saturating_mul(std::mem::size_of::<Quat64>() + 5);
        let tree = KdTree::<f64>::estimated_bytes(n.saturating_mul(2), 4).saturating_add(n * 8);
        elems.saturating_add(tree)
    }

    fn fits(&self, depth: usize, budget: usize) -> bool {
        let need: usize = (0..=depth).map(|k| Self::bytes_for(self.level_len(k))).sum();
        need <= budget
    }

    fn ensure_level(&mut self, depth: usize) {
        while self.levels.len() <= depth {
            let next = expand(self.levels.last().expect("root"), self.levels.len() == 1, self.canonical);
            self.levels.push(next);
            self.trees.push(None);
        }
    }

    fn ensure_tree(&mut self, depth: usize) -> Result<()> {
        self.ensure_level(depth);
        if self.trees[depth].is_some() {
            return Ok(());
        }
        let elems = &self.levels[depth].elems;
        let mut coords = vec![0.0; elems.len() * 8];
        coords.par_chunks_mut(8).zip(elems).for_each(|(out, e)| {
            Su2Space.write_copy(e, 0, &mut out[..4]);
            Su2Space.write_copy(e, 1, &mut out[4..]);
        });
        let owners = (0..elems.len() as u32).flat_map(|o| [o, o]).collect();
        self.trees[depth] = Some(KdTree::build_flat(4, coords, owners)?);
        Ok(())
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.elems.len()).collect()
    }

    /// Steps of center element `idx` at `depth`, innermost first.
    fn center_steps(&self, depth: usize, mut idx: usize) -> Vec<CcStep> {
        let mut out = Vec::with_capacity(depth);
        for k in (1..=depth).rev() {
            let lv = &self.levels[k];
            out.push(CcStep::from_index(lv.step[idx] as usize));
            idx = lv.parent[idx] as usize;
        }
        out.reverse();
        out
    }

    /// Shortest admissible step sequence whose `A'^† B'` is within `eps` of `product`.
    pub fn search(&mut self, product: &UMat64, eps: f64, limits: &Limits) -> Result<CcResult> {
        let start = Instant::now();
        let mut r = self.search_inner(product, eps, limits)?;
        r.elapsed = start.elapsed();
        Ok(r)
    }

    fn search_inner(&mut self, product: &UMat64, eps: f64, limits: &Limits) -> Result<CcResult> {
        check_epsilon(eps)?;
        let t = Su2Space.from_matrix(product)?;
        let max_len = limits.max_len.unwrap_or(DEFAULT_MAX_STEPS);
        let mut nodes = 1u64;
        let mut best = Quat64::identity().distance(&t);
        if best < eps {
            return CcResult::new(CcWord { steps: Vec::new() }, &t, Some(eps), nodes);
        }
        let radius = Su2Space.radius(eps) * (1.0 + 1e-9) + 1e-15;
        let mut reached = 0;
        for i in 1.. {
            if 2 * i - 1 > max_len {
                return Err(Error::NotFound { max_len, best_error: best });
            }
            if !self.fits(i, limits.max_memory_bytes) {
                return Err(limit("memory", best, reached, nodes));
            }
            self.ensure_tree(i)?;
            nodes += self.levels[i].elems.len() as u64;
            let tree = self.trees[i].as_ref().expect("built");
            let h = tree.nearest(&t.coords());
            best = best.min(self.levels[i].elems[h.owner_id].distance(&t));
            for outer in [i - 1, i] {
                let len = outer + i;
                if len > max_len {
                    break;
                }
                let (hit, queries, seen) = self.outer_pass(outer, i, &t, eps, radius, limits.deadline);
                nodes += queries;
                best = best.min(seen);
                match hit {
                    Ok(Some(h)) => {
                        let mut steps = self.center_steps(i, h.center);
                        steps.extend(h.outer.iter().rev());
                        return CcResult::new(CcWord { steps }, &t, Some(eps), nodes);
                    }
                    Ok(None) => reached = len,
                    Err(()) => return Err(limit("deadline", best, reached, nodes)),
                }
            }
        }
        unreachable!()
    }

    /// Scans outer pairs of depth `outer` (outermost step first, lexicographic)
    /// against the center tree at `depth`.
    fn outer_pass(
        &self,
        outer: usize,
        depth: usize,
        t: &Quat64,
        eps: f64,
        radius: f64,
        deadline: Option<Instant>,
    ) -> (std::result::Result<Option<Hit>, ()>, u64, f64) {
        let tree = self.trees[depth].as_ref().expect("built");
        let centers = &self.levels[depth];
        // The junction between outer and center steps is not constrained; a
        // non-canonical join has a canonical form of equal or shorter length.
        let query = |ll: &Quat64, lr: &Quat64| -> (Option<usize>, f64) {
            let x = ll.adjoint() * *t * lr.adjoint();
            let Some(h) = tree.nearest_within(&x.coords(), radius) else {
                return (None, f64::INFINITY);
            };
            let c = h.owner_id;
            let d = (*ll * centers.elems[c] * *lr).distance(t);
            ((d < eps).then_some(c), d)
        };
        let prefixes = outer_prefixes(outer.min(SPLIT_DEPTH), self.canonical);
        let mut queries = 0u64;
        let mut best = f64::INFINITY;
        for group in prefixes.chunks(GROUP) {
            if deadline.is_some_and(|d| Instant::now() > d) {
                return (Err(()), queries, best);
            }
            let results: Vec<(Option<(u64, Hit)>, u64, f64)> = group
                .par_iter()
                .map(|p| {
                    let (ll, lr) = pair_of(p);
                    let mut count = 0u64;
                    let mut seen = f64::INFINITY;
                    let mut path = p.clone();
                    let found = dfs(self.canonical, outer - p.len(), &mut path, ll, lr, &mut |path, ll, lr| {
                        count += 1;
                        let (c, d) = query(ll, lr);
                        seen = seen.min(d);
                        c.map(|c| Hit { outer: path.to_vec(), center: c })
                    });
                    (found.map(|h| (count, h)), count, seen)
                })
                .collect();
            for (found, count, seen) in results {
                best = best.min(seen);
                if let Some((pos, h)) = found {
                    return (Ok(Some(h)), queries + pos, best);
                }
                queries += count;
            }
        }
        (Ok(None), queries, best)
    }

    /// Best sequence of exactly `n` steps (split `⌊n/2⌋` outer, `⌈n/2⌉` center).
    pub fn min_error(&mut self, product: &UMat64, n: usize, limits: &Limits) -> Result<CcResult> {
        let start = Instant::now();
        let mut r = self.min_error_inner(product, n, limits)?;
        r.elapsed = start.elapsed();
        Ok(r)
    }

    fn min_error_inner(&mut self, product: &UMat64, n: usize, limits: &Limits) -> Result<CcResult> {
        let t = Su2Space.from_matrix(product)?;
        let (outer, depth) = (n / 2, n - n / 2);
        if !self.fits(depth, limits.max_memory_bytes) {
            return Err(limit("memory", f64::INFINITY, 0, 0));
        }
        self.ensure_tree(depth)?;
        let tree = self.trees[depth].as_ref().expect("built");
        let centers = &self.levels[depth];
        let prefixes = outer_prefixes(outer.min(SPLIT_DEPTH), self.canonical);
        let per: Vec<(f64, Vec<CcStep>, usize, u64)> = prefixes
            .par_iter()
            .map(|p| {
                let (ll, lr) = pair_of(p);
                let mut best = (f64::INFINITY, Vec::new(), 0usize);
                let mut count = 0u64;
                let mut path = p.clone();
                let _ = dfs(self.canonical, outer - p.len(), &mut path, ll, lr, &mut |path, ll, lr| {
                    count += 1;
                    let x = ll.adjoint() * t * lr.adjoint();
                    let c = tree.nearest(&x.coords()).owner_id;
                    let d = (*ll * centers.elems[c] * *lr).distance(&t);
                    if d < best.0 {
                        best = (d, path.to_vec(), c);
                    }
                    None::<()>
                });
                (best.0, best.1, best.2, count)
            })
            .collect();
        let nodes: u64 = per.iter().map(|x| x.3).sum::<u64>() + self.levels[depth].elems.len() as u64;
        let (_, outer_steps, c, _) =
            per.into_iter().reduce(|x, y| if y.0 < x.0 { y } else { x }).expect("at least one prefix");
        let mut steps = self.center_steps(depth, c);
        steps.extend(outer_steps.iter().rev());
        CcResult::new(CcWord { steps }, &t, None, nodes)
    }
}

fn expand(prev: &CenterLevel, from_root: bool, canonical: bool) -> CenterLevel {
    let children = |p: usize| -> Vec<CcStep> {
        if from_root {
            CcStep::all().collect()
        } else {
            let last = CcStep::from_index(prev.step[p] as usize);
            CcStep::all().filter(|&s| allowed(canonical, last, s)).collect()
        }
    };
    const BLOCK: usize = 1 << 14;
    let n_parents = prev.elems.len();
    let mut offsets = Vec::with_capacity(n_parents.div_ceil(BLOCK) + 1);
    let mut total = 0usize;
    for start in (0..n_parents).step_by(BLOCK) {
        offsets.push(total);
        total += (start..(start + BLOCK).min(n_parents)).map(|p| children(p).len()).sum::<usize>();
    }
    let mut elems = vec![Quat64::identity(); total];
    let mut parent = vec![0u32; total];
    let mut step = vec![0u8; total];
    let mut jobs = Vec::with_capacity(offsets.len());
    let (mut e_rest, mut p_rest, mut s_rest) = (&mut elems[..], &mut parent[..], &mut step[..]);
    for (b, start) in (0..n_parents).step_by(BLOCK).enumerate() {
        let len = offsets.get(b + 1).copied().unwrap_or(total) - offsets[b];
        let (e, er) = e_rest.split_at_mut(len);
        let (p, pr) = p_rest.split_at_mut(len);
        let (s, sr) = s_rest.split_at_mut(len);
        (e_rest, p_rest, s_rest) = (er, pr, sr);
        jobs.push((start, e, p, s));
    }
    jobs.into_par_iter().for_each(|(start, e, par, st)| {
        let mut k = 0;
        for p in start..(start + BLOCK).min(n_parents) {
            for s in children(p) {
                e[k] = s.top().adjoint() * prev.elems[p] * s.bottom();
                par[k] = p as u32;
                st[k] = s.index() as u8;
                k += 1;
            }
        }
    });
    CenterLevel { elems, parent, step }
}

/// All admissible outer sequences of length `depth`, outermost first, lexicographic.
fn outer_prefixes(depth: usize, canonical: bool) -> Vec<Vec<CcStep>> {
    let mut out = vec![Vec::new()];
    for _ in 0..depth {
        out = out
            .into_iter()
            .flat_map(|p: Vec<CcStep>| {
                CcStep::all()
                    .filter(|&t| p.last().is_none_or(|&u| allowed(canonical, t, u)))
                    .map(|t| {
                        let mut q = p.clone();
                        q.push(t);
                        q
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    out
}

/// `(Ll, Lr)` for an outer sequence listed outermost first.
fn pair_of(outer: &[CcStep]) -> (Quat64, Quat64) {
    let (mut ll, mut lr) = (Quat64::identity(), Quat64::identity());
    for s in outer {
        ll = ll * s.top().adjoint();
        lr = s.bottom() * lr;
    }
    (ll, lr)
}

/// Depth-first enumeration extending `path` inward by `remaining` steps;
/// stops at the first `Some` returned by `visit`.
fn dfs<R>(
    canonical: bool,
    remaining: usize,
    path: &mut Vec<CcStep>,
    ll: Quat64,
    lr: Quat64,
    visit: &mut impl FnMut(&[CcStep], &Quat64, &Quat64) -> Option<R>,
) -> Option<R> {
    if remaining == 0 {
        return visit(path, &ll, &lr);
    }
    for t in CcStep::all() {
        if path.last().is_some_and(|&u| !allowed(canonical, t, u)) {
            continue;
        }
        path.push(t);
        let found = dfs(canonical, remaining - 1, path, ll * t.top().adjoint(), t.bottom() * lr, visit);
        path.pop();
        if found.is_some() {
            return found;
        }
    }
    None
}

fn limit(reason: &str, best: f64, depth: usize, nodes: u64) -> Error {
    Error::LimitExceeded(Box::new(LimitReport {
        reason: reason.into(),
        best_error: best,
        depth_reached: depth,
        nodes_expanded: nodes,
    }))
}

/// One-shot search for a controlled gate approximating `diag(A, B)` up to a
/// single-qubit gate on the target: returns steps realizing `A^† B`.
pub fn cc_search(a: &UMat64, b: &UMat64, eps: f64, limits: &Limits) -> Result<CcResult> {
    CcSearcher::new().search(&constraint_of(a, b)?, eps, limits)
}

/// Reference search with plain 2×2 matrix products over all step sequences
/// (only adjacent inverses skipped), shortest first.
pub fn cc_brute_force(product: &UMat64, eps: f64, max_len: usize) -> Result<CcResult> {
    let start = Instant::now();
    check_epsilon(eps)?;
    let t = Su2Space.from_matrix(product)?;
    let tm = t.to_matrix();
    let blocks: Vec<(UMat64, UMat64)> = CcStep::all().map(|s| (s.top().to_matrix(), s.bottom().to_matrix())).collect();
    let mut best = f64::INFINITY;
    let mut nodes = 0u64;
    for len in 0..=max_len {
        let mut path = Vec::with_capacity(len);
        if let Some(steps) =
            brute(len, &mut path, &UMat::identity(2), &UMat::identity(2), &blocks, &tm, eps, &mut best, &mut nodes)
        {
            let mut r = CcResult::new(CcWord { steps }, &t, Some(eps), nodes)?;
            r.elapsed = start.elapsed();
            return Ok(r);
        }
    }
    Err(Error::NotFound { max_len, best_error: best })
}

#[allow(clippy::too_many_arguments)]
fn brute(
    remaining: usize,
    path: &mut Vec<CcStep>,
    a: &UMat64,
    b: &UMat64,
    blocks: &[(UMat64, UMat64)],
    t: &UMat64,
    eps: f64,
    best: &mut f64,
    nodes: &mut u64,
) -> Option<Vec<CcStep>> {
    *nodes += 1;
    if remaining == 0 {
        let d = dist_phase_invariant(&(&a.adjoint() * b), t).expect("2x2");
        *best = best.min(d);
        return (d < eps).then(|| path.clone());
    }
    for s in CcStep::all() {
        if path.last().is_some_and(|&p| p.inverse() == s) {
            continue;
        }
        let (ta, tb) = &blocks[s.index()];
        path.push(s);
        let found = brute(remaining - 1, path, &(a * ta), &(b * tb), blocks, t, eps, best, nodes);
        path.pop();
        if found.is_some() {
            return found;
        }
    }
    None
}

/// `Z ⊗ I`, the control-qubit sign fix.
pub fn control_z() -> UMat64 {
    let mut z = UMat::identity(4);
    for k in 2..4 {
        z.set(k, k, Complex::new(-1.0, 0.0));
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::haar_random;

    #[test]
    fn constraint_matches_blocks() {
        let steps: Vec<CcStep> = [0, 5, 9, 2, 11].iter().map(|&i| CcStep::from_index(i)).collect();
        let word = CcWord { steps: steps.clone() };
        let c = assemble_cc(&steps);
        let prod = &c.block(0, 2).adjoint() * &c.block(1, 2);
        assert!(word.constraint().to_matrix().max_abs_diff(&prod) < 1e-12);
        let circ = emit_circuit(&word, true);
        let expect = &c * &control_z();
        assert!(circ.product().max_abs_diff(&expect) < 1e-12);
        assert_eq!(circ.vcount(), 5);
    }

    #[test]
    fn canonical_rule_only_drops_commuting_swaps() {
        for p in CcStep::all() {
            for n in CcStep::all() {
                if n != p.inverse() && !step_allowed(p, n) {
                    let ab = assemble_cc(&[p, n]);
                    let ba = assemble_cc(&[n, p]);
                    assert!(ab.max_abs_diff(&ba) < 1e-12);
                    assert!(step_allowed(n, p));
                }
            }
        }
    }

    #[test]
    fn level_sizes_match_count() {
        for canonical in [false, true] {
            let mut s = CcSearcher::with_canonical(canonical);
            s.ensure_level(4);
            for k in 0..=4 {
                assert_eq!(s.level_sizes()[k], s.level_len(k));
            }
        }
        assert_eq!(CcSearcher::new().level_len(3), 12 * 121);
    }

    #[test]
    fn agrees_with_brute_force() {
        let mut plain = CcSearcher::new();
        let mut canon = CcSearcher::with_canonical(true);
        for seed in 0..15 {
            let t = haar_random::<f64>(2, 300 + seed);
            let slow = cc_brute_force(&t, 0.25, 8).unwrap();
            for s in [&mut plain, &mut canon] {
                let fast = s.search(&t, 0.25, &Limits::default()).unwrap();
                assert_eq!(fast.vcount, slow.vcount, "seed {seed}");
                assert!(fast.error < 0.25);
            }
        }
    }

    #[test]
    fn result_realizes_product() {
        let a = haar_random::<f64>(2, 1);
        let b = haar_random::<f64>(2, 2);
        let r = cc_search(&a, &b, 0.05, &Limits::default()).unwrap();
        let got = &r.controlled.block(0, 2).adjoint() * &r.controlled.block(1, 2);
        let want = constraint_of(&a, &b).unwrap();
        assert!(dist_phase_invariant(&got, &want).unwrap() < 0.05);
        assert!(r.circuit.product().max_abs_diff(&r.controlled) < 1e-12);
    }
}
