//! Exact nearest-neighbour search over embedded group elements.
//!
//! [`KdTree`] is an implicit, balanced kd-tree: points are permuted in place so
//! that every subrange `[lo, hi)` stores its splitting point at the midpoint.
//! [`LinearScan`] is the brute-force oracle with the same distance arithmetic
//! and tie-breaking, so both return bit-identical hits.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::linalg::EmbedPoint;
use crate::scalar::Real;

/// Result of a nearest-neighbour query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NnHit<T> {
    /// Euclidean distance to the nearest stored point.
    pub distance: T,
    pub owner_id: usize,
}

/// Common interface of exact (and, potentially, approximate) indices.
pub trait NearestNeighbor<T: Real>: Sync {
    fn dim(&self) -> usize;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// Nearest stored point; ties go to the smallest owner id.
    fn nearest(&self, query: &[T]) -> NnHit<T>;
    /// Nearest stored point within Euclidean distance `radius`, if any.
    fn nearest_within(&self, query: &[T], radius: T) -> Option<NnHit<T>> {
        Some(self.nearest(query)).filter(|h| h.distance <= radius)
    }
}

#[inline]
fn dist2<T: Real>(a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b) {
        let d = *x - *y;
        acc += d * d;
    }
    acc
}

/// `true` when `(d, owner)` beats the current best.
#[inline]
fn better<T: Real>(d: T, owner: u32, best_d: T, best_owner: u32) -> bool {
    d < best_d || (d == best_d && owner < best_owner)
}

/// Flat point storage shared by the index types.
#[derive(Debug, Clone)]
struct PointSet<T> {
    dim: usize,
    coords: Vec<T>,
    owners: Vec<u32>,
}

impl<T: Real> PointSet<T> {
    fn from_points(points: &[EmbedPoint<T>]) -> Result<Self> {
        let first = points.first().ok_or_else(|| Error::Validation("cannot index an empty point set".into()))?;
        let dim = first.coords.len();
        if dim == 0 {
            return Err(Error::Validation("points have zero dimension".into()));
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        let mut owners = Vec::with_capacity(points.len());
        for p in points {
            if p.coords.len() != dim {
                return Err(Error::DimMismatch { expected: dim, found: p.coords.len() });
            }
            coords.extend_from_slice(&p.coords);
            owners.push(owner_u32(p.owner_id)?);
        }
        Ok(Self { dim, coords, owners })
    }

    fn from_flat(dim: usize, coords: Vec<T>, owners: Vec<u32>) -> Result<Self> {
        if owners.is_empty() {
            return Err(Error::Validation("cannot index an empty point set".into()));
        }
        if dim == 0 || coords.len() != dim * owners.len() {
            return Err(Error::DimMismatch { expected: dim * owners.len(), found: coords.len() });
        }
        Ok(Self { dim, coords, owners })
    }

    #[inline]
    fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }
}

fn owner_u32(id: usize) -> Result<u32> {
    u32::try_from(id)
        .ok()
        .filter(|&v| v != u32::MAX)
        .ok_or_else(|| Error::Validation(format!("owner id {id} does not fit the index")))
}

/// Brute-force reference index.
#[derive(Debug, Clone)]
pub struct LinearScan<T> {
    set: PointSet<T>,
}

impl<T: Real> LinearScan<T> {
    pub fn build(points: &[EmbedPoint<T>]) -> Result<Self> {
        Ok(Self { set: PointSet::from_points(points)? })
    }
}

impl<T: Real> NearestNeighbor<T> for LinearScan<T> {
    fn dim(&self) -> usize {
        self.set.dim
    }

    fn len(&self) -> usize {
        self.set.owners.len()
    }

    fn nearest(&self, query: &[T]) -> NnHit<T> {
        let mut best = (T::infinity(), u32::MAX);
        for i in 0..self.set.owners.len() {
            let d = dist2(query, self.set.point(i));
            if better(d, self.set.owners[i], best.0, best.1) {
                best = (d, self.set.owners[i]);
            }
        }
        NnHit { distance: best.0.sqrt(), owner_id: best.1 as usize }
    }
}

/// Balanced kd-tree with median splits cycling through the coordinates.
#[derive(Debug, Clone)]
pub struct KdTree<T> {
    set: PointSet<T>,
}

impl<T: Real> KdTree<T> {
    pub fn build(points: &[EmbedPoint<T>]) -> Result<Self> {
        Self::from_set(PointSet::from_points(points)?)
    }

    /// Builds from row-major coordinates (`owners.len()` rows of `dim` values).
    ///
    /// This avoids materializing one `Vec` per point for large frontiers.
    pub fn build_flat(dim: usize, coords: Vec<T>, owners: Vec<u32>) -> Result<Self> {
        if owners.contains(&u32::MAX) {
            return Err(Error::Validation("owner id u32::MAX is reserved".into()));
        }
        Self::from_set(PointSet::from_flat(dim, coords, owners)?)
    }

    fn from_set(mut set: PointSet<T>) -> Result<Self> {
        let n = set.owners.len();
        if n > u32::MAX as usize {
            return Err(Error::Validation("too many points for a single index".into()));
        }
        let mut perm: Vec<u32> = (0..n as u32).collect();
        partition(&set, &mut perm, 0);
        apply_permutation(&mut set, perm);
        Ok(Self { set })
    }

    /// Approximate heap footprint in bytes for `n` points of dimension `dim`.
    pub fn estimated_bytes(n: usize, dim: usize) -> usize {
        n * (dim * std::mem::size_of::<T>() + 2 * std::mem::size_of::<u32>())
    }

    /// Number of tree nodes a query inspects; exposed for degeneracy checks.
    pub fn nodes_visited(&self, query: &[T]) -> usize {
        let mut best = (T::infinity(), u32::MAX);
        let mut visited = 0;
        self.search(query, 0, self.set.owners.len(), 0, &mut best, &mut visited);
        visited
    }

    fn search(&self, q: &[T], lo: usize, hi: usize, depth: usize, best: &mut (T, u32), visited: &mut usize) {
        if lo >= hi {
            return;
        }
        *visited += 1;
        let mid = lo + (hi - lo) / 2;
        let p = self.set.point(mid);
        let d = dist2(q, p);
        let owner = self.set.owners[mid];
        if better(d, owner, best.0, best.1) {
            *best = (d, owner);
        }
        if hi - lo == 1 {
            return;
        }
        let axis = depth % self.set.dim;
        let diff = q[axis] - p[axis];
        let (near, far) = if diff < T::zero() { ((lo, mid), (mid + 1, hi)) } else { ((mid + 1, hi), (lo, mid)) };
        self.search(q, near.0, near.1, depth + 1, best, visited);
        // `<=` keeps equal-distance points reachable for the owner tie-break.
        if diff * diff <= best.0 {
            self.search(q, far.0, far.1, depth + 1, best, visited);
        }
    }
}

impl<T: Real> NearestNeighbor<T> for KdTree<T> {
    fn dim(&self) -> usize {
        self.set.dim
    }

    fn len(&self) -> usize {
        self.set.owners.len()
    }

    fn nearest(&self, query: &[T]) -> NnHit<T> {
        let mut best = (T::infinity(), u32::MAX);
        let mut visited = 0;
        self.search(query, 0, self.set.owners.len(), 0, &mut best, &mut visited);
        NnHit { distance: best.0.sqrt(), owner_id: best.1 as usize }
    }

    fn nearest_within(&self, query: &[T], radius: T) -> Option<NnHit<T>> {
        let mut best = (radius * radius, u32::MAX);
        let mut visited = 0;
        self.search(query, 0, self.set.owners.len(), 0, &mut best, &mut visited);
        (best.1 != u32::MAX).then(|| NnHit { distance: best.0.sqrt(), owner_id: best.1 as usize })
    }
}

/// Recursively arranges `perm` so each subrange has its median (on the
/// depth's axis) at the midpoint, smaller-or-equal keys to the left.
fn partition<T: Real>(set: &PointSet<T>, perm: &mut [u32], depth: usize) {
    if perm.len() <= 1 {
        return;
    }
    let axis = depth % set.dim;
    let mid = perm.len() / 2;
    perm.select_nth_unstable_by(mid, |&a, &b| {
        let (x, y) = (set.point(a as usize)[axis], set.point(b as usize)[axis]);
        x.partial_cmp(&y).unwrap_or(Ordering::Equal).then(a.cmp(&b))
    });
    let (left, right) = perm.split_at_mut(mid);
    if perm_len_is_large(left.len()) {
        rayon::join(|| partition(set, left, depth + 1), || partition(set, &mut right[1..], depth + 1));
    } else {
        partition(set, left, depth + 1);
        partition(set, &mut right[1..], depth + 1);
    }
}

fn perm_len_is_large(n: usize) -> bool {
    n >= 1 << 15
}

/// Reorders points so slot `i` holds the point previously at `perm[i]`.
fn apply_permutation<T: Real>(set: &mut PointSet<T>, mut perm: Vec<u32>) {
    let dim = set.dim;
    let mut tmp = vec![T::zero(); dim];
    for start in 0..perm.len() {
        if perm[start] as usize == start {
            continue;
        }
        tmp.copy_from_slice(set.point(start));
        let tmp_owner = set.owners[start];
        let mut slot = start;
        loop {
            let src = perm[slot] as usize;
            perm[slot] = slot as u32;
            if src == start {
                set.coords[slot * dim..(slot + 1) * dim].copy_from_slice(&tmp);
                set.owners[slot] = tmp_owner;
                break;
            }
            set.coords.copy_within(src * dim..(src + 1) * dim, slot * dim);
            set.owners[slot] = set.owners[src];
            slot = src;
        }
    }
}
