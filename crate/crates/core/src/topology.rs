//! Point-sequence representation of closed shapes and their composition.

use std::collections::{BTreeMap, BTreeSet};

use crate::par::Exec;
use crate::point::{seq_string, Point, PointSeq};

/// Moves the first point to the end.
pub fn rotate(seq: &[Point]) -> PointSeq {
    let mut out = seq.to_vec();
    if !out.is_empty() {
        out.rotate_left(1);
    }
    out
}

/// Reverses the sequence.
pub fn reflect(seq: &[Point]) -> PointSeq {
    seq.iter().rev().copied().collect()
}

/// All rotations, starting with `seq` itself.
pub fn rotations(seq: &[Point]) -> Vec<PointSeq> {
    let mut out = Vec::with_capacity(seq.len());
    let mut cur = seq.to_vec();
    for _ in 0..seq.len().max(1) {
        out.push(cur.clone());
        cur = rotate(&cur);
    }
    out
}

/// Rotation-closed set of equivalent sequences for one shape.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TsiSet {
    reps: BTreeSet<PointSeq>,
}

impl TsiSet {
    pub fn reps(&self) -> impl Iterator<Item = &PointSeq> {
        self.reps.iter()
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn contains(&self, seq: &[Point]) -> bool {
        self.reps.contains(seq)
    }

    /// Lexicographically smallest rotation.
    pub fn canonical(&self) -> &PointSeq {
        self.reps.iter().next().expect("non-empty")
    }

    pub fn points(&self) -> BTreeSet<Point> {
        self.canonical().iter().copied().collect()
    }
}

pub fn multi_repr(seq: &[Point]) -> TsiSet {
    TsiSet { reps: rotations(seq).into_iter().collect() }
}

/// Merges two shapes sharing one boundary run.
///
/// The shared points must be exactly a contiguous run `p_i..p_j` of `pa`
/// (not wrapping) that appears reversed and cyclically contiguous in `pb`,
/// of length at least 2, with each shape keeping at least one point of its
/// own. The result keeps `pa` up to `p_i`, walks `pb` around the outside,
/// then continues from `p_j` to the end of `pa`.
pub fn compose_pair(pa: &[Point], pb: &[Point]) -> Option<PointSeq> {
    let (m, n) = (pa.len(), pb.len());
    let shared: BTreeSet<Point> = pa.iter().filter(|p| pb.contains(p)).copied().collect();
    let k = shared.len();
    if k < 2 || k >= m || k >= n {
        return None;
    }
    let start = pa.iter().position(|p| shared.contains(p))?;
    if start + k > m || !pa[start..start + k].iter().all(|p| shared.contains(p)) {
        return None;
    }
    let run = &pa[start..start + k];
    let (first, last) = (run[0], run[k - 1]);
    let j = pb.iter().position(|&p| p == last)?;
    for (t, &p) in run.iter().rev().enumerate() {
        if pb[(j + t) % n] != p {
            return None;
        }
    }
    let mut out = Vec::with_capacity(m + n - 2 * k + 2);
    out.extend_from_slice(&pa[..start]);
    out.push(first);
    for t in k..n {
        out.push(pb[(j + t) % n]);
    }
    out.push(last);
    out.extend_from_slice(&pa[start + k..]);
    debug_assert_eq!(out.len(), m + n - 2 * k + 2);
    Some(out)
}

/// Composes two shapes through the first composable pair of reps.
pub fn compose_sets(ra: &TsiSet, rb: &TsiSet) -> Option<TsiSet> {
    for pa in ra.reps() {
        for pb in rb.reps() {
            if let Some(s) = compose_pair(pa, pb) {
                return Some(multi_repr(&s));
            }
        }
    }
    None
}

/// Closure of the units under composition with previously built shapes.
///
/// Returns every reachable shape including the units, sorted by canonical
/// form. The result does not depend on the order of `units`.
pub fn construct_all(units: &[TsiSet], exec: Exec) -> Vec<TsiSet> {
    let mut results: BTreeMap<PointSeq, TsiSet> = BTreeMap::new();
    let mut unit_list: Vec<&TsiSet> = Vec::new();
    for u in units {
        if !u.is_empty() && !results.contains_key(u.canonical()) {
            results.insert(u.canonical().clone(), u.clone());
        }
    }
    unit_list.extend(results.values());
    let unit_list: Vec<TsiSet> = unit_list.into_iter().cloned().collect();
    let mut combs: Vec<TsiSet> = unit_list.clone();
    while !combs.is_empty() {
        let pairs: Vec<(&TsiSet, &TsiSet)> = unit_list.iter().flat_map(|u| combs.iter().map(move |c| (u, c))).collect();
        let merged = exec.map(&pairs, |(u, c)| {
            let r = compose_sets(u, c);
            if r.is_none() {
                let common = u.points().intersection(&c.points()).count();
                if common >= 2 && common < u.canonical().len() {
                    log::debug!(
                        "skipping {} + {}: shared points do not form one boundary run",
                        seq_string(u.canonical()),
                        seq_string(c.canonical())
                    );
                }
            }
            r
        });
        let mut next = Vec::new();
        for s in merged.into_iter().flatten() {
            if !results.contains_key(s.canonical()) {
                results.insert(s.canonical().clone(), s.clone());
                next.push(s);
            }
        }
        combs = next;
    }
    results.into_values().collect()
}
