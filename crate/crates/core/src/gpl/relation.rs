use std::collections::HashMap;

use indexmap::IndexMap;

use super::{CondId, GplError, RelAtom};
use crate::point::{Point, PointSeq, Var};

pub type Tuple = PointSeq;

/// A set of tuples over ordered variables. Each tuple carries the sorted ids
/// of the conditions that produced it.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Relation {
    pub vars: Vec<Var>,
    pub rows: IndexMap<Tuple, Vec<CondId>>,
}

impl Relation {
    pub fn new(vars: Vec<Var>) -> Relation {
        Relation { vars, rows: IndexMap::new() }
    }

    /// The single empty tuple; identity of `join`.
    pub fn unit() -> Relation {
        let mut r = Relation::new(vec![]);
        r.rows.insert(vec![], vec![]);
        r
    }

    pub fn from_tuples(vars: Vec<Var>, tuples: impl IntoIterator<Item = Tuple>) -> Relation {
        let mut r = Relation::new(vars);
        for t in tuples {
            r.insert(t, vec![]);
        }
        r
    }

    pub fn insert(&mut self, tuple: Tuple, premises: Vec<CondId>) {
        debug_assert_eq!(tuple.len(), self.vars.len());
        self.rows.entry(tuple).or_insert(premises);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn tuples(&self) -> impl Iterator<Item = &Tuple> {
        self.rows.keys()
    }

    pub fn slot(&self, v: Var) -> Option<usize> {
        self.vars.iter().position(|&x| x == v)
    }

    /// Rows re-ordered to the given variable order.
    pub fn permuted(&self, order: &[Var]) -> Option<Relation> {
        let idx: Vec<usize> = order.iter().map(|&v| self.slot(v)).collect::<Option<_>>()?;
        if order.len() != self.vars.len() {
            return None;
        }
        let mut r = Relation::new(order.to_vec());
        for (t, p) in &self.rows {
            r.insert(idx.iter().map(|&i| t[i]).collect(), p.clone());
        }
        Some(r)
    }
}

pub(crate) fn merge_premises(a: &[CondId], b: &[CondId]) -> Vec<CondId> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x == y => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(_), Some(&y)) => {
                j += 1;
                y
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        out.push(next);
    }
    out
}

/// Constrained product: tuples agreeing on shared variables are merged.
/// Result variables are `r1`'s followed by `r2`'s new ones.
pub fn join(r1: &Relation, r2: &Relation) -> Relation {
    let shared: Vec<(usize, usize)> = r1
        .vars
        .iter()
        .enumerate()
        .filter_map(|(i, &v)| r2.slot(v).map(|j| (i, j)))
        .collect();
    let fresh: Vec<usize> = (0..r2.vars.len()).filter(|&j| !r1.vars.contains(&r2.vars[j])).collect();
    let mut vars = r1.vars.clone();
    vars.extend(fresh.iter().map(|&j| r2.vars[j]));
    let mut out = Relation::new(vars);
    if r1.is_empty() || r2.is_empty() {
        return out;
    }
    let mut index: HashMap<Vec<Point>, Vec<(&Tuple, &Vec<CondId>)>> = HashMap::new();
    for (t, p) in &r2.rows {
        let key: Vec<Point> = shared.iter().map(|&(_, j)| t[j]).collect();
        index.entry(key).or_default().push((t, p));
    }
    for (t1, p1) in &r1.rows {
        let key: Vec<Point> = shared.iter().map(|&(i, _)| t1[i]).collect();
        if let Some(matches) = index.get(&key) {
            for (t2, p2) in matches {
                let mut t = t1.clone();
                t.extend(fresh.iter().map(|&j| t2[j]));
                out.insert(t, merge_premises(p1, p2));
            }
        }
    }
    out
}

/// Set union of two relations over the same variables (any order).
pub fn union_rel(r1: &Relation, r2: &Relation) -> Result<Relation, GplError> {
    let aligned = r2
        .permuted(&r1.vars)
        .ok_or_else(|| GplError::StructureMismatch(r1.vars.clone(), r2.vars.clone()))?;
    let mut out = r1.clone();
    for (t, p) in aligned.rows {
        out.insert(t, p);
    }
    Ok(out)
}

fn injective_tuples(universe: &[Point], len: usize) -> Vec<Tuple> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        let mut next = Vec::new();
        for t in &out {
            for &p in universe {
                if !t.contains(&p) {
                    let mut n = t.clone();
                    n.push(p);
                    next.push(n);
                }
            }
        }
        out = next;
    }
    out
}

/// All distinct-point tuples over `universe` not in `r`.
pub fn complement_rel(r: &Relation, universe: &[Point]) -> Relation {
    let mut out = Relation::new(r.vars.clone());
    for t in injective_tuples(universe, r.vars.len()) {
        if !r.rows.contains_key(&t) {
            out.insert(t, vec![]);
        }
    }
    out
}

/// Keeps rows whose projection onto `r2`'s variables has distinct points
/// and is absent from `r2`. Equivalent to joining with the complement when
/// `r2`'s variables are all bound.
pub fn anti_filter(r1: &Relation, r2: &Relation) -> Relation {
    let idx: Vec<usize> = r2.vars.iter().map(|&v| r1.slot(v).expect("bound variable")).collect();
    let mut out = Relation::new(r1.vars.clone());
    for (t, p) in &r1.rows {
        let proj: Tuple = idx.iter().map(|&i| t[i]).collect();
        let distinct = (0..proj.len()).all(|i| !proj[..i].contains(&proj[i]));
        if distinct && !r2.rows.contains_key(&proj) {
            out.insert(t.clone(), p.clone());
        }
    }
    out
}

/// Materializes an atom against a stored extension. Repeated variables in
/// the atom require equal points in those slots.
pub fn atom_relation<'a>(atom: &RelAtom, ext: impl IntoIterator<Item = (&'a Tuple, &'a CondId)>) -> Relation {
    let vars = atom.distinct_vars();
    let first: Vec<usize> = vars.iter().map(|v| atom.vars.iter().position(|x| x == v).unwrap()).collect();
    let repeated = vars.len() != atom.vars.len();
    let mut out = Relation::new(vars);
    for (t, &id) in ext {
        if t.len() != atom.vars.len() {
            continue;
        }
        if repeated {
            let ok = (0..t.len()).all(|i| t[i] == t[first[out.slot(atom.vars[i]).unwrap()]]);
            if !ok {
                continue;
            }
        }
        out.insert(first.iter().map(|&i| t[i]).collect(), vec![id]);
    }
    out
}

/// Keeps rows for which `check` holds, merging the premises it reports.
pub fn filter_algebraic<F>(r: &Relation, exec: crate::par::Exec, check: F) -> (Relation, usize)
where
    F: Fn(&[(Var, Point)]) -> super::ConstraintCheck + Sync + Send,
{
    let rows: Vec<(&Tuple, &Vec<CondId>)> = r.rows.iter().collect();
    let vars = &r.vars;
    let results = exec.map(&rows, |(t, _)| {
        let binding: Vec<(Var, Point)> = vars.iter().copied().zip(t.iter().copied()).collect();
        check(&binding)
    });
    let mut out = Relation::new(r.vars.clone());
    let mut timeouts = 0;
    for ((t, p), res) in rows.into_iter().zip(results) {
        if res.timed_out {
            timeouts += 1;
        }
        if res.holds {
            let mut extra = res.premises.clone();
            extra.sort_unstable();
            extra.dedup();
            out.insert(t.clone(), merge_premises(p, &extra));
        }
    }
    (out, timeouts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::points;

    fn rel(vars: &str, tuples: &[&str]) -> Relation {
        Relation::from_tuples(points(vars).unwrap(), tuples.iter().map(|t| points(t).unwrap()))
    }

    #[test]
    fn join_on_shared_slot() {
        let r1 = rel("XY", &["AB", "BC"]);
        let r2 = rel("YZ", &["BC", "CA"]);
        let r3 = join(&r1, &r2);
        assert_eq!(r3.vars, points("XYZ").unwrap());
        let got: Vec<_> = r3.tuples().cloned().collect();
        assert_eq!(got, vec![points("ABC").unwrap(), points("BCA").unwrap()]);
    }

    #[test]
    fn join_with_empty_is_empty() {
        let r1 = rel("XY", &[]);
        let r2 = rel("YZ", &["BC"]);
        assert!(join(&r1, &r2).is_empty());
        assert!(join(&r2, &r1).is_empty());
    }

    #[test]
    fn union_basic_and_idempotent() {
        let a = rel("XY", &["AB"]);
        let b = rel("XY", &["BC"]);
        assert_eq!(union_rel(&a, &b).unwrap().len(), 2);
        assert_eq!(union_rel(&a, &a).unwrap(), a);
        assert!(union_rel(&a, &rel("XZ", &["AB"])).is_err());
    }

    #[test]
    fn complement_examples() {
        let u = points("AB").unwrap();
        let r = rel("X", &["A"]);
        assert_eq!(complement_rel(&r, &u), rel("X", &["B"]));
        assert_eq!(complement_rel(&complement_rel(&r, &u), &u), r);
        let u3 = points("ABC").unwrap();
        assert_eq!(complement_rel(&rel("XY", &[]), &u3).len(), 6);
    }

    #[test]
    fn premises_merge_sorted() {
        assert_eq!(merge_premises(&[1, 4, 7], &[2, 4, 9]), vec![1, 2, 4, 7, 9]);
    }

    #[test]
    fn repeated_atom_variables() {
        let atom = RelAtom::new("R", points("XXY").unwrap());
        let ext: IndexMap<Tuple, CondId> = [(points("AAB").unwrap(), 0), (points("ABC").unwrap(), 1)].into_iter().collect();
        let r = atom_relation(&atom, &ext);
        assert_eq!(r.vars, points("XY").unwrap());
        assert_eq!(r.tuples().cloned().collect::<Vec<_>>(), vec![points("AB").unwrap()]);
    }
}
