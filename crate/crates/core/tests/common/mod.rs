#![allow(dead_code)]

pub mod checks;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::{Hash, Hasher};
use std::path::PathBuf;

use indexmap::IndexMap;
use num::{BigInt, BigRational, Zero};
use plangeo_core::expr::Expr;
use plangeo_core::gpl::{Atom, CondId, ConstraintCheck, GplExpr, RelAtom, Relation, RelationSource, Tuple};
use plangeo_core::point::{Point, PointSeq, Var};
use plangeo_core::topology::{rotations, TsiSet};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/problems")
}

pub fn letter(i: usize) -> Point {
    Point(b'A' + i as u8)
}

// ---------- topology ----------

/// A convex polygon cut by random non-crossing diagonals. Faces are
/// counterclockwise and the dual graph is a tree.
pub fn convex_partition<R: Rng>(rng: &mut R, vertices: usize, max_faces: usize) -> Vec<PointSeq> {
    let mut labels: Vec<Point> = (0..26).map(letter).collect();
    labels.shuffle(rng);
    labels.truncate(vertices);
    let mut faces = vec![labels];
    for _ in 0..64 {
        if faces.len() >= max_faces {
            break;
        }
        let splittable: Vec<usize> = (0..faces.len()).filter(|&i| faces[i].len() >= 4).collect();
        let Some(&fi) = splittable.choose(rng) else { break };
        let f = faces.swap_remove(fi);
        let n = f.len();
        let i = rng.gen_range(0..n);
        let j = (i + rng.gen_range(2..n - 1)) % n;
        let (i, j) = (i.min(j), i.max(j));
        let a: PointSeq = f[i..=j].to_vec();
        let b: PointSeq = f[j..].iter().chain(f[..=i].iter()).copied().collect();
        faces.push(a);
        faces.push(b);
    }
    faces
}

fn directed_edges(face: &[Point]) -> Vec<(Point, Point)> {
    (0..face.len()).map(|i| (face[i], face[(i + 1) % face.len()])).collect()
}

pub fn adjacent(f: &[Point], g: &[Point]) -> bool {
    let ef: BTreeSet<_> = directed_edges(f).into_iter().collect();
    directed_edges(g).into_iter().any(|(a, b)| ef.contains(&(b, a)))
}

/// Boundary of a union of faces: cancel opposite edge pairs and walk what
/// is left. `None` unless the rest is one simple cycle.
pub fn union_boundary(faces: &[&PointSeq]) -> Option<PointSeq> {
    let mut edges: BTreeSet<(Point, Point)> = BTreeSet::new();
    for f in faces {
        for e in directed_edges(f) {
            if !edges.remove(&(e.1, e.0)) {
                edges.insert(e);
            }
        }
    }
    let mut next: BTreeMap<Point, Point> = BTreeMap::new();
    for &(a, b) in &edges {
        if next.insert(a, b).is_some() {
            return None;
        }
    }
    let start = *next.keys().next()?;
    let mut out = vec![start];
    let mut cur = next[&start];
    while cur != start {
        if out.len() > next.len() {
            return None;
        }
        out.push(cur);
        cur = *next.get(&cur)?;
    }
    (out.len() == next.len()).then_some(out)
}

pub fn rotation_set(seq: &[Point]) -> BTreeSet<PointSeq> {
    rotations(seq).into_iter().collect()
}

pub fn reps(s: &TsiSet) -> BTreeSet<PointSeq> {
    s.reps().cloned().collect()
}

/// Every union of a connected set of faces.
pub fn connected_unions(faces: &[PointSeq]) -> BTreeSet<BTreeSet<PointSeq>> {
    let n = faces.len();
    let mut out = BTreeSet::new();
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let mut seen = vec![idx[0]];
        let mut stack = vec![idx[0]];
        while let Some(i) = stack.pop() {
            for &j in &idx {
                if !seen.contains(&j) && adjacent(&faces[i], &faces[j]) {
                    seen.push(j);
                    stack.push(j);
                }
            }
        }
        if seen.len() == idx.len() {
            let members: Vec<&PointSeq> = idx.iter().map(|&i| &faces[i]).collect();
            let b = union_boundary(&members).expect("tree-shaped union is a disk");
            out.insert(rotation_set(&b));
        }
    }
    out
}

// ---------- relations ----------

pub type Assignment = BTreeMap<Var, Point>;

pub fn as_maps(r: &Relation) -> BTreeSet<Assignment> {
    r.tuples().map(|t| r.vars.iter().copied().zip(t.iter().copied()).collect()).collect()
}

pub fn nested_loop_join(a: &BTreeSet<Assignment>, b: &BTreeSet<Assignment>) -> BTreeSet<Assignment> {
    let mut out = BTreeSet::new();
    for x in a {
        for y in b {
            if x.iter().all(|(v, p)| y.get(v).is_none_or(|q| q == p)) {
                let mut m = x.clone();
                m.extend(y.iter().map(|(v, p)| (*v, *p)));
                out.insert(m);
            }
        }
    }
    out
}

pub fn universe(n: usize) -> Vec<Point> {
    (0..n).map(|i| letter(15 + i)).collect()
}

pub fn random_tuples<R: Rng>(rng: &mut R, arity: usize, pts: &[Point], max: usize) -> Vec<Tuple> {
    let count = rng.gen_range(0..=max);
    let mut out: Vec<Tuple> = Vec::new();
    for _ in 0..count * 3 {
        if out.len() >= count {
            break;
        }
        let mut p = pts.to_vec();
        p.shuffle(rng);
        let t: Tuple = p[..arity].to_vec();
        if !out.contains(&t) {
            out.push(t);
        }
    }
    out
}

pub fn random_relation<R: Rng>(rng: &mut R, vars: &[Var], pts: &[Point], max: usize) -> Relation {
    let arity = rng.gen_range(1..=vars.len().min(pts.len()));
    let mut vs = vars.to_vec();
    vs.shuffle(rng);
    vs.truncate(arity);
    Relation::from_tuples(vs, random_tuples(rng, arity, pts, max))
}

/// Predicate tables keyed by name; the mock store behind branch execution.
pub struct Tables {
    pub tables: HashMap<String, IndexMap<Tuple, CondId>>,
    pub points: Vec<Point>,
}

fn constraint_truth(e: &Expr, binding: &Assignment) -> bool {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    e.to_string().hash(&mut h);
    for v in e.points() {
        binding.get(&v).hash(&mut h);
    }
    h.finish() % 3 != 0
}

impl Tables {
    pub fn holds(&self, atom: &Atom, a: &Assignment) -> bool {
        match atom {
            Atom::Rel(r) => self.tables[&r.predicate].contains_key(&r.vars.iter().map(|v| a[v]).collect::<Tuple>()),
            Atom::Not(r) => {
                let pts: Vec<Point> = r.distinct_vars().iter().map(|v| a[v]).collect();
                let distinct = pts.iter().collect::<BTreeSet<_>>().len() == pts.len();
                distinct && !self.tables[&r.predicate].contains_key(&r.vars.iter().map(|v| a[v]).collect::<Tuple>())
            }
            Atom::Alg(e) => constraint_truth(e, a),
        }
    }

    /// All assignments of `vars` over the points that satisfy every atom.
    pub fn brute_force(&self, vars: &[Var], atoms: &[Atom]) -> BTreeSet<Assignment> {
        let mut out = BTreeSet::new();
        let n = self.points.len();
        let total = n.pow(vars.len() as u32);
        for mut code in 0..total {
            let mut a = Assignment::new();
            for &v in vars {
                a.insert(v, self.points[code % n]);
                code /= n;
            }
            if atoms.iter().all(|atom| self.holds(atom, &a)) {
                out.insert(a);
            }
        }
        out
    }

    pub fn eval(&self, e: &GplExpr, a: &Assignment) -> bool {
        match e {
            GplExpr::Rel(r) => self.holds(&Atom::Rel(r.clone()), a),
            GplExpr::Alg(x) => self.holds(&Atom::Alg(x.clone()), a),
            GplExpr::Not(inner) => match inner.as_ref() {
                GplExpr::Rel(r) => self.holds(&Atom::Not(r.clone()), a),
                other => !self.eval(other, a),
            },
            GplExpr::And(cs) => cs.iter().all(|c| self.eval(c, a)),
            GplExpr::Or(cs) => cs.iter().any(|c| self.eval(c, a)),
        }
    }
}

impl RelationSource for Tables {
    fn extension(&self, predicate: &str, _arity: usize) -> Option<&IndexMap<Tuple, CondId>> {
        self.tables.get(predicate)
    }

    fn universe(&self) -> Vec<Point> {
        self.points.clone()
    }

    fn check_constraint(&self, constraint: &Expr, binding: &[(Var, Point)]) -> ConstraintCheck {
        let a: Assignment = binding.iter().copied().collect();
        ConstraintCheck { holds: constraint_truth(constraint, &a), premises: vec![], timed_out: false }
    }
}

/// Random predicate tables `R0..R{count}` of fixed arities, ids unique.
pub fn random_tables<R: Rng>(rng: &mut R, arities: &[usize], pts: &[Point], max: usize) -> Tables {
    let mut id = 0;
    let mut tables = HashMap::new();
    for (i, &k) in arities.iter().enumerate() {
        let mut ext = IndexMap::new();
        for t in random_tuples(rng, k, pts, max) {
            ext.insert(t, id);
            id += 1;
        }
        tables.insert(format!("R{i}"), ext);
    }
    Tables { tables, points: pts.to_vec() }
}

fn rel_over<R: Rng>(rng: &mut R, arities: &[usize], vars: &[Var]) -> Option<RelAtom> {
    let fitting: Vec<usize> = (0..arities.len()).filter(|&i| arities[i] == vars.len()).collect();
    let &i = fitting.choose(rng)?;
    let mut vs = vars.to_vec();
    vs.shuffle(rng);
    Some(RelAtom::new(format!("R{i}"), vs))
}

fn alg_over<R: Rng>(rng: &mut R, vars: &[Var]) -> Expr {
    let a = vars[rng.gen_range(0..vars.len())];
    let b = vars[rng.gen_range(0..vars.len())];
    let name = if a == b { format!("{a}") } else { format!("{a}{b}") };
    let attr = if a == b { "RadiusOfCircle" } else { "LengthOfLine" };
    Expr::sub(Expr::attr(attr, &name), Expr::int(rng.gen_range(1..5)))
}

/// A random premise whose every disjunct binds exactly `vars` positively.
/// Tables must provide one predicate per arity `1..=vars.len()`.
pub fn random_premise<R: Rng>(rng: &mut R, arities: &[usize], vars: &[Var], depth: usize) -> GplExpr {
    let leaf = |rng: &mut R| GplExpr::Rel(rel_over(rng, arities, vars).expect("arity available"));
    if depth == 0 {
        return leaf(rng);
    }
    match rng.gen_range(0..5) {
        0 => leaf(rng),
        1 | 2 => {
            let mut parts = Vec::new();
            if vars.len() > 1 && rng.gen_bool(0.5) {
                let cut = rng.gen_range(1..vars.len());
                let overlap = rng.gen_range(0..cut);
                parts.push(random_premise(rng, arities, &vars[..cut], depth - 1));
                parts.push(random_premise(rng, arities, &vars[overlap..], depth - 1));
            } else {
                parts.push(random_premise(rng, arities, vars, depth - 1));
            }
            if rng.gen_bool(0.4) {
                let k = rng.gen_range(1..=vars.len());
                let sub = &vars[..k];
                parts.push(GplExpr::Not(Box::new(GplExpr::Rel(rel_over(rng, arities, sub).unwrap()))));
            }
            if rng.gen_bool(0.3) {
                parts.push(GplExpr::Alg(alg_over(rng, vars)));
            }
            parts.shuffle(rng);
            GplExpr::And(parts)
        }
        _ => {
            let n = rng.gen_range(2..=3);
            GplExpr::Or((0..n).map(|_| random_premise(rng, arities, vars, depth - 1)).collect())
        }
    }
}

// ---------- linear systems ----------

pub type Row = Vec<BigRational>;

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Row echelon rank over the rationals.
pub fn rank(rows: &[Row]) -> usize {
    let mut m: Vec<Row> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = &m[i][c] / &m[r][c];
                for k in c..cols {
                    let d = &f * &m[r][k];
                    m[i][k] -= d;
                }
            }
        }
        r += 1;
    }
    r
}
