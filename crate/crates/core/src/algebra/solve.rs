//! Elimination, root selection and minimum dependency selection.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::poly::{Atom, Func, Monomial, Poly};
use super::value::{cos_deg, invert_table, sin_deg, tan_deg, Value};

/// Admissible range of a symbol, used to pick roots.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Real,
    NonNegative,
    /// Closed interval in degrees.
    Range(f64, f64),
}

impl Domain {
    pub fn admits(&self, v: &Value) -> bool {
        let x = v.to_f64();
        let eps = super::value::TOLERANCE;
        match self {
            Domain::Real => true,
            Domain::NonNegative => x > -eps,
            Domain::Range(lo, hi) => x > lo - eps && x < hi + eps,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Timeout;

/// Column order: nonlinear monomials first so that linear symbols end up
/// expressed in terms of constants.
fn col_key(m: &Monomial) -> (bool, &Monomial) {
    (m.as_linear_sym().is_some(), m)
}

fn columns(rows: &[Poly]) -> Vec<Monomial> {
    let mut cols: BTreeSet<&Monomial> = BTreeSet::new();
    for r in rows {
        cols.extend(r.monomials());
    }
    let mut cols: Vec<Monomial> = cols.into_iter().cloned().collect();
    cols.sort_by(|a, b| col_key(a).cmp(&col_key(b)));
    cols
}

/// Reduced row echelon form over the monomials of `rows`.
pub fn rref(mut rows: Vec<Poly>) -> Vec<Poly> {
    rows.retain(|r| !r.is_zero());
    let cols = columns(&rows);
    let mut done = vec![false; rows.len()];
    for col in &cols {
        let pivot = (0..rows.len())
            .filter(|&i| !done[i] && rows[i].coef(col).is_some())
            .min_by_key(|&i| (!rows[i].coef(col).unwrap().is_exact(), i));
        let Some(p) = pivot else { continue };
        let inv = rows[p].coef(col).unwrap().recip().expect("non-zero pivot");
        rows[p] = rows[p].scale(&inv);
        done[p] = true;
        let prow = rows[p].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == p {
                continue;
            }
            if let Some(k) = row.coef(col).cloned() {
                *row = row.sub(&prow.scale(&k));
            }
        }
    }
    rows.retain(|r| !r.is_zero());
    rows
}

enum Found {
    Known(String, Value),
    Derived(Poly),
    Nothing,
}

fn pick_unique(cands: Vec<Value>, domain: &Domain) -> Option<Value> {
    let mut ok: Vec<Value> = Vec::new();
    for c in cands.into_iter().filter(|c| domain.admits(c)) {
        if !ok.iter().any(|o| o.approx_eq(&c)) {
            ok.push(c);
        }
    }
    (ok.len() == 1).then(|| ok.pop().unwrap())
}

fn root(v: &Value, e: u32, domain: &Domain) -> Option<Value> {
    if e == 1 {
        return Some(v.clone());
    }
    let inv = num::BigRational::new(1.into(), (e as i64).into());
    if e % 2 == 0 {
        if v.signum() < 0 {
            return None;
        }
        let r = v.pow_rational(&inv)?;
        pick_unique(vec![r.clone(), r.neg()], domain)
    } else {
        let r = if v.signum() < 0 { v.neg().pow_rational(&inv)?.neg() } else { v.pow_rational(&inv)? };
        pick_unique(vec![r], domain)
    }
}

fn angle_domain(arg: &Poly, domain_of: &dyn Fn(&str) -> Domain) -> Domain {
    match arg.monomials().next().and_then(|m| m.as_linear_sym()) {
        Some(s) if arg.terms.len() == 1 => domain_of(s),
        _ => Domain::Range(0.0, 180.0),
    }
}

fn determine(mono: &Monomial, v: &Value, domain_of: &dyn Fn(&str) -> Domain) -> Found {
    let [(atom, e)] = mono.0.as_slice() else {
        return Found::Nothing;
    };
    match atom {
        Atom::Sym(s) => match root(v, *e, &domain_of(s)) {
            Some(x) => Found::Known(s.clone(), x),
            None => Found::Nothing,
        },
        Atom::Apply(f, args) => {
            let dom = match (f, *e) {
                (_, 1) => Domain::Real,
                (Func::Sqrt | Func::Sin, _) => Domain::NonNegative,
                _ => return Found::Nothing,
            };
            let Some(v) = root(v, *e, &dom) else {
                return Found::Nothing;
            };
            let arg = &args[0];
            let target = match f {
                Func::Sqrt => {
                    if v.signum() < 0 {
                        return Found::Nothing;
                    }
                    v.mul(&v)
                }
                Func::Inv => match v.recip() {
                    Some(x) => x,
                    None => return Found::Nothing,
                },
                Func::Pow(q) => {
                    if v.signum() < 0 {
                        return Found::Nothing;
                    }
                    match v.pow_rational(&q.recip()) {
                        Some(x) => x,
                        None => return Found::Nothing,
                    }
                }
                Func::Sin | Func::Cos | Func::Tan => {
                    let g: fn(&Value) -> Option<Value> = match f {
                        Func::Sin => |x| Some(sin_deg(x)),
                        Func::Cos => |x| Some(cos_deg(x)),
                        _ => tan_deg,
                    };
                    let dom = angle_domain(arg, domain_of);
                    let hits: Vec<Value> = invert_table(g, &v).into_iter().map(Value::int).collect();
                    match pick_unique(hits, &dom) {
                        Some(a) => a,
                        None => return Found::Nothing,
                    }
                }
                Func::Mod => return Found::Nothing,
            };
            Found::Derived(arg.sub(&Poly::constant(target)))
        }
    }
}

/// Roots of a row that is a polynomial of degree <= 2 in a single symbol.
fn univariate(row: &Poly, domain_of: &dyn Fn(&str) -> Domain) -> Option<(String, Value)> {
    let mut sym: Option<&str> = None;
    let mut coef = [Value::zero(), Value::zero(), Value::zero()];
    for (m, v) in &row.terms {
        if m.is_const() {
            coef[0] = v.clone();
            continue;
        }
        let [(Atom::Sym(s), e)] = m.0.as_slice() else { return None };
        if *e > 2 || sym.is_some_and(|x| x != s) {
            return None;
        }
        sym = Some(s);
        coef[*e as usize] = v.clone();
    }
    let s = sym?;
    let (a, b, c) = (&coef[2], &coef[1], &coef[0]);
    if a.is_zero() {
        return None;
    }
    let disc = b.mul(b).sub(&Value::int(4).mul(a).mul(c));
    let sq = disc.sqrt()?;
    let two_a = Value::int(2).mul(a);
    let r1 = b.neg().add(&sq).div(&two_a)?;
    let r2 = b.neg().sub(&sq).div(&two_a)?;
    pick_unique(vec![r1, r2], &domain_of(s)).map(|v| (s.to_string(), v))
}

/// Solves as much of the system as possible.
///
/// Repeats elimination, reading off single-monomial rows, inverting
/// function applications and solving univariate quadratics until nothing
/// new is learned.
pub fn solve_system(
    polys: &[Poly],
    domain_of: &dyn Fn(&str) -> Domain,
    deadline: Option<Instant>,
) -> Result<BTreeMap<String, Value>, Timeout> {
    let mut known: BTreeMap<String, Value> = BTreeMap::new();
    let mut work: Vec<Poly> = polys.to_vec();
    let mut derived_seen: BTreeSet<Poly> = BTreeSet::new();
    loop {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(Timeout);
        }
        let lookup = |s: &str| known.get(s).cloned();
        let sub: Vec<Poly> = work.iter().filter_map(|p| p.substitute(&lookup).ok()).collect();
        let rows = rref(sub);
        let mut progress = false;
        let mut learned: Vec<(String, Value)> = Vec::new();
        for row in &rows {
            let monos: Vec<&Monomial> = row.monomials().collect();
            if monos.len() == 1 {
                let v = row.constant_term().neg().div(row.coef(monos[0]).unwrap());
                let Some(v) = v else { continue };
                match determine(monos[0], &v, domain_of) {
                    Found::Known(s, x) => learned.push((s, x)),
                    Found::Derived(p) => {
                        let key = p.normalized();
                        if derived_seen.insert(key) {
                            work.push(p);
                            progress = true;
                        }
                    }
                    Found::Nothing => {}
                }
            } else if let Some((s, x)) = univariate(row, domain_of) {
                learned.push((s, x));
            }
        }
        for (s, x) in learned {
            if !known.contains_key(&s) {
                known.insert(s, x);
                progress = true;
            }
        }
        if !progress {
            return Ok(known);
        }
    }
}

/// Incrementally maintained echelon basis, used to skip candidates that add
/// no new information.
#[derive(Default, Clone)]
struct Basis {
    rows: Vec<(Monomial, Poly)>,
}

impl Basis {
    fn reduce(&self, p: &Poly) -> Poly {
        let mut r = p.clone();
        for (piv, row) in &self.rows {
            if let Some(k) = r.coef(piv).cloned() {
                r = r.sub(&row.scale(&k));
            }
        }
        r
    }

    /// Inserts `p`, returning false when it reduces to a constant.
    fn insert(&mut self, p: &Poly) -> bool {
        let r = self.reduce(p);
        let Some(piv) = r.monomials().min_by(|a, b| col_key(a).cmp(&col_key(b))).cloned() else {
            return false;
        };
        let inv = r.coef(&piv).unwrap().recip().expect("non-zero");
        self.rows.push((piv, r.scale(&inv)));
        true
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    Lowest,
    Random(u64),
}

/// Picks the minimum dependency subset for `target` among `candidates`.
///
/// Starting from the unknowns of the target, each step adds one candidate
/// that shares an unknown with the current set, introduces the fewest new
/// unknowns, and among those shares the most. Candidates carrying no new
/// linear information are skipped. Stops once the number of unknowns equals
/// the number of selected equations (target included) or nothing
/// qualifies. Returns indices into `candidates` in selection order.
pub fn select_min_dep(target: &Poly, candidates: &[Poly], tie: TieBreak) -> Vec<usize> {
    let mut rng = match tie {
        TieBreak::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        TieBreak::Lowest => None,
    };
    let unknowns: Vec<BTreeSet<String>> = candidates.iter().map(Poly::syms).collect();
    let mut used: Vec<bool> = unknowns.iter().map(BTreeSet::is_empty).collect();
    let mut basis = Basis::default();
    basis.insert(target);
    let mut m: BTreeSet<String> = target.syms();
    let mut t = 1usize;
    let mut chosen = Vec::new();
    while m.len() > t {
        let mut ranked: Vec<(usize, usize, usize)> = Vec::new();
        for (i, b) in unknowns.iter().enumerate() {
            if used[i] {
                continue;
            }
            let shared = b.intersection(&m).count();
            if shared == 0 {
                continue;
            }
            ranked.push((b.len() - shared, usize::MAX - shared, i));
        }
        if ranked.is_empty() {
            break;
        }
        ranked.sort_unstable();
        if let Some(rng) = rng.as_mut() {
            let mut start = 0;
            while start < ranked.len() {
                let key = (ranked[start].0, ranked[start].1);
                let end = ranked[start..].iter().position(|r| (r.0, r.1) != key).map_or(ranked.len(), |k| start + k);
                ranked[start..end].shuffle(rng);
                start = end;
            }
        }
        let mut picked = None;
        for &(_, _, i) in &ranked {
            used[i] = true;
            if basis.insert(&candidates[i]) {
                picked = Some(i);
                break;
            }
        }
        let Some(i) = picked else { break };
        chosen.push(i);
        m.extend(unknowns[i].iter().cloned());
        t += 1;
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly::apply;
    use num::BigRational;

    fn s(n: &str) -> Poly {
        Poly::sym(n)
    }

    fn c(n: i64) -> Poly {
        Poly::constant(Value::int(n))
    }

    fn real(_: &str) -> Domain {
        Domain::Real
    }

    fn nonneg(_: &str) -> Domain {
        Domain::NonNegative
    }

    #[test]
    fn linear_chain() {
        let sys = vec![s("g").sub(&s("a")), s("a").sub(&s("b")), s("b").sub(&c(4))];
        let k = solve_system(&sys, &real, None).unwrap();
        assert_eq!(k["g"], Value::int(4));
    }

    #[test]
    fn square_root_by_domain() {
        let sys = vec![s("g").sub(&s("x")), s("x").mul(&s("x")).sub(&c(2))];
        assert!(solve_system(&sys, &real, None).unwrap().get("g").is_none());
        let k = solve_system(&sys, &nonneg, None).unwrap();
        assert_eq!(k["g"], Value::sqrt_int(2));
        assert!((k["g"].to_f64().powi(2) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn underdetermined() {
        let sys = vec![s("g").sub(&s("x")), s("x").sub(&s("y"))];
        assert!(solve_system(&sys, &real, None).unwrap().get("g").is_none());
    }

    #[test]
    fn sine_inversion() {
        let half = Poly::constant(Value::rational(BigRational::new(1.into(), 2.into())));
        let sys = vec![apply(Func::Cos, vec![s("a")]).unwrap().sub(&half)];
        let dom = |_: &str| Domain::Range(0.0, 180.0);
        let k = solve_system(&sys, &dom, None).unwrap();
        assert_eq!(k["a"], Value::int(60));
        // sin is ambiguous on [0,180]
        let sys = vec![apply(Func::Sin, vec![s("a")]).unwrap().sub(&half)];
        assert!(solve_system(&sys, &dom, None).unwrap().is_empty());
    }

    #[test]
    fn quadratic_with_domain() {
        // x^2 - x - 6 = 0 -> 3 or -2
        let p = s("x").mul(&s("x")).sub(&s("x")).sub(&c(6));
        let k = solve_system(&[p], &nonneg, None).unwrap();
        assert_eq!(k["x"], Value::int(3));
    }

    #[test]
    fn min_dep_example() {
        let target = s("g").sub(&s("ll_AB"));
        let x = vec![s("ll_AB").sub(&s("ll_CD")), s("ll_CD").sub(&c(4)), s("ma_ABC").sub(&c(30))];
        let sel = select_min_dep(&target, &x, TieBreak::Lowest);
        assert_eq!(sel, vec![0, 1]);
    }

    #[test]
    fn min_dep_constant_target() {
        let target = s("g").sub(&c(5));
        let x = vec![s("a").sub(&c(1))];
        assert!(select_min_dep(&target, &x, TieBreak::Lowest).is_empty());
    }

    #[test]
    fn dependent_candidates_skipped() {
        let target = s("g").sub(&s("a")).sub(&s("b"));
        let x = vec![s("a").sub(&s("b")), s("b").sub(&s("a")), s("a").add(&s("b")).sub(&c(10))];
        let sel = select_min_dep(&target, &x, TieBreak::Lowest);
        assert_eq!(sel, vec![0, 2]);
    }
}
