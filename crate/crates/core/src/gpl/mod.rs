//! Geometric predicate logic evaluated as relational algebra.

mod exec;
mod relation;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::expr::Expr;
use crate::kb::Conclusion;
use crate::point::{grouped_string, Var};

pub use exec::{execute_branch, BranchOutcome, ConstraintCheck, RelationSource};
pub use relation::{anti_filter, atom_relation, complement_rel, filter_algebraic, join, union_rel, Relation, Tuple};

pub type CondId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GplError {
    #[error("relations have different variable structure: {0:?} vs {1:?}")]
    StructureMismatch(Vec<Var>, Vec<Var>),
    #[error("negation applies to a single relation atom, found {0}")]
    NotOnCompound(String),
    #[error("branches bind different variables: {0:?} vs {1:?}")]
    BranchVarsMismatch(Vec<Var>, Vec<Var>),
    #[error("algebraic constraint uses unbound variables {0:?}")]
    UnboundConstraint(Vec<Var>),
}

/// A relation atom such as `Collinear(AMB)`; points are variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelAtom {
    pub predicate: String,
    pub vars: Vec<Var>,
    pub groups: Vec<usize>,
}

impl RelAtom {
    pub fn new(predicate: impl Into<String>, vars: Vec<Var>) -> RelAtom {
        let groups = vec![vars.len()];
        RelAtom { predicate: predicate.into(), vars, groups }
    }

    /// Variables in first-occurrence order without repeats.
    pub fn distinct_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for &v in &self.vars {
            if !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }
}

impl fmt::Display for RelAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.predicate, grouped_string(&self.vars, &self.groups))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GplExpr {
    Rel(RelAtom),
    /// An algebraic constraint `expr = 0`.
    Alg(Expr),
    Not(Box<GplExpr>),
    And(Vec<GplExpr>),
    Or(Vec<GplExpr>),
}

impl fmt::Display for GplExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GplExpr::Rel(a) => write!(f, "{a}"),
            GplExpr::Alg(e) => f.write_str(&crate::lang::render_equation(e)),
            GplExpr::Not(c) => write!(f, "~{c}"),
            GplExpr::And(cs) | GplExpr::Or(cs) => {
                let sep = if matches!(self, GplExpr::And(_)) { "&" } else { "|" };
                f.write_str("(")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    Rel(RelAtom),
    Not(RelAtom),
    Alg(Expr),
}

impl Atom {
    pub fn vars(&self) -> Vec<Var> {
        match self {
            Atom::Rel(a) | Atom::Not(a) => a.distinct_vars(),
            Atom::Alg(e) => e.points(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Rel(a) => write!(f, "{a}"),
            Atom::Not(a) => write!(f, "~{a}"),
            Atom::Alg(e) => f.write_str(&crate::lang::render_equation(e)),
        }
    }
}

/// One simple conjunction of a premise's DNF.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoremBranch {
    pub atoms: Vec<Atom>,
    pub conclusions: Vec<Conclusion>,
}

impl TheoremBranch {
    /// Variables bound by positive relation atoms.
    pub fn bound_vars(&self) -> BTreeSet<Var> {
        positive_vars(&self.atoms)
    }
}

impl fmt::Display for TheoremBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str("&")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

pub fn positive_vars(atoms: &[Atom]) -> BTreeSet<Var> {
    atoms
        .iter()
        .filter_map(|a| match a {
            Atom::Rel(r) => Some(r.vars.iter().copied()),
            _ => None,
        })
        .flatten()
        .collect()
}

/// Expands a premise into disjunctive normal form by distributing `&` over
/// `|`. Branch order follows the left-to-right reading of the expression.
pub fn to_dnf(expr: &GplExpr) -> Result<Vec<Vec<Atom>>, GplError> {
    let branches = dnf(expr)?;
    if let Some(first) = branches.first() {
        let want = positive_vars(first);
        for b in &branches[1..] {
            let got = positive_vars(b);
            if got != want {
                return Err(GplError::BranchVarsMismatch(want.into_iter().collect(), got.into_iter().collect()));
            }
        }
    }
    Ok(branches)
}

fn dnf(expr: &GplExpr) -> Result<Vec<Vec<Atom>>, GplError> {
    Ok(match expr {
        GplExpr::Rel(a) => vec![vec![Atom::Rel(a.clone())]],
        GplExpr::Alg(e) => vec![vec![Atom::Alg(e.clone())]],
        GplExpr::Not(inner) => match inner.as_ref() {
            GplExpr::Rel(a) => vec![vec![Atom::Not(a.clone())]],
            other => return Err(GplError::NotOnCompound(other.to_string())),
        },
        GplExpr::Or(cs) => {
            let mut out = Vec::new();
            for c in cs {
                out.extend(dnf(c)?);
            }
            out
        }
        GplExpr::And(cs) => {
            let mut acc: Vec<Vec<Atom>> = vec![vec![]];
            for c in cs {
                let part = dnf(c)?;
                let mut next = Vec::with_capacity(acc.len() * part.len());
                for a in &acc {
                    for p in &part {
                        let mut b = a.clone();
                        b.extend(p.iter().cloned());
                        next.push(b);
                    }
                }
                acc = next;
            }
            acc
        }
    })
}

/// Orders a conjunction for evaluation.
///
/// The first positive relation atom seeds the fold (or, when `sizes` is
/// given, the one with the smallest extension). After each composition every
/// remaining atom whose variables are already bound is placed next as a
/// filter. Compositions prefer atoms connected to the bound variables.
/// Algebraic atoms go last.
pub fn reorder_branch(atoms: &[Atom], sizes: Option<&dyn Fn(&RelAtom) -> usize>) -> Vec<Atom> {
    let mut rest: Vec<Option<&Atom>> = atoms.iter().map(Some).collect();
    let mut bound: BTreeSet<Var> = BTreeSet::new();
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());

    let size_of = |a: &Atom| match (a, sizes) {
        (Atom::Rel(r), Some(f)) => f(r),
        _ => 0,
    };

    loop {
        // Filters: relation or negated atoms fully covered by bound variables.
        if !bound.is_empty() {
            for slot in rest.iter_mut() {
                if let Some(a @ (Atom::Rel(_) | Atom::Not(_))) = *slot {
                    if a.vars().iter().all(|v| bound.contains(v)) {
                        out.push(a.clone());
                        *slot = None;
                    }
                }
            }
        }
        let candidates: Vec<usize> = rest
            .iter()
            .enumerate()
            .filter_map(|(i, s)| matches!(s, Some(Atom::Rel(_))).then_some(i))
            .collect();
        if candidates.is_empty() {
            break;
        }
        let connected: Vec<usize> = candidates
            .iter()
            .copied()
            .filter(|&i| rest[i].unwrap().vars().iter().any(|v| bound.contains(v)))
            .collect();
        let pool = if connected.is_empty() { &candidates } else { &connected };
        let pick = match sizes {
            Some(_) => *pool.iter().min_by_key(|&&i| (size_of(rest[i].unwrap()), i)).unwrap(),
            None => pool[0],
        };
        let a = rest[pick].take().unwrap();
        bound.extend(a.vars());
        out.push(a.clone());
    }
    // Negations over unbound variables, then algebraic constraints.
    for a in rest.iter().flatten() {
        if matches!(a, Atom::Not(_)) {
            out.push((*a).clone());
        }
    }
    for a in rest.iter().flatten() {
        if matches!(a, Atom::Alg(_)) {
            out.push((*a).clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::points;

    fn rel(name: &str, vars: &str) -> GplExpr {
        GplExpr::Rel(RelAtom::new(name, points(vars).unwrap()))
    }

    fn names(atoms: &[Atom]) -> Vec<String> {
        atoms
            .iter()
            .map(|a| match a {
                Atom::Rel(r) => r.predicate.clone(),
                Atom::Not(r) => format!("~{}", r.predicate),
                Atom::Alg(_) => "RA".into(),
            })
            .collect()
    }

    fn ra(vars: &str) -> GplExpr {
        let p = points(vars).unwrap();
        GplExpr::Alg(Expr::sub(
            Expr::Attr(crate::expr::AttrTerm::new("LengthOfLine", p.clone())),
            Expr::int(1),
        ))
    }

    #[test]
    fn bare_atom_is_one_branch() {
        let b = to_dnf(&rel("R", "AB")).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].len(), 1);
    }

    #[test]
    fn not_on_conjunction_rejected() {
        let e = GplExpr::Not(Box::new(GplExpr::And(vec![rel("R", "AB"), rel("S", "AB")])));
        assert!(matches!(to_dnf(&e), Err(GplError::NotOnCompound(_))));
    }

    #[test]
    fn mismatched_branch_vars_rejected() {
        let e = GplExpr::Or(vec![rel("R", "AB"), rel("S", "BC")]);
        assert!(matches!(to_dnf(&e), Err(GplError::BranchVarsMismatch(..))));
    }

    #[test]
    fn single_atom_reorder_unchanged() {
        let atoms = vec![Atom::Rel(RelAtom::new("R", points("AB").unwrap()))];
        assert_eq!(reorder_branch(&atoms, None), atoms);
    }

    #[test]
    fn dynamic_reorder_starts_from_smallest() {
        let atoms = vec![
            Atom::Rel(RelAtom::new("Big", points("AB").unwrap())),
            Atom::Rel(RelAtom::new("Small", points("BC").unwrap())),
        ];
        let sizes = |r: &RelAtom| if r.predicate == "Big" { 100 } else { 2 };
        assert_eq!(names(&reorder_branch(&atoms, Some(&sizes))), ["Small", "Big"]);
    }

    #[test]
    fn algebraic_atoms_go_last() {
        let e = GplExpr::And(vec![ra("AB"), rel("R", "AB")]);
        let b = to_dnf(&e).unwrap();
        assert_eq!(names(&reorder_branch(&b[0], None)), ["R", "RA"]);
    }
}
