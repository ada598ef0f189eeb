use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;
use std::time::Instant;

use indexmap::IndexMap;
use thiserror::Error;

use crate::algebra::{self, AlgebraError, Classified, EquationSet, SolveOptions, SolveOutcome, TieBreak};
use crate::expr::{AttrTerm, Expr};
use crate::gpl::{CondId, ConstraintCheck, RelAtom, RelationSource, Tuple};
use crate::kb::{Conclusion, Kb, PredicateKind};
use crate::lang::{inverse_parse, RelFact};
use crate::point::{Point, Var};

pub const PREREQUISITE: &str = "prerequisite";
pub const EXTENDED: &str = "extended";

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Fact {
    Relation(RelFact),
    /// `lhs - rhs = 0` with attribute terms unresolved.
    Equation(Expr),
}

impl Fact {
    pub fn relation(predicate: &str, points: Vec<Point>) -> Fact {
        Fact::Relation(RelFact { predicate: predicate.to_string(), points })
    }

    pub fn predicate(&self) -> &str {
        match self {
            Fact::Relation(r) => &r.predicate,
            Fact::Equation(_) => "Equation",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Condition {
    pub id: CondId,
    pub fact: Fact,
    pub premises: Vec<CondId>,
    pub theorem: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("unknown predicate {0}")]
    UnknownPredicate(String),
    #[error("{fact}: format check failed")]
    FormatCheck { fact: String },
    #[error("{fact}: entity check failed, {missing} is not known")]
    EntityCheck { fact: String, missing: String },
    #[error("premise {0} does not exist")]
    BadPremise(CondId),
    #[error("{fact}: {source}")]
    Algebra { fact: String, source: AlgebraError },
    #[error("{0}: contradicts the known equations")]
    Inconsistent(String),
}

type Extension = IndexMap<Tuple, CondId>;

/// Append-only condition list with relation and equation indices.
#[derive(Clone, Debug)]
pub struct ConditionStore {
    kb: Arc<Kb>,
    conditions: Vec<Condition>,
    relations: HashMap<String, HashMap<usize, Extension>>,
    equations: EquationSet,
    points: BTreeSet<Point>,
    extended_upto: usize,
    /// Wall-clock limit applied to algebra calls.
    pub deadline: Option<Instant>,
    pub tie: TieBreak,
}

impl ConditionStore {
    pub fn new(kb: Arc<Kb>) -> ConditionStore {
        let domains = Arc::new(algebra::domain_table(&kb));
        ConditionStore {
            kb,
            conditions: Vec::new(),
            relations: HashMap::new(),
            equations: EquationSet::new(domains),
            points: BTreeSet::new(),
            extended_upto: 0,
            deadline: None,
            tie: TieBreak::Lowest,
        }
    }

    pub fn kb(&self) -> &Arc<Kb> {
        &self.kb
    }

    pub fn conditions(&self) -> &[Condition] {
        &self.conditions
    }

    pub fn condition(&self, id: CondId) -> Option<&Condition> {
        self.conditions.get(id)
    }

    pub fn len(&self) -> usize {
        self.conditions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conditions.is_empty()
    }

    pub fn points(&self) -> &BTreeSet<Point> {
        &self.points
    }

    pub fn equations(&self) -> &EquationSet {
        &self.equations
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions { tie: self.tie, deadline: self.deadline }
    }

    pub fn text(&self, id: CondId) -> String {
        inverse_parse(&self.kb, &self.conditions[id])
    }

    /// Id of the stored fact equivalent to `predicate(points)`.
    pub fn contains(&self, predicate: &str, points: &[Point]) -> Option<CondId> {
        self.relations.get(predicate)?.get(&points.len())?.get(points).copied()
    }

    pub fn extension(&self, predicate: &str, arity: usize) -> Option<&Extension> {
        self.relations.get(predicate)?.get(&arity)
    }

    /// Distinct stored facts of a predicate (one tuple per condition).
    pub fn facts_of(&self, predicate: &str) -> Vec<(CondId, &RelFact)> {
        self.conditions
            .iter()
            .filter_map(|c| match &c.fact {
                Fact::Relation(r) if r.predicate == predicate => Some((c.id, r)),
                _ => None,
            })
            .collect()
    }

    /// Replaces attribute terms by their symbols, checking that the
    /// underlying entities exist.
    pub fn resolve(&self, e: &Expr) -> Result<Expr, StoreError> {
        e.try_map_attrs(&mut |a| self.symbol(a).map(Expr::Sym))
    }

    /// Symbol of an attribute term, e.g. `ll_AB`.
    pub fn symbol(&self, a: &AttrTerm) -> Result<String, StoreError> {
        let def = self
            .kb
            .predicate(&a.name)
            .filter(|d| d.kind == PredicateKind::Attribution)
            .ok_or_else(|| StoreError::UnknownPredicate(a.name.clone()))?;
        if def.arity() != Some(a.points.len()) || !def.fv_ok(&a.points) {
            return Err(StoreError::FormatCheck { fact: a.to_string() });
        }
        let bind = def.binding(&a.points);
        for ee in &def.ee_check {
            let pts: Vec<Point> = ee.vars.iter().map(|v| bind[v]).collect();
            if self.contains(&ee.predicate, &pts).is_none() {
                return Err(StoreError::EntityCheck {
                    fact: a.to_string(),
                    missing: crate::lang::render_fact(&self.kb, &ee.predicate, &pts),
                });
            }
        }
        algebra::symbol_for(&self.kb, &a.name, &a.points)
            .map_err(|source| StoreError::Algebra { fact: a.to_string(), source })
    }

    fn fact_text(&self, fact: &Fact) -> String {
        match fact {
            Fact::Relation(r) => crate::lang::render_fact(&self.kb, &r.predicate, &r.points),
            Fact::Equation(e) => crate::lang::render_equation(e),
        }
    }

    /// Validity-checked insertion. `Ok(None)` when an equivalent fact is
    /// already stored.
    pub fn add_condition(&mut self, fact: Fact, premises: Vec<CondId>, theorem: &str) -> Result<Option<CondId>, StoreError> {
        if let Some(&p) = premises.iter().find(|&&p| p >= self.conditions.len()) {
            return Err(StoreError::BadPremise(p));
        }
        match &fact {
            Fact::Relation(r) => {
                let def = self.kb.predicate(&r.predicate).ok_or_else(|| StoreError::UnknownPredicate(r.predicate.clone()))?;
                if def.kind == PredicateKind::Attribution || !def.fv_ok(&r.points) {
                    return Err(StoreError::FormatCheck { fact: self.fact_text(&fact) });
                }
                let bind = def.binding(&r.points);
                for ee in &def.ee_check {
                    let pts: Vec<Point> = ee.vars.iter().map(|v| bind[v]).collect();
                    if self.contains(&ee.predicate, &pts).is_none() {
                        return Err(StoreError::EntityCheck {
                            fact: self.fact_text(&fact),
                            missing: crate::lang::render_fact(&self.kb, &ee.predicate, &pts),
                        });
                    }
                }
                if self.contains(&r.predicate, &r.points).is_some() {
                    return Ok(None);
                }
                let reps = def.reps(&r.points);
                Ok(Some(self.push_relation(fact, reps, premises, theorem)))
            }
            Fact::Equation(e) => {
                let resolved = self.resolve(e)?;
                let text = || self.fact_text(&fact);
                match self.equations.classify(&resolved).map_err(|source| StoreError::Algebra { fact: text(), source })? {
                    Classified::Trivial | Classified::Duplicate(_) => Ok(None),
                    Classified::Inconsistent => Err(StoreError::Inconsistent(text())),
                    Classified::New(raw) => {
                        let id = self.conditions.len();
                        self.conditions.push(Condition { id, fact, premises, theorem: theorem.to_string() });
                        self.equations.insert(resolved, raw, id);
                        Ok(Some(id))
                    }
                }
            }
        }
    }

    fn push_relation(&mut self, fact: Fact, reps: Vec<Vec<Point>>, premises: Vec<CondId>, theorem: &str) -> CondId {
        let id = self.conditions.len();
        let Fact::Relation(r) = &fact else { unreachable!() };
        if r.predicate == "Point" {
            self.points.insert(r.points[0]);
        }
        let ext = self.relations.entry(r.predicate.clone()).or_default().entry(r.points.len()).or_default();
        for rep in reps {
            ext.entry(rep).or_insert(id);
        }
        self.conditions.push(Condition { id, fact, premises, theorem: theorem.to_string() });
        id
    }

    /// Applies `extend` rules of every condition not yet extended, to a
    /// fixpoint. Returns the number of new conditions.
    pub fn auto_extend(&mut self) -> usize {
        let before = self.conditions.len();
        while self.extended_upto < self.conditions.len() {
            let i = self.extended_upto;
            self.extended_upto += 1;
            let Fact::Relation(r) = &self.conditions[i].fact else { continue };
            let Some(def) = self.kb.predicate(&r.predicate) else { continue };
            if def.extend.is_empty() {
                continue;
            }
            let bind = def.binding(&r.points);
            let extends = def.extend.clone();
            for c in &extends {
                let fact = instantiate(c, &|v| bind[&v]);
                if let Err(e) = self.add_condition(fact, vec![i], EXTENDED) {
                    log::debug!("extension of condition {i} skipped: {e}");
                }
            }
        }
        self.conditions.len() - before
    }

    /// Drops every condition with id >= `len` and rebuilds the indices.
    pub fn truncate(&mut self, len: usize) {
        if len >= self.conditions.len() {
            return;
        }
        let kept: Vec<Condition> = self.conditions.drain(..).take(len).collect();
        self.relations.clear();
        self.equations.clear();
        self.points.clear();
        for c in kept {
            match &c.fact {
                Fact::Relation(r) => {
                    let reps = self.kb.predicate(&r.predicate).map(|d| d.reps(&r.points)).unwrap_or_default();
                    self.push_relation(c.fact.clone(), reps, c.premises.clone(), &c.theorem);
                }
                Fact::Equation(e) => {
                    let id = self.conditions.len();
                    if let Ok(resolved) = self.resolve(e) {
                        if let Ok(Classified::New(raw)) = self.equations.classify(&resolved) {
                            self.equations.insert(resolved, raw, id);
                        }
                    }
                    self.conditions.push(c);
                }
            }
        }
        self.extended_upto = self.extended_upto.min(len);
    }

    /// Value of an expression through its minimum dependency system.
    pub fn solve_expr(&self, e: &Expr) -> SolveOutcome {
        match self.resolve(e) {
            Ok(r) => self.equations.solve(&r, self.solve_options()),
            Err(_) => SolveOutcome::default(),
        }
    }

    /// The given ids plus every condition they transitively depend on.
    pub fn ancestors(&self, ids: impl IntoIterator<Item = CondId>) -> BTreeSet<CondId> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<CondId> = ids.into_iter().collect();
        while let Some(id) = stack.pop() {
            if id < self.conditions.len() && seen.insert(id) {
                stack.extend(self.conditions[id].premises.iter().copied());
            }
        }
        seen
    }

    /// Fact set independent of ids, for comparisons.
    pub fn fact_set(&self) -> BTreeSet<String> {
        self.conditions
            .iter()
            .map(|c| match &c.fact {
                Fact::Relation(r) => {
                    let def = self.kb.predicate(&r.predicate).expect("known predicate");
                    crate::lang::render_fact(&self.kb, &r.predicate, &def.canonical(&r.points))
                }
                Fact::Equation(e) => match self.resolve(e) {
                    Ok(res) => crate::algebra::Poly::from_expr(&res).map(|p| p.normalized().to_string()).unwrap_or_default(),
                    Err(_) => crate::lang::render_equation(e),
                },
            })
            .collect()
    }
}

/// Instantiates a conclusion under a variable mapping.
pub(crate) fn instantiate(c: &Conclusion, map: &dyn Fn(Var) -> Point) -> Fact {
    match c {
        Conclusion::Rel(a) => Fact::Relation(instantiate_atom(a, map)),
        Conclusion::Eq(e) => Fact::Equation(e.rename_points(map)),
    }
}

pub(crate) fn instantiate_atom(a: &RelAtom, map: &dyn Fn(Var) -> Point) -> RelFact {
    RelFact { predicate: a.predicate.clone(), points: a.vars.iter().map(|&v| map(v)).collect() }
}

impl RelationSource for ConditionStore {
    fn extension(&self, predicate: &str, arity: usize) -> Option<&Extension> {
        ConditionStore::extension(self, predicate, arity)
    }

    fn universe(&self) -> Vec<Point> {
        self.points.iter().copied().collect()
    }

    fn check_constraint(&self, constraint: &Expr, binding: &[(Var, Point)]) -> ConstraintCheck {
        let map = |v: Var| binding.iter().find(|(x, _)| *x == v).map(|(_, p)| *p).unwrap_or(v);
        let inst = constraint.rename_points(&map);
        let Ok(resolved) = self.resolve(&inst) else {
            return ConstraintCheck::default();
        };
        let r = self.equations.evaluate_constraint(&resolved, self.solve_options());
        ConstraintCheck {
            holds: r.value.as_ref().is_some_and(|v| v.is_zero()),
            premises: r.premises.into_iter().collect(),
            timed_out: r.timed_out,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::points;

    fn store() -> ConditionStore {
        let mut s = ConditionStore::new(Kb::bundled());
        for p in "AMB".chars() {
            s.add_condition(Fact::relation("Point", vec![Point::new(p).unwrap()]), vec![], PREREQUISITE).unwrap();
        }
        s.add_condition(Fact::relation("Line", points("AB").unwrap()), vec![], PREREQUISITE).unwrap();
        s.add_condition(Fact::relation("Line", points("AM").unwrap()), vec![], PREREQUISITE).unwrap();
        s.add_condition(Fact::relation("Line", points("MB").unwrap()), vec![], PREREQUISITE).unwrap();
        s
    }

    #[test]
    fn midpoint_requires_collinear() {
        let mut s = store();
        let f = Fact::relation("IsMidpointOfLine", points("MAB").unwrap());
        match s.add_condition(f.clone(), vec![], PREREQUISITE) {
            Err(StoreError::EntityCheck { missing, .. }) => assert_eq!(missing, "Collinear(AMB)"),
            other => panic!("{other:?}"),
        }
        s.add_condition(Fact::relation("Collinear", points("AMB").unwrap()), vec![], PREREQUISITE).unwrap();
        let id = s.add_condition(f, vec![6], PREREQUISITE).unwrap().unwrap();
        assert_eq!(s.condition(id).unwrap().premises, vec![6]);
        let dup = Fact::relation("IsMidpointOfLine", points("MBA").unwrap());
        assert_eq!(s.add_condition(dup, vec![], PREREQUISITE).unwrap(), None);
    }

    #[test]
    fn extension_adds_equation_once() {
        let mut s = store();
        s.add_condition(Fact::relation("Collinear", points("AMB").unwrap()), vec![], PREREQUISITE).unwrap();
        s.add_condition(Fact::relation("IsMidpointOfLine", points("MAB").unwrap()), vec![], PREREQUISITE).unwrap();
        let before = s.len();
        let n = s.auto_extend();
        assert!(n >= 1);
        let eq = s.conditions()[before..].iter().find(|c| matches!(c.fact, Fact::Equation(_))).unwrap();
        assert_eq!(s.text(eq.id), "Equal(LengthOfLine(AM),LengthOfLine(MB))");
        assert_eq!(eq.theorem, EXTENDED);
        assert_eq!(s.auto_extend(), 0);
    }

    #[test]
    fn truncate_restores_indices() {
        let mut s = store();
        let len = s.len();
        s.add_condition(Fact::relation("Collinear", points("AMB").unwrap()), vec![], PREREQUISITE).unwrap();
        let e = Expr::sub(Expr::attr("LengthOfLine", "AB"), Expr::int(4));
        s.add_condition(Fact::Equation(e.clone()), vec![], PREREQUISITE).unwrap();
        assert!(s.solve_expr(&Expr::attr("LengthOfLine", "BA")).value.is_some());
        s.truncate(len);
        assert!(s.contains("Collinear", &points("BMA").unwrap()).is_none());
        assert!(s.solve_expr(&Expr::attr("LengthOfLine", "BA")).value.is_none());
        assert_eq!(s.add_condition(Fact::Equation(e), vec![], PREREQUISITE).unwrap(), Some(len));
    }

    #[test]
    fn attribute_of_missing_entity_rejected() {
        let s = store();
        let e = Expr::attr("LengthOfLine", "AZ");
        assert!(matches!(s.resolve(&e), Err(StoreError::EntityCheck { .. })));
    }
}
