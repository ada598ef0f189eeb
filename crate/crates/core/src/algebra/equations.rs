use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;
use std::time::Instant;

use super::poly::Poly;
use super::solve::{select_min_dep, solve_system, Domain, TieBreak};
use super::value::Value;
use super::{AlgebraError, TARGET};
use crate::expr::Expr;
use crate::gpl::CondId;

#[derive(Clone, Debug, PartialEq)]
pub struct Known {
    pub value: Value,
    pub premises: BTreeSet<CondId>,
}

#[derive(Clone, Debug)]
struct Stored {
    expr: Expr,
    source: CondId,
    /// The equation with known values substituted.
    reduced: Poly,
    /// Premises of the substituted values.
    extra: BTreeSet<CondId>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Classified {
    /// Normalizes to `0 = 0`.
    Trivial,
    /// Normalizes to a non-zero constant.
    Inconsistent,
    Duplicate(CondId),
    New(Poly),
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SolveOptions {
    pub tie: TieBreak,
    pub deadline: Option<Instant>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveOutcome {
    pub value: Option<Value>,
    pub premises: BTreeSet<CondId>,
    pub timed_out: bool,
    /// Stored equations used, excluding the target.
    pub selected: usize,
    /// Unknown symbols of the selected system, target excluded.
    pub frontier: BTreeSet<String>,
}

/// Equations `expr = 0` with provenance, plus values forced by single
/// unknown equations.
#[derive(Clone, Debug)]
pub struct EquationSet {
    domains: Arc<HashMap<String, Domain>>,
    eqs: Vec<Stored>,
    keys: BTreeMap<Poly, usize>,
    by_sym: HashMap<String, Vec<usize>>,
    known: BTreeMap<String, Known>,
}

impl Default for EquationSet {
    fn default() -> Self {
        EquationSet::new(Arc::new(HashMap::new()))
    }
}

impl EquationSet {
    pub fn new(domains: Arc<HashMap<String, Domain>>) -> EquationSet {
        EquationSet { domains, eqs: Vec::new(), keys: BTreeMap::new(), by_sym: HashMap::new(), known: BTreeMap::new() }
    }

    pub fn domain(&self, sym: &str) -> Domain {
        match sym.split_once('_') {
            Some((prefix, _)) => self.domains.get(prefix).cloned().unwrap_or(Domain::Real),
            None => Domain::Real,
        }
    }

    pub fn len(&self) -> usize {
        self.eqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eqs.is_empty()
    }

    pub fn clear(&mut self) {
        self.eqs.clear();
        self.keys.clear();
        self.by_sym.clear();
        self.known.clear();
    }

    /// Stored equations with their sources.
    pub fn equations(&self) -> impl Iterator<Item = (&Expr, CondId)> {
        self.eqs.iter().map(|e| (&e.expr, e.source))
    }

    pub fn known(&self, sym: &str) -> Option<&Known> {
        self.known.get(sym)
    }

    pub fn knowns(&self) -> &BTreeMap<String, Known> {
        &self.known
    }

    /// Decides how a resolved equation relates to the stored ones.
    pub fn classify(&self, expr: &Expr) -> Result<Classified, AlgebraError> {
        let raw = Poly::from_expr(expr)?;
        if raw.is_zero() {
            return Ok(Classified::Trivial);
        }
        if raw.as_constant().is_some() {
            return Ok(Classified::Inconsistent);
        }
        match self.keys.get(&raw.normalized()) {
            Some(&i) => Ok(Classified::Duplicate(self.eqs[i].source)),
            None => Ok(Classified::New(raw)),
        }
    }

    /// Stores an equation classified as new.
    pub fn insert(&mut self, expr: Expr, raw: Poly, source: CondId) {
        let i = self.eqs.len();
        self.keys.insert(raw.normalized(), i);
        let syms = raw.syms();
        for s in &syms {
            self.by_sym.entry(s.clone()).or_default().push(i);
        }
        let mut extra = BTreeSet::new();
        for s in &syms {
            if let Some(k) = self.known.get(s) {
                extra.extend(k.premises.iter().copied());
            }
        }
        let known = &self.known;
        let reduced = raw.substitute(&|s| known.get(s).map(|k| k.value.clone())).unwrap_or_else(|_| raw.clone());
        self.eqs.push(Stored { expr, source, reduced, extra });
        self.propagate(vec![i]);
    }

    /// Classifies and stores; true when something new was stored.
    pub fn add_equation(&mut self, expr: &Expr, source: CondId) -> Result<bool, AlgebraError> {
        match self.classify(expr)? {
            Classified::New(raw) => {
                self.insert(expr.clone(), raw, source);
                Ok(true)
            }
            _ => Ok(false),
        }
    }

    fn propagate(&mut self, mut queue: Vec<usize>) {
        while let Some(i) = queue.pop() {
            let syms = self.eqs[i].reduced.syms();
            if syms.len() != 1 {
                continue;
            }
            let s = syms.into_iter().next().unwrap();
            if self.known.contains_key(&s) {
                continue;
            }
            let dom = |x: &str| self.domain(x);
            let Ok(found) = solve_system(std::slice::from_ref(&self.eqs[i].reduced), &dom, None) else {
                continue;
            };
            let Some(v) = found.get(&s).cloned() else { continue };
            let mut premises = self.eqs[i].extra.clone();
            premises.insert(self.eqs[i].source);
            self.known.insert(s.clone(), Known { value: v.clone(), premises: premises.clone() });
            for &j in self.by_sym.get(&s).map(Vec::as_slice).unwrap_or(&[]) {
                let e = &mut self.eqs[j];
                let before = e.reduced.syms();
                if !before.contains(&s) {
                    continue;
                }
                if let Ok(r) = e.reduced.substitute(&|x| (x == s).then(|| v.clone())) {
                    e.reduced = r;
                    e.extra.extend(premises.iter().copied());
                    if e.reduced.syms().len() == 1 {
                        queue.push(j);
                    }
                }
            }
        }
    }

    /// Value of a resolved expression via its minimum dependency system.
    pub fn solve(&self, expr: &Expr, opts: SolveOptions) -> SolveOutcome {
        let mut out = SolveOutcome::default();
        let Ok(a) = Poly::from_expr(expr) else { return out };
        for s in a.syms() {
            if let Some(k) = self.known.get(&s) {
                out.premises.extend(k.premises.iter().copied());
            }
        }
        let known = &self.known;
        let Ok(a) = a.substitute(&|s| known.get(s).map(|k| k.value.clone())) else { return out };
        if let Some(v) = a.as_constant() {
            out.value = Some(v);
            return out;
        }
        let target = Poly::sym(TARGET).sub(&a);
        let cands: Vec<Poly> = self.eqs.iter().map(|e| e.reduced.clone()).collect();
        let sel = select_min_dep(&target, &cands, opts.tie);
        let mut system = vec![target.clone()];
        let mut frontier = a.syms();
        for &i in &sel {
            system.push(cands[i].clone());
            frontier.extend(cands[i].syms());
        }
        out.selected = sel.len();
        out.frontier = frontier;
        let dom = |x: &str| self.domain(x);
        match solve_system(&system, &dom, opts.deadline) {
            Ok(found) => {
                if let Some(v) = found.get(TARGET) {
                    out.value = Some(v.clone());
                    for &i in &sel {
                        out.premises.insert(self.eqs[i].source);
                        out.premises.extend(self.eqs[i].extra.iter().copied());
                    }
                } else {
                    out.premises.clear();
                }
            }
            Err(_) => {
                out.timed_out = true;
                out.premises.clear();
            }
        }
        out
    }

    /// True when the expression is determined to be zero.
    pub fn evaluate_constraint(&self, expr: &Expr, opts: SolveOptions) -> SolveOutcome {
        let mut r = self.solve(expr, opts);
        if !r.value.as_ref().is_some_and(Value::is_zero) {
            r.premises.clear();
        }
        r
    }
}
